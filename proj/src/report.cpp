#include "trapan/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "trapan/errors.hpp"

namespace trapan {

namespace {

constexpr int kWidth = 760;
constexpr int kHeight = 420;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 50;

const char* kSeriesColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                               "#ff7f0e", "#8c564b"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

void write_line_chart_svg(const std::filesystem::path& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<ChartSeries>& series) {
    double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
    bool first = true;
    for (const auto& s : series)
        for (const auto& [x, y] : s.points) {
            if (first) {
                xmin = xmax = x;
                ymin = ymax = y;
                first = false;
            } else {
                xmin = std::min(xmin, x);
                xmax = std::max(xmax, x);
                ymin = std::min(ymin, y);
                ymax = std::max(ymax, y);
            }
        }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) ymax = ymin + 1.0;

    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const double plot_h = kHeight - kMarginTop - kMarginBottom;
    auto px = [&](double x) { return kMarginLeft + (x - xmin) / (xmax - xmin) * plot_w; };
    auto py = [&](double y) {
        return kMarginTop + plot_h - (y - ymin) / (ymax - ymin) * plot_h;
    };

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
        << "\" height=\"" << kHeight << "\" font-family=\"sans-serif\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" "
        << "font-size=\"15\">" << title << "</text>\n";

    // axes and gridlines
    out << "<rect x=\"" << kMarginLeft << "\" y=\"" << kMarginTop << "\" width=\""
        << plot_w << "\" height=\"" << plot_h
        << "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fy = ymin + (ymax - ymin) * i / 4.0;
        const double fx = xmin + (xmax - xmin) * i / 4.0;
        out << "<line x1=\"" << kMarginLeft << "\" y1=\"" << py(fy) << "\" x2=\""
            << kMarginLeft + plot_w << "\" y2=\"" << py(fy)
            << "\" stroke=\"#ddd\"/>\n";
        out << "<text x=\"" << kMarginLeft - 6 << "\" y=\"" << py(fy) + 4
            << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(fy) << "</text>\n";
        out << "<text x=\"" << px(fx) << "\" y=\"" << kMarginTop + plot_h + 16
            << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(fx) << "</text>\n";
    }
    out << "<text x=\"" << kMarginLeft + plot_w / 2 << "\" y=\"" << kHeight - 12
        << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label << "</text>\n";
    out << "<text x=\"16\" y=\"" << kMarginTop + plot_h / 2
        << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 "
        << kMarginTop + plot_h / 2 << ")\">" << y_label << "</text>\n";

    int color_idx = 0;
    int legend_y = kMarginTop + 12;
    for (const auto& s : series) {
        const char* color = kSeriesColors[color_idx % 6];
        ++color_idx;
        if (!s.points.empty()) {
            out << "<polyline fill=\"none\" stroke=\"" << color
                << "\" stroke-width=\"1.5\" points=\"";
            for (const auto& [x, y] : s.points) out << px(x) << ',' << py(y) << ' ';
            out << "\"/>\n";
        }
        out << "<line x1=\"" << kMarginLeft + plot_w - 130 << "\" y1=\"" << legend_y
            << "\" x2=\"" << kMarginLeft + plot_w - 110 << "\" y2=\"" << legend_y
            << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << kMarginLeft + plot_w - 104 << "\" y=\"" << legend_y + 4
            << "\" font-size=\"11\">" << s.name << "</text>\n";
        legend_y += 16;
    }
    out << "</svg>\n";
    if (!out) throw IoError("write failed for " + path.string());
}

TrainLogSummary summarize_trainlog(const std::string& label, const TrainLog& log) {
    TrainLogSummary s;
    s.label = label;
    s.epochs = static_cast<int>(log.epochs.size());
    double u_sum = 0.0;
    for (const EpochRecord& r : log.epochs) {
        u_sum += r.u;
        if (r.reduced_ran) {
            ++s.reduced_epochs;
            if (r.reduced_loss) s.final_reduced_loss = *r.reduced_loss;
        }
        if (r.full_ran) {
            ++s.full_epochs;
            if (r.total_full_loss) s.final_total_full_loss = *r.total_full_loss;
        }
    }
    if (s.epochs > 0) s.mean_u = u_sum / s.epochs;
    return s;
}

void write_summary_csv(const std::filesystem::path& path,
                       const std::vector<TrainLogSummary>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "label,epochs,reduced_epochs,full_epochs,final_reduced_loss,"
           "final_total_full_loss,mean_u\n";
    for (const auto& r : rows)
        out << r.label << ',' << r.epochs << ',' << r.reduced_epochs << ','
            << r.full_epochs << ',' << fmt(r.final_reduced_loss) << ','
            << fmt(r.final_total_full_loss) << ',' << fmt(r.mean_u) << "\n";
    if (!out) throw IoError("write failed for " + path.string());
}

void write_loss_curves_svg(const TrainLog& log, const std::filesystem::path& path) {
    ChartSeries reduced{"reduced", {}};
    ChartSeries full{"full total", {}};
    for (const EpochRecord& r : log.epochs) {
        if (r.reduced_loss) reduced.points.emplace_back(r.epoch, *r.reduced_loss);
        if (r.total_full_loss) full.points.emplace_back(r.epoch, *r.total_full_loss);
    }
    write_line_chart_svg(path, "Training losses", "epoch", "loss", {reduced, full});
}

}  // namespace trapan
