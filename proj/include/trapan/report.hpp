#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "trapan/rao.hpp"

namespace trapan {

/// One polyline for the SVG chart writer.
struct ChartSeries {
    std::string name;
    std::vector<std::pair<double, double>> points;
};

/// Minimal dependency-free line chart. Skips nothing: callers pass only
/// the points they want drawn.
void write_line_chart_svg(const std::filesystem::path& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<ChartSeries>& series);

struct TrainLogSummary {
    std::string label;
    int epochs = 0;
    int reduced_epochs = 0;
    int full_epochs = 0;
    double final_reduced_loss = 0.0;  // last reduced epoch, 0 if none ran
    double final_total_full_loss = 0.0;
    double mean_u = 0.0;
};

TrainLogSummary summarize_trainlog(const std::string& label, const TrainLog& log);

void write_summary_csv(const std::filesystem::path& path,
                       const std::vector<TrainLogSummary>& rows);

/// Loss curves (reduced + weighted full total) for one training run.
void write_loss_curves_svg(const TrainLog& log, const std::filesystem::path& path);

}  // namespace trapan
