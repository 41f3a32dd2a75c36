#include "trapan/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "trapan/errors.hpp"

namespace trapan {

namespace {

constexpr double kPi = 3.14159265358979323846;

double clamp01(double v) { return std::max(0.0, std::min(1.0, v)); }

}  // namespace

double q_index(const RasterImage& a, const RasterImage& b, std::size_t window) {
    if (a.height != b.height || a.width != b.width)
        throw ShapeError("q_index operands differ in shape");
    if (a.bands != 1 || b.bands != 1) throw ShapeError("q_index expects single-band images");
    if (window < 1 || window > a.height || window > a.width)
        throw ShapeError("q_index window larger than image");

    const std::size_t tiles_y = a.height / window;
    const std::size_t tiles_x = a.width / window;
    const double n = static_cast<double>(window * window);

    double acc = 0.0;
    std::size_t used = 0;
    for (std::size_t ty = 0; ty < tiles_y; ++ty) {
        for (std::size_t tx = 0; tx < tiles_x; ++tx) {
            double sum_a = 0.0, sum_b = 0.0, sum_aa = 0.0, sum_bb = 0.0, sum_ab = 0.0;
            bool identical = true;
            for (std::size_t y = ty * window; y < (ty + 1) * window; ++y) {
                const double* ra = a.data.data() + y * a.width + tx * window;
                const double* rb = b.data.data() + y * b.width + tx * window;
                for (std::size_t x = 0; x < window; ++x) {
                    const double va = ra[x];
                    const double vb = rb[x];
                    identical = identical && va == vb;
                    sum_a += va;
                    sum_b += vb;
                    sum_aa += va * va;
                    sum_bb += vb * vb;
                    sum_ab += va * vb;
                }
            }
            const double mean_a = sum_a / n;
            const double mean_b = sum_b / n;
            const double var_a = sum_aa / n - mean_a * mean_a;
            const double var_b = sum_bb / n - mean_b * mean_b;
            const double cov = sum_ab / n - mean_a * mean_b;
            const double denom =
                (var_a + var_b) * (mean_a * mean_a + mean_b * mean_b);
            if (denom == 0.0) continue;  // degenerate tile: skip, not zero
            if (identical) {
                // q is 1 by definition on equal tiles; evaluating the
                // quotient would reintroduce rounding noise at the fixed
                // point
                acc += 1.0;
            } else {
                acc += 4.0 * cov * mean_a * mean_b / denom;
            }
            ++used;
        }
    }
    if (used == 0) return 0.0;
    const double q = acc / static_cast<double>(used);
    return std::max(-1.0, std::min(1.0, q));
}

double d_lambda(const RasterImage& fused, const RasterImage& ms,
                std::span<const MtfKernel> ms_kernels, int ratio, std::size_t window) {
    if (fused.bands != ms.bands) throw ShapeError("band count mismatch in d_lambda");
    const RasterImage degraded = mtf_downsample(fused, ms_kernels, ratio);
    if (!degraded.same_shape(ms))
        throw ShapeError("degraded fused image does not match the MS grid");

    const std::size_t reduced_window = std::max<std::size_t>(1, window / static_cast<std::size_t>(ratio));
    double q_sum = 0.0;
    for (std::size_t b = 0; b < ms.bands; ++b)
        q_sum += q_index(degraded.extract_band(b), ms.extract_band(b), reduced_window);
    return clamp01(1.0 - q_sum / static_cast<double>(ms.bands));
}

double d_s(const RasterImage& fused, const RasterImage& ms, const RasterImage& pan,
           const RasterImage& lrpan, int ratio, std::size_t window) {
    if (fused.bands != ms.bands) throw ShapeError("band count mismatch in d_s");
    if (pan.bands != 1 || lrpan.bands != 1) throw ShapeError("PAN inputs must be single-band");
    if (fused.height != pan.height || fused.width != pan.width)
        throw ShapeError("fused image must share the PAN grid");
    if (ms.height != lrpan.height || ms.width != lrpan.width)
        throw ShapeError("MS image must share the reduced PAN grid");

    const std::size_t reduced_window = std::max<std::size_t>(1, window / static_cast<std::size_t>(ratio));
    double acc = 0.0;
    for (std::size_t b = 0; b < ms.bands; ++b) {
        const double q_full = q_index(fused.extract_band(b), pan, window);
        const double q_reduced = q_index(ms.extract_band(b), lrpan, reduced_window);
        acc += std::fabs(q_full - q_reduced);
    }
    return clamp01(acc / static_cast<double>(ms.bands));
}

double hqnr(double d_lambda_value, double d_s_value) {
    if (!(d_lambda_value >= 0.0 && d_lambda_value <= 1.0))
        throw DomainError("d_lambda outside [0,1]");
    if (!(d_s_value >= 0.0 && d_s_value <= 1.0)) throw DomainError("d_s outside [0,1]");
    return (1.0 - d_lambda_value) * (1.0 - d_s_value);
}

ReducedMetrics reduced_metrics(const RasterImage& fused, const RasterImage& truth,
                               int ratio) {
    if (!fused.same_shape(truth)) throw ShapeError("fused/truth shapes differ");
    if (ratio < 1) throw DomainError("ratio must be >= 1");

    ReducedMetrics out;
    const std::size_t n = fused.pixels();
    const std::size_t c = fused.bands;

    // SAM: mean per-pixel angle between spectra, zero-norm pixels skipped.
    double angle_sum = 0.0;
    std::size_t angle_count = 0;
    for (std::size_t p = 0; p < n; ++p) {
        double dot = 0.0, na = 0.0, nb = 0.0;
        bool identical = true;
        for (std::size_t b = 0; b < c; ++b) {
            const double va = fused.data[b * n + p];
            const double vb = truth.data[b * n + p];
            identical = identical && va == vb;
            dot += va * vb;
            na += va * va;
            nb += vb * vb;
        }
        if (na == 0.0 || nb == 0.0) continue;
        if (identical) {
            ++angle_count;  // equal spectra: the angle is 0 by definition
            continue;
        }
        const double cosv = std::max(-1.0, std::min(1.0, dot / std::sqrt(na * nb)));
        angle_sum += std::acos(cosv);
        ++angle_count;
    }
    out.sam_degrees = angle_count == 0 ? 0.0 : angle_sum / static_cast<double>(angle_count) * 180.0 / kPi;

    // ERGAS: bands with a zero reference mean carry no usable relative
    // error and are skipped.
    double ergas_acc = 0.0;
    std::size_t ergas_bands = 0;
    for (std::size_t b = 0; b < c; ++b) {
        double mean_t = 0.0;
        double mse_b = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            mean_t += truth.data[b * n + p];
            const double d = fused.data[b * n + p] - truth.data[b * n + p];
            mse_b += d * d;
        }
        mean_t /= static_cast<double>(n);
        mse_b /= static_cast<double>(n);
        if (std::fabs(mean_t) < 1e-12) continue;
        ergas_acc += mse_b / (mean_t * mean_t);
        ++ergas_bands;
    }
    out.ergas = ergas_bands == 0
                    ? 0.0
                    : 100.0 / static_cast<double>(ratio) *
                          std::sqrt(ergas_acc / static_cast<double>(ergas_bands));

    // PSNR on [0,1], reported value capped at 99 dB.
    double total_mse = 0.0;
    for (std::size_t i = 0; i < fused.size(); ++i) {
        const double d = fused.data[i] - truth.data[i];
        total_mse += d * d;
    }
    total_mse /= static_cast<double>(fused.size());
    out.psnr_db = total_mse == 0.0 ? 99.0 : std::min(99.0, -10.0 * std::log10(total_mse));
    return out;
}

QualityReport evaluate(const RasterImage& fused, const ImagePair& pair,
                       std::span<const MtfKernel> ms_kernels,
                       const MtfKernel& pan_kernel, std::size_t window,
                       const RasterImage* truth) {
    pair.validate();
    if (!fused.same_shape(RasterImage(pair.pan.height, pair.pan.width, pair.ms.bands)))
        throw ShapeError("fused image must be PAN-sized with MS bands");

    const RasterImage lrpan = mtf_downsample(pair.pan, pan_kernel, pair.ratio);
    QualityReport report;
    report.d_lambda = d_lambda(fused, pair.ms, ms_kernels, pair.ratio, window);
    report.d_s = d_s(fused, pair.ms, pair.pan, lrpan, pair.ratio, window);
    report.hqnr = hqnr(report.d_lambda, report.d_s);
    if (truth != nullptr) {
        const ReducedMetrics rm = reduced_metrics(fused, *truth, pair.ratio);
        report.sam_degrees = rm.sam_degrees;
        report.ergas = rm.ergas;
        report.psnr_db = rm.psnr_db;
    }
    return report;
}

}  // namespace trapan
