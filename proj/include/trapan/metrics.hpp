#pragma once

#include <optional>
#include <span>

#include "trapan/mtf.hpp"
#include "trapan/raster.hpp"

namespace trapan {

/// No-reference scores plus the optional reference trio when ground truth
/// is available.
struct QualityReport {
    double d_lambda = 0.0;
    double d_s = 0.0;
    double hqnr = 0.0;
    std::optional<double> sam_degrees;
    std::optional<double> ergas;
    std::optional<double> psnr_db;
};

/// Universal image-quality index between two single-band images, averaged
/// over non-overlapping window x window tiles (partial edge tiles are
/// dropped). Tiles with a zero denominator are skipped; the result lies
/// in [-1, 1].
double q_index(const RasterImage& a, const RasterImage& b, std::size_t window);

/// Spectral-distortion index: one minus the band-averaged Q between the
/// MTF-degraded fused image and the MS observation, evaluated on the
/// reduced grid with window/ratio tiles. Clamped to [0,1].
double d_lambda(const RasterImage& fused, const RasterImage& ms,
                std::span<const MtfKernel> ms_kernels, int ratio, std::size_t window);

/// Spatial-distortion index: band-mean |Q(fused_b, pan) - Q(ms_b, lrpan)|
/// with the reduced-scale Q evaluated at window/ratio. Clamped to [0,1].
double d_s(const RasterImage& fused, const RasterImage& ms, const RasterImage& pan,
           const RasterImage& lrpan, int ratio, std::size_t window);

/// Hybrid quality: (1 - d_lambda) * (1 - d_s). Inputs must lie in [0,1].
double hqnr(double d_lambda_value, double d_s_value);

struct ReducedMetrics {
    double sam_degrees = 0.0;
    double ergas = 0.0;
    double psnr_db = 0.0;
};

/// Reference metrics against ground truth: mean spectral angle in degrees
/// (zero-norm pixels skipped), ERGAS with the 100/ratio convention, and
/// PSNR on the [0,1] range capped at 99 dB.
ReducedMetrics reduced_metrics(const RasterImage& fused, const RasterImage& truth,
                               int ratio);

/// Convenience wrapper producing the full report for a fused image. The
/// reduced PAN is derived from the PAN image with the pair's PAN kernel.
QualityReport evaluate(const RasterImage& fused, const ImagePair& pair,
                       std::span<const MtfKernel> ms_kernels,
                       const MtfKernel& pan_kernel, std::size_t window,
                       const RasterImage* truth = nullptr);

}  // namespace trapan
