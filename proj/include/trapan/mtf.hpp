#pragma once

#include <span>
#include <vector>

#include "trapan/raster.hpp"
#include "trapan/rng.hpp"

namespace trapan {

/// Gaussian low-pass kernel matched to a sensor MTF: its frequency
/// response at the Nyquist frequency of the downsampled grid equals the
/// sensor's published gain there.
struct MtfKernel {
    std::vector<double> taps;  // size x size, sums to 1
    int size = 0;              // odd
    double sigma = 0.0;        // std in pixels
    double nyquist_gain = 0.0;
    int ratio = 1;

    double tap(int ky, int kx) const { return taps[ky * size + kx]; }
};

struct DegradeConfig {
    double noise_std = 0.0;     // additive zero-mean Gaussian residual
    int decimation_offset = 0;  // sample phase in [0, ratio)
};

/// Builds the kernel with sigma = sqrt(-ln(gain) / (2 pi^2 f_N^2)),
/// f_N = 1/(2 ratio). Taps are renormalized to unit sum. size must be odd;
/// size >= 4*ratio+1 keeps the response at Nyquist within 1e-3 of the gain
/// for sensor-like gains. Throws DomainError on gain outside (0,1] or even
/// size.
MtfKernel build_mtf_kernel(double nyquist_gain, int ratio, int size);

/// Frequency response of the kernel at horizontal frequency f (cycles per
/// pixel). Real-valued because the kernel is symmetric.
double kernel_response(const MtfKernel& kernel, double f);

/// Per-band symmetric-padded convolution followed by decimation at stride
/// `ratio` (sample phase cfg.decimation_offset) and optional additive
/// Gaussian noise. Image dims must be divisible by the ratio.
RasterImage mtf_downsample(const RasterImage& img, std::span<const MtfKernel> kernels,
                           int ratio, const DegradeConfig& cfg = {},
                           Rng* rng = nullptr);

/// Single-kernel convenience: the same kernel for every band.
RasterImage mtf_downsample(const RasterImage& img, const MtfKernel& kernel, int ratio,
                           const DegradeConfig& cfg = {}, Rng* rng = nullptr);

/// Adjoint of the noiseless mtf_downsample, used to backpropagate through
/// the fixed degradation operator: scatters each low-res gradient sample
/// through the kernel taps and folds the mirrored border contributions
/// back in. `grad_low` has the downsampled geometry, the result has
/// (high_h, high_w) geometry.
RasterImage mtf_downsample_adjoint(const RasterImage& grad_low,
                                   std::span<const MtfKernel> kernels, int ratio,
                                   std::size_t high_h, std::size_t high_w,
                                   const DegradeConfig& cfg = {});

/// Reduced-resolution observation pair: applies the per-band kernels to
/// the MS image and the PAN kernel to the PAN image.
struct WaldPair {
    RasterImage lrms;   // h/r x w/r x c
    RasterImage lrpan;  // H/r x W/r x 1
};

WaldPair wald_pair(const RasterImage& ms, const RasterImage& pan, int ratio,
                   std::span<const MtfKernel> ms_kernels, const MtfKernel& pan_kernel,
                   const DegradeConfig& cfg = {}, Rng* rng = nullptr);

/// Kernels for every band of a pair from its configured gains.
std::vector<MtfKernel> build_ms_kernels(std::span<const double> gains, int ratio,
                                        int size);

}  // namespace trapan
