#include "trapan/mtf.hpp"

#include <cmath>
#include <string>

#include "mirror.hpp"
#include "trapan/errors.hpp"

namespace trapan {

using detail::mirror_map;

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

MtfKernel build_mtf_kernel(double nyquist_gain, int ratio, int size) {
    if (!(nyquist_gain > 0.0 && nyquist_gain <= 1.0))
        throw DomainError("Nyquist gain must lie in (0,1]");
    if (ratio < 1) throw DomainError("ratio must be >= 1");
    if (size < 1 || size % 2 == 0) throw DomainError("kernel size must be odd");

    MtfKernel k;
    k.size = size;
    k.nyquist_gain = nyquist_gain;
    k.ratio = ratio;
    k.taps.assign(static_cast<std::size_t>(size) * size, 0.0);

    const double f_nyquist = 1.0 / (2.0 * ratio);
    const double sigma_sq = -std::log(nyquist_gain) / (2.0 * kPi * kPi * f_nyquist * f_nyquist);
    k.sigma = std::sqrt(sigma_sq);

    const int half = size / 2;
    if (k.sigma == 0.0) {
        k.taps[half * size + half] = 1.0;  // gain 1: unit impulse
        return k;
    }

    double sum = 0.0;
    for (int y = -half; y <= half; ++y) {
        for (int x = -half; x <= half; ++x) {
            const double v = std::exp(-(static_cast<double>(y) * y + static_cast<double>(x) * x) /
                                      (2.0 * sigma_sq));
            k.taps[(y + half) * size + (x + half)] = v;
            sum += v;
        }
    }
    for (double& t : k.taps) t /= sum;
    return k;
}

double kernel_response(const MtfKernel& kernel, double f) {
    const int half = kernel.size / 2;
    double acc = 0.0;
    for (int y = -half; y <= half; ++y)
        for (int x = -half; x <= half; ++x)
            acc += kernel.tap(y + half, x + half) * std::cos(2.0 * kPi * f * x);
    return acc;
}

RasterImage mtf_downsample(const RasterImage& img, std::span<const MtfKernel> kernels,
                           int ratio, const DegradeConfig& cfg, Rng* rng) {
    img.validate();
    if (ratio < 1) throw DomainError("ratio must be >= 1");
    if (kernels.size() != img.bands)
        throw ShapeError("need one kernel per band: " + std::to_string(kernels.size()) +
                         " kernels for " + std::to_string(img.bands) + " bands");
    const auto r = static_cast<std::size_t>(ratio);
    if (img.height % r != 0 || img.width % r != 0)
        throw ShapeError("image dims must be divisible by the ratio");
    if (cfg.decimation_offset < 0 || cfg.decimation_offset >= ratio)
        throw DomainError("decimation offset outside [0, ratio)");
    if (cfg.noise_std < 0.0) throw DomainError("noise std must be >= 0");
    if (cfg.noise_std > 0.0 && rng == nullptr)
        throw DomainError("noise requested without a generator");

    const std::size_t oh = img.height / r;
    const std::size_t ow = img.width / r;
    RasterImage out(oh, ow, img.bands);

    for (std::size_t b = 0; b < img.bands; ++b) {
        const MtfKernel& k = kernels[b];
        const int pad = k.size / 2;
        const auto ymap = mirror_map(img.height, pad);
        const auto xmap = mirror_map(img.width, pad);
        const std::size_t pw = img.width + 2 * static_cast<std::size_t>(pad);

        // Padded copy keeps the tap loops branch-free.
        std::vector<double> padded(ymap.size() * pw);
        auto src = img.band(b);
        for (std::size_t py = 0; py < ymap.size(); ++py) {
            const double* srow = src.data() + ymap[py] * img.width;
            double* drow = padded.data() + py * pw;
            for (std::size_t px = 0; px < pw; ++px) drow[px] = srow[xmap[px]];
        }

        auto dst = out.band(b);
        for (std::size_t oy = 0; oy < oh; ++oy) {
            const std::size_t sy = oy * r + static_cast<std::size_t>(cfg.decimation_offset);
            for (std::size_t ox = 0; ox < ow; ++ox) {
                const std::size_t sx = ox * r + static_cast<std::size_t>(cfg.decimation_offset);
                double acc = 0.0;
                const double* taps = k.taps.data();
                for (int ky = 0; ky < k.size; ++ky) {
                    const double* prow = padded.data() + (sy + ky) * pw + sx;
                    for (int kx = 0; kx < k.size; ++kx) acc += taps[kx] * prow[kx];
                    taps += k.size;
                }
                dst[oy * ow + ox] = acc;
            }
        }
    }

    if (cfg.noise_std > 0.0)
        for (double& v : out.data) v += rng->normal(0.0, cfg.noise_std);
    return out;
}

RasterImage mtf_downsample(const RasterImage& img, const MtfKernel& kernel, int ratio,
                           const DegradeConfig& cfg, Rng* rng) {
    std::vector<MtfKernel> ks(img.bands, kernel);
    return mtf_downsample(img, ks, ratio, cfg, rng);
}

RasterImage mtf_downsample_adjoint(const RasterImage& grad_low,
                                   std::span<const MtfKernel> kernels, int ratio,
                                   std::size_t high_h, std::size_t high_w,
                                   const DegradeConfig& cfg) {
    if (kernels.size() != grad_low.bands)
        throw ShapeError("need one kernel per band");
    const auto r = static_cast<std::size_t>(ratio);
    if (grad_low.height * r != high_h || grad_low.width * r != high_w)
        throw ShapeError("low-res gradient geometry does not match the high-res dims");

    RasterImage out(high_h, high_w, grad_low.bands);
    for (std::size_t b = 0; b < grad_low.bands; ++b) {
        const MtfKernel& k = kernels[b];
        const int pad = k.size / 2;
        const auto ymap = mirror_map(high_h, pad);
        const auto xmap = mirror_map(high_w, pad);
        const std::size_t pw = high_w + 2 * static_cast<std::size_t>(pad);

        std::vector<double> padded(ymap.size() * pw, 0.0);
        auto gsrc = grad_low.band(b);
        for (std::size_t oy = 0; oy < grad_low.height; ++oy) {
            const std::size_t sy = oy * r + static_cast<std::size_t>(cfg.decimation_offset);
            for (std::size_t ox = 0; ox < grad_low.width; ++ox) {
                const std::size_t sx = ox * r + static_cast<std::size_t>(cfg.decimation_offset);
                const double g = gsrc[oy * grad_low.width + ox];
                const double* taps = k.taps.data();
                for (int ky = 0; ky < k.size; ++ky) {
                    double* prow = padded.data() + (sy + ky) * pw + sx;
                    for (int kx = 0; kx < k.size; ++kx) prow[kx] += taps[kx] * g;
                    taps += k.size;
                }
            }
        }

        // Fold mirrored border mass back onto the source samples.
        auto dst = out.band(b);
        for (std::size_t py = 0; py < ymap.size(); ++py) {
            const double* prow = padded.data() + py * pw;
            double* drow = dst.data() + ymap[py] * high_w;
            for (std::size_t px = 0; px < pw; ++px) drow[xmap[px]] += prow[px];
        }
    }
    return out;
}

WaldPair wald_pair(const RasterImage& ms, const RasterImage& pan, int ratio,
                   std::span<const MtfKernel> ms_kernels, const MtfKernel& pan_kernel,
                   const DegradeConfig& cfg, Rng* rng) {
    WaldPair out;
    out.lrms = mtf_downsample(ms, ms_kernels, ratio, cfg, rng);
    out.lrpan = mtf_downsample(pan, pan_kernel, ratio, cfg, rng);
    return out;
}

std::vector<MtfKernel> build_ms_kernels(std::span<const double> gains, int ratio,
                                        int size) {
    std::vector<MtfKernel> ks;
    ks.reserve(gains.size());
    for (double g : gains) ks.push_back(build_mtf_kernel(g, ratio, size));
    return ks;
}

}  // namespace trapan
