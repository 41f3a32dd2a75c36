#include "trapan/scene.hpp"

#include <algorithm>
#include <cmath>

#include "trapan/errors.hpp"
#include "trapan/rng.hpp"

namespace trapan {

namespace {

double clamp01(double v) { return std::max(0.0, std::min(1.0, v)); }

// Bilinear interpolation of a coarse value grid to (h, w). The coarse grid
// covers the image corner-to-corner, which keeps the field smooth at any
// output size.
std::vector<double> smooth_field(Rng& rng, std::size_t h, std::size_t w,
                                 std::size_t cell) {
    const std::size_t gh = (h + cell - 1) / cell + 1;
    const std::size_t gw = (w + cell - 1) / cell + 1;
    std::vector<double> grid(gh * gw);
    for (double& g : grid) g = rng.u01();

    std::vector<double> field(h * w);
    const double sy = static_cast<double>(gh - 1) / std::max<std::size_t>(1, h - 1);
    const double sx = static_cast<double>(gw - 1) / std::max<std::size_t>(1, w - 1);
    for (std::size_t y = 0; y < h; ++y) {
        const double fy = std::min(static_cast<double>(gh - 1), y * sy);
        const std::size_t y0 = static_cast<std::size_t>(fy);
        const std::size_t y1 = std::min(gh - 1, y0 + 1);
        const double ty = fy - static_cast<double>(y0);
        for (std::size_t x = 0; x < w; ++x) {
            const double fx = std::min(static_cast<double>(gw - 1), x * sx);
            const std::size_t x0 = static_cast<std::size_t>(fx);
            const std::size_t x1 = std::min(gw - 1, x0 + 1);
            const double tx = fx - static_cast<double>(x0);
            const double top = grid[y0 * gw + x0] * (1.0 - tx) + grid[y0 * gw + x1] * tx;
            const double bot = grid[y1 * gw + x0] * (1.0 - tx) + grid[y1 * gw + x1] * tx;
            field[y * w + x] = top * (1.0 - ty) + bot * ty;
        }
    }
    return field;
}

}  // namespace

SyntheticScene synth_scene(std::uint64_t seed, std::size_t height, std::size_t width,
                           std::size_t bands, std::vector<double> mixing_weights,
                           const SceneConfig& cfg) {
    if (height == 0 || width == 0 || bands == 0)
        throw DomainError("scene dims must be positive");
    if (cfg.ratio < 1) throw DomainError("ratio must be >= 1");
    const auto r = static_cast<std::size_t>(cfg.ratio);
    if (height % r != 0 || width % r != 0)
        throw ShapeError("scene dims must be divisible by the ratio");

    if (mixing_weights.empty())
        mixing_weights.assign(bands, 1.0 / static_cast<double>(bands));
    if (mixing_weights.size() != bands)
        throw DomainError("need one mixing weight per band");
    double wsum = 0.0;
    for (double w : mixing_weights) {
        if (w < 0.0) throw DomainError("mixing weights must be nonnegative");
        wsum += w;
    }
    if (std::fabs(wsum - 1.0) > 1e-6)
        throw DomainError("mixing weights must sum to 1 within 1e-6");

    Rng rng(seed);
    SyntheticScene scene;
    scene.ratio = cfg.ratio;
    scene.mixing_weights = mixing_weights;
    if (cfg.ms_nyquist_gains.empty()) {
        scene.ms_nyquist_gains.assign(bands, cfg.ms_nyquist_gain);
    } else {
        if (cfg.ms_nyquist_gains.size() != bands)
            throw DomainError("need one Nyquist gain per band");
        scene.ms_nyquist_gains = cfg.ms_nyquist_gains;
    }
    scene.pan_nyquist_gain = cfg.pan_nyquist_gain;
    scene.hrms = RasterImage(height, width, bands);

    // Background: a shared smooth field plus a per-band one, so bands are
    // correlated without being copies of each other.
    const std::size_t cell = std::max<std::size_t>(4, std::min(height, width) / 8);
    const auto shared = smooth_field(rng, height, width, cell);
    for (std::size_t b = 0; b < bands; ++b) {
        const auto own = smooth_field(rng, height, width, cell);
        const double gain = rng.uniform(0.7, 1.0);
        const double lift = rng.uniform(0.0, 0.15);
        auto plane = scene.hrms.band(b);
        for (std::size_t i = 0; i < plane.size(); ++i)
            plane[i] = clamp01(lift + gain * (0.65 * shared[i] + 0.35 * own[i]));
    }

    // Crisp structures: painted rectangles and disks whose per-band
    // intensities share a base level.
    const std::size_t n_shapes = 6 + rng.uniform_int(7);
    std::vector<double> shade(bands);
    for (std::size_t s = 0; s < n_shapes; ++s) {
        const bool is_disk = rng.u01() < 0.5;
        const double base = rng.uniform(0.15, 0.85);
        for (std::size_t b = 0; b < bands; ++b)
            shade[b] = clamp01(base + rng.uniform(-0.2, 0.2));

        const std::size_t min_dim = std::min(height, width);
        const std::size_t extent = min_dim / 8 + rng.uniform_int(std::max<std::size_t>(1, min_dim / 4));
        const std::size_t cy = rng.uniform_int(height);
        const std::size_t cx = rng.uniform_int(width);

        const std::size_t y0 = cy > extent ? cy - extent : 0;
        const std::size_t y1 = std::min(height, cy + extent + 1);
        const std::size_t x0 = cx > extent ? cx - extent : 0;
        const std::size_t x1 = std::min(width, cx + extent + 1);
        const double rad_sq = static_cast<double>(extent) * static_cast<double>(extent);
        for (std::size_t y = y0; y < y1; ++y) {
            for (std::size_t x = x0; x < x1; ++x) {
                if (is_disk) {
                    const double dy = static_cast<double>(y) - static_cast<double>(cy);
                    const double dx = static_cast<double>(x) - static_cast<double>(cx);
                    if (dy * dy + dx * dx > rad_sq) continue;
                }
                for (std::size_t b = 0; b < bands; ++b) scene.hrms.at(b, y, x) = shade[b];
            }
        }
    }

    // PAN is the exact linear band mix of the clipped ground truth.
    scene.pan = RasterImage(height, width, 1);
    for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x) {
            double acc = 0.0;
            for (std::size_t b = 0; b < bands; ++b)
                acc += mixing_weights[b] * scene.hrms.at(b, y, x);
            scene.pan.at(0, y, x) = acc;
        }

    const auto kernels =
        build_ms_kernels(scene.ms_nyquist_gains, cfg.ratio, cfg.kernel_size);
    scene.ms = mtf_downsample(scene.hrms, kernels, cfg.ratio);
    return scene;
}

}  // namespace trapan
