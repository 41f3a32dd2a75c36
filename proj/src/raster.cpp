#include "trapan/raster.hpp"

#include <cmath>
#include <string>

#include "mirror.hpp"
#include "trapan/errors.hpp"

namespace trapan {

using detail::mirror_index;

namespace {

// Catmull-Rom kernel (a = -0.5).
double cubic_weight(double x) {
    constexpr double a = -0.5;
    x = std::fabs(x);
    if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
    if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
    return 0.0;
}

}  // namespace

RasterImage RasterImage::extract_band(std::size_t b) const {
    RasterImage out(height, width, 1);
    auto src = band(b);
    std::copy(src.begin(), src.end(), out.data.begin());
    return out;
}

void RasterImage::validate() const {
    if (height == 0 || width == 0 || bands == 0)
        throw ShapeError("empty raster");
    if (data.size() != height * width * bands)
        throw ShapeError("raster data length " + std::to_string(data.size()) +
                         " does not match dims " + std::to_string(height) + "x" +
                         std::to_string(width) + "x" + std::to_string(bands));
    for (double v : data)
        if (!std::isfinite(v)) throw NumericError("raster contains non-finite sample");
}

void ImagePair::validate() const {
    pan.validate();
    ms.validate();
    if (pan.bands != 1) throw ShapeError("PAN image must have exactly one band");
    if (ratio < 1) throw DomainError("resolution ratio must be >= 1");
    const auto r = static_cast<std::size_t>(ratio);
    if (pan.height != r * ms.height || pan.width != r * ms.width)
        throw ShapeError("PAN dims must be ratio times MS dims");
    if (ms_nyquist_gains.size() != ms.bands)
        throw ShapeError("need one Nyquist gain per MS band");
    for (double g : ms_nyquist_gains)
        if (!(g > 0.0 && g <= 1.0)) throw DomainError("MS Nyquist gain outside (0,1]");
    if (!(pan_nyquist_gain > 0.0 && pan_nyquist_gain <= 1.0))
        throw DomainError("PAN Nyquist gain outside (0,1]");
}

RasterImage normalize(std::span<const std::uint32_t> raw, std::size_t height,
                      std::size_t width, std::size_t bands, int bit_depth) {
    if (bit_depth < 1 || bit_depth > 31) throw DomainError("bit depth outside [1,31]");
    if (raw.size() != height * width * bands)
        throw ShapeError("raw sample count does not match dims");
    const std::uint32_t max_count = (1u << bit_depth) - 1u;
    RasterImage out(height, width, bands);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw[i] > max_count)
            throw RangeError("sample " + std::to_string(raw[i]) + " exceeds " +
                             std::to_string(max_count));
        out.data[i] = static_cast<double>(raw[i]) / static_cast<double>(max_count);
    }
    return out;
}

RasterImage upsample(const RasterImage& img, int factor) {
    if (factor < 1) throw DomainError("upsample factor must be >= 1");
    img.validate();
    if (factor == 1) return img;

    const std::size_t r = static_cast<std::size_t>(factor);
    const std::size_t oh = img.height * r;
    const std::size_t ow = img.width * r;

    // Output x maps to source x/r; the fractional part only depends on
    // x mod r, so the 4-tap weight vectors are shared per phase.
    std::vector<double> weights(r * 4);
    for (std::size_t phase = 0; phase < r; ++phase) {
        const double t = static_cast<double>(phase) / static_cast<double>(r);
        weights[phase * 4 + 0] = cubic_weight(t + 1.0);
        weights[phase * 4 + 1] = cubic_weight(t);
        weights[phase * 4 + 2] = cubic_weight(1.0 - t);
        weights[phase * 4 + 3] = cubic_weight(2.0 - t);
    }

    RasterImage out(oh, ow, img.bands);
    const long h = static_cast<long>(img.height);
    const long w = static_cast<long>(img.width);

    // Separable: rows first into a (h x ow) scratch plane, then columns.
    std::vector<double> row_pass(img.height * ow);
    for (std::size_t b = 0; b < img.bands; ++b) {
        auto src = img.band(b);
        for (std::size_t y = 0; y < img.height; ++y) {
            const double* srow = src.data() + y * img.width;
            double* drow = row_pass.data() + y * ow;
            for (std::size_t x = 0; x < ow; ++x) {
                const long base = static_cast<long>(x / r);
                const double* wt = &weights[(x % r) * 4];
                double acc = 0.0;
                for (int k = -1; k <= 2; ++k)
                    acc += wt[k + 1] * srow[mirror_index(base + k, w)];
                drow[x] = acc;
            }
        }
        auto dst = out.band(b);
        for (std::size_t y = 0; y < oh; ++y) {
            const long base = static_cast<long>(y / r);
            const double* wt = &weights[(y % r) * 4];
            double* drow = dst.data() + y * ow;
            const double* s0 = row_pass.data() + mirror_index(base - 1, h) * ow;
            const double* s1 = row_pass.data() + mirror_index(base, h) * ow;
            const double* s2 = row_pass.data() + mirror_index(base + 1, h) * ow;
            const double* s3 = row_pass.data() + mirror_index(base + 2, h) * ow;
            for (std::size_t x = 0; x < ow; ++x)
                drow[x] = wt[0] * s0[x] + wt[1] * s1[x] + wt[2] * s2[x] + wt[3] * s3[x];
        }
    }
    return out;
}

}  // namespace trapan
