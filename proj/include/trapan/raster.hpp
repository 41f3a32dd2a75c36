#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace trapan {

/// Planar floating-point raster. Samples are stored band-major, row-major
/// within each band, nominal range [0,1]. Compute precision is double
/// throughout; the on-disk container narrows to f32 (see pfs.hpp).
///
/// Values are immutable by convention once an image leaves its producer;
/// all operations below return new images, so sharing across threads is
/// safe.
struct RasterImage {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t bands = 1;
    std::vector<double> data;  // height * width * bands samples

    RasterImage() = default;
    RasterImage(std::size_t h, std::size_t w, std::size_t c, double fill = 0.0)
        : height(h), width(w), bands(c), data(h * w * c, fill) {}

    std::size_t pixels() const { return height * width; }
    std::size_t size() const { return data.size(); }

    double& at(std::size_t band, std::size_t y, std::size_t x) {
        return data[(band * height + y) * width + x];
    }
    double at(std::size_t band, std::size_t y, std::size_t x) const {
        return data[(band * height + y) * width + x];
    }

    std::span<double> band(std::size_t b) {
        return {data.data() + b * pixels(), pixels()};
    }
    std::span<const double> band(std::size_t b) const {
        return {data.data() + b * pixels(), pixels()};
    }

    /// Single-band view copied out as its own image.
    RasterImage extract_band(std::size_t b) const;

    bool same_shape(const RasterImage& other) const {
        return height == other.height && width == other.width && bands == other.bands;
    }

    /// Throws ShapeError / NumericError when the invariants (size
    /// consistency, finite samples) do not hold.
    void validate() const;
};

/// An MS/PAN acquisition. PAN is single-band at r times the MS resolution.
struct ImagePair {
    RasterImage pan;                       // H x W x 1
    RasterImage ms;                        // h x w x c, H = r*h
    int ratio = 4;                         // resolution ratio r >= 1
    std::vector<double> ms_nyquist_gains;  // per MS band, in (0,1]
    double pan_nyquist_gain = 0.15;

    /// Throws ShapeError/DomainError on inconsistent geometry or gains.
    void validate() const;
};

/// Scales integer sensor counts in [0, 2^bit_depth - 1] to [0,1].
/// Out-of-range samples raise RangeError, bad depth raises DomainError.
RasterImage normalize(std::span<const std::uint32_t> raw, std::size_t height,
                      std::size_t width, std::size_t bands, int bit_depth);

/// Band-independent bicubic (Catmull-Rom, a = -0.5) upsampling by an
/// integer factor with symmetric boundary handling. Output samples at
/// positions r*i coincide with the source nodes, so r = 1 is the identity.
RasterImage upsample(const RasterImage& img, int factor);

}  // namespace trapan
