#pragma once

#include <array>
#include <vector>

#include "trapan/raster.hpp"

namespace trapan {

/// One crop window on the MS grid, plus whether the contents are
/// horizontally flipped after extraction.
struct CropSpec {
    std::size_t top = 0;
    std::size_t left = 0;
    std::size_t height = 0;
    std::size_t width = 0;
    bool flipped = false;
};

/// A crop applied consistently across the resolution hierarchy.
struct CropTriple {
    CropSpec spec;      // on the MS grid; divide by r for the reduced grid
    RasterImage ms;     // ch x cw x c
    RasterImage lrms;   // ch/r x cw/r x c
    RasterImage lrpan;  // ch x cw x 1 (lrpan shares the MS grid)
};

/// Extracts `spec` from `img`, flipping horizontally when requested.
RasterImage apply_crop(const RasterImage& img, const CropSpec& spec);

/// Five fixed crops (corners plus center) and their horizontal flips,
/// aligned across ms, lrms and lrpan. Crop dims are crop_frac of the MS
/// dims rounded down to a multiple of r; the center origin is snapped
/// down to a multiple of r so the reduced grid stays aligned. Output
/// order: TL, TR, BL, BR, center, then the same five flipped.
std::vector<CropTriple> aligned_ten_crop(const RasterImage& ms, const RasterImage& lrms,
                                         const RasterImage& lrpan, int ratio,
                                         double crop_frac = 0.5);

}  // namespace trapan
