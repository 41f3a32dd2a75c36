#include "trapan/tencrop.hpp"

#include <string>

#include "trapan/errors.hpp"

namespace trapan {

RasterImage apply_crop(const RasterImage& img, const CropSpec& spec) {
    if (spec.top + spec.height > img.height || spec.left + spec.width > img.width)
        throw ShapeError("crop outside image bounds");
    RasterImage out(spec.height, spec.width, img.bands);
    for (std::size_t b = 0; b < img.bands; ++b)
        for (std::size_t y = 0; y < spec.height; ++y)
            for (std::size_t x = 0; x < spec.width; ++x) {
                const std::size_t sx = spec.flipped ? spec.width - 1 - x : x;
                out.at(b, y, x) = img.at(b, spec.top + y, spec.left + sx);
            }
    return out;
}

std::vector<CropTriple> aligned_ten_crop(const RasterImage& ms, const RasterImage& lrms,
                                         const RasterImage& lrpan, int ratio,
                                         double crop_frac) {
    if (ratio < 1) throw DomainError("ratio must be >= 1");
    if (!(crop_frac > 0.0 && crop_frac <= 1.0))
        throw DomainError("crop fraction outside (0,1]");
    const auto r = static_cast<std::size_t>(ratio);
    if (lrms.height * r != ms.height || lrms.width * r != ms.width)
        throw ShapeError("lrms geometry inconsistent with ms at this ratio");
    if (lrpan.height != ms.height || lrpan.width != ms.width || lrpan.bands != 1)
        throw ShapeError("lrpan must share the MS grid with a single band");

    const std::size_t h = ms.height;
    const std::size_t w = ms.width;
    auto to_multiple = [r](std::size_t v) { return (v / r) * r; };
    const std::size_t ch = to_multiple(static_cast<std::size_t>(crop_frac * static_cast<double>(h)));
    const std::size_t cw = to_multiple(static_cast<std::size_t>(crop_frac * static_cast<double>(w)));
    if (ch < r || cw < r) throw ShapeError("crop smaller than one ratio cell");
    if (ch > h || cw > w) throw ShapeError("crop larger than image");
    if (h % r != 0 || w % r != 0)
        throw ShapeError("MS dims must be divisible by the ratio");

    // Corner origins are multiples of r automatically; the center origin
    // is snapped down so the reduced-grid crop stays aligned.
    const std::size_t center_top = to_multiple((h - ch) / 2);
    const std::size_t center_left = to_multiple((w - cw) / 2);
    const std::array<std::pair<std::size_t, std::size_t>, 5> origins = {{
        {0, 0},
        {0, w - cw},
        {h - ch, 0},
        {h - ch, w - cw},
        {center_top, center_left},
    }};

    std::vector<CropTriple> out;
    out.reserve(10);
    for (int pass = 0; pass < 2; ++pass) {
        const bool flipped = pass == 1;
        for (const auto& [top, left] : origins) {
            CropTriple t;
            t.spec = CropSpec{top, left, ch, cw, flipped};
            t.ms = apply_crop(ms, t.spec);
            t.lrms = apply_crop(lrms, CropSpec{top / r, left / r, ch / r, cw / r, flipped});
            t.lrpan = apply_crop(lrpan, t.spec);
            out.push_back(std::move(t));
        }
    }
    return out;
}

}  // namespace trapan
