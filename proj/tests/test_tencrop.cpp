#include <doctest.h>

#include "test_util.hpp"
#include "trapan/errors.hpp"
#include "trapan/mtf.hpp"
#include "trapan/scene.hpp"
#include "trapan/tencrop.hpp"

using namespace trapan;

TEST_SUITE_BEGIN("tencrop");

namespace {

struct CropFixture {
    RasterImage ms;
    RasterImage lrms;
    RasterImage lrpan;
    std::vector<MtfKernel> kernels;
    MtfKernel pan_kernel;

    static CropFixture make(std::uint64_t seed, std::size_t h, std::size_t w,
                            std::size_t c, int r) {
        CropFixture f;
        Rng rng(seed);
        f.ms = test::random_image(rng, h, w, c);
        f.kernels = build_ms_kernels(std::vector<double>(c, 0.29), r, 4 * r + 1);
        f.pan_kernel = build_mtf_kernel(0.15, r, 4 * r + 1);
        RasterImage pan = test::random_image(rng, h * r, w * r, 1);
        const WaldPair wp = wald_pair(f.ms, pan, r, f.kernels, f.pan_kernel);
        f.lrms = wp.lrms;
        f.lrpan = wp.lrpan;
        return f;
    }
};

}  // namespace

TEST_CASE("crop origins, sizes and flip flags") {
    auto f = CropFixture::make(1, 64, 64, 4, 4);
    const auto crops = aligned_ten_crop(f.ms, f.lrms, f.lrpan, 4, 0.5);
    REQUIRE(crops.size() == 10);

    const std::pair<std::size_t, std::size_t> expected[5] = {
        {0, 0}, {0, 32}, {32, 0}, {32, 32}, {16, 16}};
    for (int i = 0; i < 5; ++i) {
        CHECK(crops[i].spec.top == expected[i].first);
        CHECK(crops[i].spec.left == expected[i].second);
        CHECK(crops[i].spec.height == 32);
        CHECK(crops[i].spec.width == 32);
        CHECK_FALSE(crops[i].spec.flipped);
        // flipped twin shares the origin
        CHECK(crops[i + 5].spec.top == expected[i].first);
        CHECK(crops[i + 5].spec.left == expected[i].second);
        CHECK(crops[i + 5].spec.flipped);
    }
    for (const CropTriple& t : crops) {
        CHECK(t.ms.height == 32);
        CHECK(t.ms.width == 32);
        CHECK(t.ms.bands == 4);
        CHECK(t.lrms.height == 8);
        CHECK(t.lrms.width == 8);
        CHECK(t.lrpan.height == 32);
        CHECK(t.lrpan.width == 32);
        CHECK(t.lrpan.bands == 1);
    }
}

TEST_CASE("cross-scale origins stay aligned") {
    auto f = CropFixture::make(2, 48, 80, 2, 4);
    const auto crops = aligned_ten_crop(f.ms, f.lrms, f.lrpan, 4, 0.5);
    for (const CropTriple& t : crops) {
        CHECK(t.spec.top % 4 == 0);
        CHECK(t.spec.left % 4 == 0);
        // reduced-grid content matches the origin divided by r
        for (std::size_t y = 0; y < t.lrms.height; ++y)
            for (std::size_t x = 0; x < t.lrms.width; ++x) {
                const std::size_t sx =
                    t.spec.flipped ? t.lrms.width - 1 - x : x;
                CHECK(t.lrms.at(0, y, x) ==
                      f.lrms.at(0, t.spec.top / 4 + y, t.spec.left / 4 + sx));
            }
    }
}

TEST_CASE("crop contents match direct extraction and flips mirror columns") {
    auto f = CropFixture::make(3, 32, 32, 3, 4);
    const auto crops = aligned_ten_crop(f.ms, f.lrms, f.lrpan, 4, 0.5);
    for (int i = 0; i < 5; ++i) {
        const CropTriple& plain = crops[i];
        const CropTriple& flip = crops[i + 5];
        for (std::size_t b = 0; b < 3; ++b)
            for (std::size_t y = 0; y < plain.ms.height; ++y)
                for (std::size_t x = 0; x < plain.ms.width; ++x) {
                    CHECK(plain.ms.at(b, y, x) ==
                          f.ms.at(b, plain.spec.top + y, plain.spec.left + x));
                    CHECK(flip.ms.at(b, y, x) ==
                          plain.ms.at(b, y, plain.ms.width - 1 - x));
                }
    }
}

TEST_CASE("horizontally symmetric image: flipped crops equal mirrored positions") {
    const std::size_t h = 16, w = 16;
    RasterImage ms(h, w, 1);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x)
            ms.at(0, y, x) = static_cast<double>(y) * std::min(x, w - 1 - x);
    RasterImage lrms(h / 4, w / 4, 1);
    for (std::size_t y = 0; y < h / 4; ++y)
        for (std::size_t x = 0; x < w / 4; ++x)
            lrms.at(0, y, x) = static_cast<double>(y) * std::min(x, w / 4 - 1 - x);
    RasterImage lrpan = ms;

    const auto crops = aligned_ten_crop(ms, lrms, lrpan, 4, 0.5);
    // flip(TL) == TR contents, flip(BL) == BR, flip(center) == center
    const std::pair<int, int> mirrored[] = {{5, 1}, {6, 0}, {7, 3}, {8, 2}, {9, 4}};
    for (const auto& [flipped_idx, plain_idx] : mirrored)
        CHECK(crops[flipped_idx].ms.data == crops[plain_idx].ms.data);
}

TEST_CASE("cropping nearly commutes with filtering away from borders") {
    // Holds directly for the five plain crops. Flipped crops are checked
    // against their plain twin instead: mirroring does not commute with
    // the decimation phase, but the triple stays internally consistent.
    auto f = CropFixture::make(5, 64, 64, 2, 4);
    const auto crops = aligned_ten_crop(f.ms, f.lrms, f.lrpan, 4, 0.5);
    const int margin = (4 * 4 + 1) / 2 / 4 + 1;  // kernel half-width on the low grid
    for (int i = 0; i < 5; ++i) {
        const CropTriple& t = crops[i];
        const RasterImage direct = mtf_downsample(t.ms, f.kernels, 4);
        REQUIRE(direct.same_shape(t.lrms));
        const long hh = static_cast<long>(direct.height);
        const long ww = static_cast<long>(direct.width);
        for (std::size_t b = 0; b < direct.bands; ++b)
            for (long y = margin; y < hh - margin; ++y)
                for (long x = margin; x < ww - margin; ++x)
                    CHECK(direct.at(b, y, x) ==
                          doctest::Approx(t.lrms.at(b, y, x)).epsilon(1e-9));
    }
    for (int i = 0; i < 5; ++i) {
        const CropTriple& plain = crops[i];
        const CropTriple& flip = crops[i + 5];
        for (std::size_t b = 0; b < plain.lrms.bands; ++b)
            for (std::size_t y = 0; y < plain.lrms.height; ++y)
                for (std::size_t x = 0; x < plain.lrms.width; ++x)
                    CHECK(flip.lrms.at(b, y, x) ==
                          plain.lrms.at(b, y, plain.lrms.width - 1 - x));
    }
}

TEST_CASE("center origin snaps down to the ratio grid") {
    auto f = CropFixture::make(6, 24, 24, 1, 4);
    // crop side: floor(24 * 0.5) = 12; center origin floor((24-12)/2) = 6,
    // snapped down to 4
    const auto crops = aligned_ten_crop(f.ms, f.lrms, f.lrpan, 4, 0.5);
    CHECK(crops[4].spec.top == 4);
    CHECK(crops[4].spec.left == 4);
}

TEST_CASE("degenerate crops are rejected") {
    auto f = CropFixture::make(7, 16, 16, 1, 4);
    CHECK_THROWS_AS(aligned_ten_crop(f.ms, f.lrms, f.lrpan, 4, 0.1), ShapeError);
    CHECK_THROWS_AS(aligned_ten_crop(f.ms, f.lrms, f.lrpan, 4, 0.0), DomainError);
    CHECK_THROWS_AS(apply_crop(f.ms, CropSpec{10, 10, 8, 8, false}), ShapeError);
}

TEST_SUITE_END();
