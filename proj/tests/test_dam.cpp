#include <doctest.h>

#include <cmath>

#include "test_util.hpp"
#include "trapan/dam.hpp"
#include "trapan/errors.hpp"
#include "trapan/scene.hpp"

using namespace trapan;

TEST_SUITE_BEGIN("dam");

namespace {

struct DamFixture {
    SyntheticScene scene;
    std::vector<MtfKernel> ms_kernels;
    MtfKernel pan_kernel;

    static DamFixture make(std::uint64_t seed, std::size_t size, std::size_t bands) {
        DamFixture f{synth_scene(seed, size, size, bands), {}, {}};
        f.ms_kernels =
            build_ms_kernels(f.scene.ms_nyquist_gains, f.scene.ratio, 41);
        f.pan_kernel = build_mtf_kernel(f.scene.pan_nyquist_gain, f.scene.ratio, 41);
        return f;
    }
};

}  // namespace

TEST_CASE("training fits the linear band mix on a synthetic scene") {
    auto f = DamFixture::make(1, 64, 4);
    DamConfig cfg;
    cfg.seed = 1;
    const DamResult result = train_dam(f.scene.pair(), f.ms_kernels, f.pan_kernel, cfg);
    REQUIRE(result.loss_history.size() == 250);
    CHECK(result.loss_history.back() < 1e-5);

    // loss trend is non-increasing over 25-epoch windows, allowing a few
    // transient upticks
    int upticks = 0;
    int windows = 0;
    for (std::size_t i = 25; i < result.loss_history.size(); i += 25) {
        ++windows;
        if (result.loss_history[i] > result.loss_history[i - 25]) ++upticks;
    }
    CHECK(upticks <= windows / 20 + 1);  // <= ~5%
}

TEST_CASE("single-band identity scene trains to a near-identity map") {
    auto f = DamFixture::make(2, 32, 1);
    REQUIRE(f.scene.pan.data == f.scene.hrms.data);
    DamConfig cfg;
    cfg.seed = 2;
    cfg.epochs = 400;
    const DamResult result = train_dam(f.scene.pair(), f.ms_kernels, f.pan_kernel, cfg);
    CHECK(result.loss_history.back() < 1e-6);
}

TEST_CASE("training is deterministic in the seed") {
    auto f = DamFixture::make(3, 32, 2);
    DamConfig cfg;
    cfg.seed = 9;
    cfg.epochs = 10;
    const DamResult a = train_dam(f.scene.pair(), f.ms_kernels, f.pan_kernel, cfg);
    const DamResult b = train_dam(f.scene.pair(), f.ms_kernels, f.pan_kernel, cfg);
    CHECK(a.loss_history == b.loss_history);
    auto pa = a.net.params();
    auto pb = b.net.params();
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(pa[i]->value == pb[i]->value);
}

TEST_CASE("forward wrapper has the contracted shapes") {
    Rng rng(5);
    DegradationNet net(4);
    net.randomize_all(rng);
    const RasterImage in = test::random_image(rng, 8, 8, 4);
    const RasterImage out = dam_forward(net, in);
    CHECK(out.height == 8);
    CHECK(out.width == 8);
    CHECK(out.bands == 1);

    const RasterImage bad = test::random_image(rng, 8, 8, 3);
    CHECK_THROWS_AS(dam_forward(net, bad), ShapeError);
}

TEST_CASE("training rejects inconsistent configuration") {
    auto f = DamFixture::make(6, 32, 2);
    DamConfig cfg;
    cfg.epochs = 0;
    CHECK_THROWS_AS(train_dam(f.scene.pair(), f.ms_kernels, f.pan_kernel, cfg),
                    DomainError);
    cfg = DamConfig{};
    cfg.batch_size = 2;
    CHECK_THROWS_AS(train_dam(f.scene.pair(), f.ms_kernels, f.pan_kernel, cfg),
                    DomainError);
}

TEST_SUITE_END();
