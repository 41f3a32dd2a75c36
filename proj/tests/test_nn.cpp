#include <doctest.h>

#include <cmath>

#include "test_util.hpp"
#include "trapan/errors.hpp"
#include "trapan/nn.hpp"
#include "trapan/pfs.hpp"

using namespace trapan;
using test::TempDir;

TEST_SUITE_BEGIN("nn");

TEST_CASE("adam first step moves by the learning rate against the gradient") {
    DiffParam p("theta", {1});
    p.value[0] = 1.0;
    p.grad[0] = 0.5;
    AdamOptimizer opt(1e-3);
    std::vector<DiffParam*> params{&p};
    opt.step(params);
    const double delta = p.value[0] - 1.0;
    CHECK(delta < 0.0);  // opposite the gradient sign
    CHECK(std::fabs(std::fabs(delta) - 1e-3) < 1e-9);
    CHECK(p.grad[0] == 0.0);  // grads consumed
}

TEST_CASE("adam leaves parameters alone on a zero gradient") {
    DiffParam p("theta", {3});
    p.value = {1.0, -2.0, 0.25};
    AdamOptimizer opt(0.01);
    std::vector<DiffParam*> params{&p};
    opt.step(params);
    CHECK(p.value == std::vector<double>{1.0, -2.0, 0.25});
}

TEST_CASE("adam matches a straight-line scalar reference over five steps") {
    // minimize (theta - 3)^2 from 0
    DiffParam p("theta", {1});
    p.value[0] = 0.0;
    AdamOptimizer opt(0.1);
    std::vector<DiffParam*> params{&p};
    for (int step = 0; step < 5; ++step) {
        p.grad[0] = 2.0 * (p.value[0] - 3.0);
        opt.step(params);
    }

    // independent reference implementation
    double theta = 0.0, m = 0.0, v = 0.0;
    const double lr = 0.1, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    for (int t = 1; t <= 5; ++t) {
        const double g = 2.0 * (theta - 3.0);
        m = b1 * m + (1.0 - b1) * g;
        v = b2 * v + (1.0 - b2) * g * g;
        const double mh = m / (1.0 - std::pow(b1, t));
        const double vh = v / (1.0 - std::pow(b2, t));
        theta -= lr * mh / (std::sqrt(vh) + eps);
    }
    CHECK(p.value[0] == doctest::Approx(theta).epsilon(1e-12));
}

TEST_CASE("mse chain rule on a scalar affine map") {
    // y = w*x with x=2, w=3, target 0: loss 36, dloss/dw = 2*y*x = 24
    const double x = 2.0, w = 3.0;
    const std::vector<double> y{w * x};
    const std::vector<double> target{0.0};
    CHECK(mse(y, target) == 36.0);
    std::vector<double> dy(1);
    mse_backward(y, target, 1.0, dy);
    CHECK(dy[0] * x == 24.0);
}

TEST_CASE("conv3x3 adjoint identity") {
    Rng rng(5);
    Conv3x3 conv("t", 2, 3);
    conv.weight.init_uniform(rng, 18);
    const std::size_t h = 5, w = 6, plane = h * w;
    std::vector<double> x(2 * plane), y(3 * plane);
    for (double& v : x) v = rng.uniform(-1, 1);
    for (double& v : y) v = rng.uniform(-1, 1);

    std::vector<double> ax(3 * plane);
    conv.forward(x, h, w, ax);  // bias is zero, so ax is the linear part
    std::vector<double> aty(2 * plane);
    conv.backward_input(y, h, w, aty);

    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < ax.size(); ++i) lhs += ax[i] * y[i];
    for (std::size_t i = 0; i < x.size(); ++i) rhs += x[i] * aty[i];
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("conv3x3 gradients are exact on a quadratic loss") {
    // the loss is quadratic in the weights, so central differences are
    // exact up to roundoff and the check passes at 1e-8
    Rng rng(7);
    Conv3x3 conv("t", 2, 2);
    conv.weight.init_uniform(rng, 18);
    conv.bias.init_uniform(rng, 18);
    const std::size_t h = 4, w = 4, plane = h * w;
    std::vector<double> x(2 * plane), target(2 * plane);
    for (double& v : x) v = rng.uniform(-1, 1);
    for (double& v : target) v = rng.uniform(-1, 1);

    std::vector<double> out(2 * plane), dout(2 * plane);
    auto loss_fn = [&](bool with_grad) {
        conv.forward(x, h, w, out);
        const double loss = mse(out, target);
        if (with_grad) {
            mse_backward(out, target, 1.0, dout);
            conv.backward_params(x, dout, h, w);
        }
        return loss;
    };
    std::vector<DiffParam*> params{&conv.weight, &conv.bias};
    const auto report = grad_check(std::span<DiffParam* const>(params), loss_fn, 1e-5, 1e-8);
    CHECK(report.pass);
    CHECK(report.max_rel_error <= 1e-8);
}

TEST_CASE("sigmoid derivative at zero input is one quarter") {
    // arrange the net so the second sigmoid sees exactly zero
    DegradationNet net(1);
    auto params = net.params();  // w1,b1,w2,b2,w3,b3
    for (DiffParam* p : params) std::fill(p->value.begin(), p->value.end(), 0.0);
    params[4]->value[0] = 1.0;  // w3 reads hidden unit 0

    RasterImage px(1, 1, 1, 0.0);
    const RasterImage out = net.forward(px);
    CHECK(out.data[0] == doctest::Approx(0.5).epsilon(1e-15));  // sigmoid(0)

    RasterImage target(1, 1, 1, 0.0);
    RasterImage grad(1, 1, 1);
    mse_backward(out.data, target.data, 1.0, grad.data);
    net.backward(grad);
    // dloss/db2[0] = 2*y * w3[0] * sigmoid'(0) = 1.0 * 0.25
    CHECK(params[3]->grad[0] == doctest::Approx(0.25).epsilon(1e-12));

    auto loss_fn = [&](bool with_grad) {
        const RasterImage pred = net.forward(px);
        const double loss = mse(pred.data, target.data);
        if (with_grad) {
            RasterImage g(1, 1, 1);
            mse_backward(pred.data, target.data, 1.0, g.data);
            net.backward(g);
        }
        return loss;
    };
    const auto report = grad_check(std::span<DiffParam* const>(params), loss_fn, 1e-5, 1e-8);
    CHECK(report.pass);
}

TEST_CASE("degradation net gradients match finite differences") {
    Rng rng(11);
    DegradationNet net(3);
    net.randomize_all(rng);
    const RasterImage input = test::random_image(rng, 1, 5, 3);  // 5 pixels
    const RasterImage target = test::random_image(rng, 1, 5, 1);

    auto params = net.params();
    auto loss_fn = [&](bool with_grad) {
        const RasterImage pred = net.forward(input);
        const double loss = mse(pred.data, target.data);
        if (with_grad) {
            RasterImage g(pred.height, pred.width, 1);
            mse_backward(pred.data, target.data, 1.0, g.data);
            net.backward(g);
        }
        return loss;
    };
    const auto report = grad_check(std::span<DiffParam* const>(params), loss_fn, 1e-5, 1e-4);
    CHECK(report.pass);
    CHECK(report.param_count == 32 * 3 + 32 + 32 * 32 + 32 + 32 + 1);
}

TEST_CASE("degradation net input gradients match finite differences") {
    Rng rng(13);
    DegradationNet net(2);
    net.randomize_all(rng);
    RasterImage input = test::random_image(rng, 2, 2, 2);
    const RasterImage target = test::random_image(rng, 2, 2, 1);

    DegradationNet::Activations acts;
    const RasterImage pred = net.forward(input, acts);
    RasterImage grad_out(2, 2, 1);
    mse_backward(pred.data, target.data, 1.0, grad_out.data);
    RasterImage grad_in;
    net.backward_input_only(acts, grad_out, grad_in);

    const double step = 1e-6;
    for (std::size_t i = 0; i < input.size(); ++i) {
        const double saved = input.data[i];
        input.data[i] = saved + step;
        DegradationNet::Activations tmp;
        const double hi = mse(net.forward(input, tmp).data, target.data);
        input.data[i] = saved - step;
        const double lo = mse(net.forward(input, tmp).data, target.data);
        input.data[i] = saved;
        const double fd = (hi - lo) / (2.0 * step);
        const double rel = std::fabs(grad_in.data[i] - fd) /
                           std::max({1.0, std::fabs(fd), std::fabs(grad_in.data[i])});
        CHECK(rel < 1e-6);
    }
}

TEST_CASE("degradation net is a per-pixel map") {
    Rng rng(17);
    DegradationNet net(4);
    net.randomize_all(rng);

    // constant spectra give a constant response
    RasterImage flat(6, 7, 4);
    for (std::size_t b = 0; b < 4; ++b)
        for (std::size_t p = 0; p < flat.pixels(); ++p)
            flat.data[b * flat.pixels() + p] = 0.1 * static_cast<double>(b + 1);
    const RasterImage out = net.forward(flat);
    REQUIRE(out.bands == 1);
    REQUIRE(out.height == 6);
    REQUIRE(out.width == 7);
    for (double v : out.data) CHECK(v == doctest::Approx(out.data[0]).epsilon(1e-12));

    // batched path equals a literal per-pixel loop over the same weights
    const RasterImage img = test::random_image(rng, 3, 4, 4);
    const RasterImage batched = net.forward(img);
    auto params = net.params();
    const auto& w1 = params[0]->value;
    const auto& b1 = params[1]->value;
    const auto& w2 = params[2]->value;
    const auto& b2 = params[3]->value;
    const auto& w3 = params[4]->value;
    const auto& b3 = params[5]->value;
    for (std::size_t p = 0; p < img.pixels(); ++p) {
        double h1[32], h2[32];
        for (int j = 0; j < 32; ++j) {
            double z = b1[j];
            for (int i = 0; i < 4; ++i) z += w1[j * 4 + i] * img.data[i * img.pixels() + p];
            h1[j] = 1.0 / (1.0 + std::exp(-z));
        }
        for (int j = 0; j < 32; ++j) {
            double z = b2[j];
            for (int i = 0; i < 32; ++i) z += w2[j * 32 + i] * h1[i];
            h2[j] = 1.0 / (1.0 + std::exp(-z));
        }
        double y = b3[0];
        for (int i = 0; i < 32; ++i) y += w3[i] * h2[i];
        CHECK(batched.data[p] == doctest::Approx(y).epsilon(1e-12));
    }
}

TEST_CASE("zero-tail backbone reproduces the interpolation baseline") {
    Rng rng(19);
    FusionBackbone net(3, 16, 2);
    net.init_weights(rng);  // tail zero by construction
    const RasterImage ms = test::random_image(rng, 4, 4, 3);
    const RasterImage pan = test::random_image(rng, 16, 16, 1);
    const RasterImage out = net.forward(ms, pan);
    const RasterImage base = upsample(ms, 4);
    CHECK(out.data == base.data);  // exactly, not approximately

    // loss against the baseline is zero and produces zero tail gradients
    const double loss = mse(out.data, base.data);
    CHECK(loss == 0.0);
    RasterImage g(out.height, out.width, out.bands);
    mse_backward(out.data, base.data, 1.0, g.data);
    net.backward(g);
    auto params = net.params();
    for (DiffParam* p : params)
        for (double gv : p->grad) CHECK(gv == 0.0);
}

TEST_CASE("fusion backbone gradients match finite differences") {
    // smaller geometry than the production net, but every layer type is
    // exercised: head conv + relu, residual block with skip, tail conv,
    // mirror padding, bicubic input path
    Rng rng(23);
    FusionBackbone net(2, 4, 1);
    net.randomize_all(rng);
    const RasterImage ms = test::random_image(rng, 2, 2, 2);
    const RasterImage pan = test::random_image(rng, 8, 8, 1);
    const RasterImage target = test::random_image(rng, 8, 8, 2);

    auto params = net.params();
    auto loss_fn = [&](bool with_grad) {
        const RasterImage pred = net.forward(ms, pan);
        const double loss = mse(pred.data, target.data);
        if (with_grad) {
            RasterImage g(pred.height, pred.width, pred.bands);
            mse_backward(pred.data, target.data, 1.0, g.data);
            net.backward(g);
        }
        return loss;
    };
    const auto report = grad_check(std::span<DiffParam* const>(params), loss_fn, 1e-5, 1e-4);
    INFO("worst: ", report.worst_param, "[", report.worst_index, "] rel ",
         report.max_rel_error);
    CHECK(report.pass);
}

TEST_CASE("initialization is deterministic in the seed") {
    FusionBackbone a(3), b(3), c(3);
    Rng ra(31), rb(31), rc(32);
    a.init_weights(ra);
    b.init_weights(rb);
    c.init_weights(rc);
    auto pa = a.params(), pb = b.params(), pc = c.params();
    bool all_equal = true, any_diff = false;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        if (pa[i]->value != pb[i]->value) all_equal = false;
        if (pa[i]->value != pc[i]->value) any_diff = true;
    }
    CHECK(all_equal);
    CHECK(any_diff);
}

TEST_CASE("checkpoints round-trip exactly") {
    TempDir tmp("ckpt");
    Rng rng(37);

    DegradationNet dnet(4);
    dnet.randomize_all(rng);
    save_degradation_checkpoint(dnet, tmp / "dam.ckpt");
    const DegradationNet dback = load_degradation_checkpoint(tmp / "dam.ckpt");
    auto dp = dnet.params();
    auto dq = dback.params();
    for (std::size_t i = 0; i < dp.size(); ++i) CHECK(dp[i]->value == dq[i]->value);

    FusionBackbone fnet(4, 8, 2);
    fnet.randomize_all(rng);
    save_fusion_checkpoint(fnet, tmp / "fusion.ckpt");
    const FusionBackbone fback = load_fusion_checkpoint(tmp / "fusion.ckpt");
    auto fp = fnet.params();
    auto fq = fback.params();
    for (std::size_t i = 0; i < fp.size(); ++i) CHECK(fp[i]->value == fq[i]->value);

    // model kind mismatch is refused
    CHECK_THROWS_AS(load_fusion_checkpoint(tmp / "dam.ckpt"), FormatError);
    CHECK_THROWS_AS(load_degradation_checkpoint(tmp / "nowhere.ckpt"), IoError);
}

TEST_SUITE_END();
