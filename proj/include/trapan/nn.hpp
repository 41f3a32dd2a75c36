#pragma once

#include <cmath>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "trapan/raster.hpp"
#include "trapan/rng.hpp"

namespace trapan {

/// A named learnable array with an accumulated-gradient slot of the same
/// shape. Gradients are accumulated by backward passes and consumed
/// (zeroed) by the optimizer step.
struct DiffParam {
    std::string name;
    std::vector<std::size_t> shape;
    std::vector<double> value;
    std::vector<double> grad;

    DiffParam() = default;
    DiffParam(std::string n, std::vector<std::size_t> s)
        : name(std::move(n)), shape(std::move(s)) {
        std::size_t count = 1;
        for (std::size_t d : shape) count *= d;
        value.assign(count, 0.0);
        grad.assign(count, 0.0);
    }

    std::size_t size() const { return value.size(); }
    void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }

    /// Fan-in-scaled uniform fill: U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
    void init_uniform(Rng& rng, std::size_t fan_in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (double& v : value) v = rng.uniform(-bound, bound);
    }
};

/// Standard bias-corrected Adam. Moment buffers attach lazily to the
/// parameter list given to the first step() call; later calls must pass
/// the same list.
class AdamOptimizer {
public:
    explicit AdamOptimizer(double lr) : lr_(lr) {}

    double lr() const { return lr_; }
    void set_lr(double lr) { lr_ = lr; }
    long step_count() const { return step_count_; }

    /// Applies one update from the accumulated gradients, then zeroes
    /// them.
    void step(std::span<DiffParam* const> params);

    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

private:
    double lr_;
    long step_count_ = 0;
    std::vector<std::vector<double>> moment1_;
    std::vector<std::vector<double>> moment2_;
};

/// Mean-squared error over all elements; shapes must match.
double mse(std::span<const double> a, std::span<const double> b);

/// d(mse)/da scaled by `scale`, written into `da` (overwrites).
void mse_backward(std::span<const double> a, std::span<const double> b, double scale,
                  std::span<double> da);

// ---------------------------------------------------------------------------
// Layers

/// 3x3 convolution with symmetric (mirror) padding, so spatial dims are
/// preserved. Weight layout [out_c, in_c, 3, 3].
struct Conv3x3 {
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    DiffParam weight;
    DiffParam bias;

    Conv3x3() = default;
    Conv3x3(std::string name, std::size_t in_c, std::size_t out_c);

    void init_weights(Rng& rng) { weight.init_uniform(rng, in_channels * 9); }

    /// in: (in_c, h, w) planar, out: (out_c, h, w) planar (overwritten).
    void forward(std::span<const double> in, std::size_t h, std::size_t w,
                 std::span<double> out) const;

    /// Accumulates weight/bias grads from the cached layer input.
    void backward_params(std::span<const double> in, std::span<const double> grad_out,
                         std::size_t h, std::size_t w);

    /// Gradient w.r.t. the layer input (overwrites grad_in). Mirrored
    /// border contributions are folded back onto their source samples.
    void backward_input(std::span<const double> grad_out, std::size_t h, std::size_t w,
                        std::span<double> grad_in) const;
};

// ---------------------------------------------------------------------------
// Degradation network: per-pixel MLP mapping a c-vector of band values to
// one intensity. Three affine layers c -> 32 -> 32 -> 1 with Sigmoid after
// the first two and an identity output head.

class DegradationNet {
public:
    static constexpr std::size_t kHiddenWidth = 32;

    explicit DegradationNet(std::size_t bands);

    std::size_t bands() const { return bands_; }

    void init_weights(Rng& rng);
    /// Randomizes every parameter including biases; used by gradient
    /// checks where zero-initialized slots would hide errors.
    void randomize_all(Rng& rng);

    std::vector<DiffParam*> params();
    std::vector<const DiffParam*> params() const;
    void zero_grads();

    /// Applies the MLP at every pixel: (h, w, c) -> (h, w, 1). Caches
    /// activations for backward(); use the const overload for shared
    /// read-only inference.
    RasterImage forward(const RasterImage& ms);

    struct Activations {
        std::size_t n = 0;
        std::vector<double> input;    // n x c
        std::vector<double> hidden1;  // n x 32, post-sigmoid
        std::vector<double> hidden2;  // n x 32, post-sigmoid
    };
    RasterImage forward(const RasterImage& ms, Activations& acts) const;

    /// Backward from d(loss)/d(output). Accumulates parameter grads and,
    /// when grad_input is non-null, writes d(loss)/d(input) as an
    /// (h, w, c) image.
    void backward(const RasterImage& grad_out, RasterImage* grad_input = nullptr);

    /// Input gradient only, for use as a frozen operator inside another
    /// network's loss. Never touches parameter grads.
    void backward_input_only(const Activations& acts, const RasterImage& grad_out,
                             RasterImage& grad_input) const;

private:
    static void backward_core(const DegradationNet& net, const Activations& acts,
                              const RasterImage& grad_out,
                              DegradationNet* accumulate_into, RasterImage* grad_input);

    std::size_t bands_;
    DiffParam w1_, b1_, w2_, b2_, w3_, b3_;
    Activations acts_;
};

// ---------------------------------------------------------------------------
// Fusion backbone: detail-injection residual CNN. Input is the channel
// concatenation of the bicubically upsampled MS image and PAN; the tail's
// output is added to the upsampled MS image, so a zero tail reproduces
// plain interpolation.

class FusionBackbone {
public:
    FusionBackbone(std::size_t bands, std::size_t width = 48, std::size_t blocks = 4);

    std::size_t bands() const { return bands_; }
    std::size_t width() const { return width_; }
    std::size_t blocks() const { return blocks_; }

    /// Training init: head/residual weights fan-in uniform, tail zero.
    void init_weights(Rng& rng);
    void randomize_all(Rng& rng);

    std::vector<DiffParam*> params();
    std::vector<const DiffParam*> params() const;
    void zero_grads();

    struct Activations {
        std::size_t h = 0, w = 0;
        RasterImage upsampled;                       // interpolation base
        std::vector<double> input;                   // (c+1, h, w)
        std::vector<double> head_out;                // (width, h, w) post-ReLU
        std::vector<std::vector<double>> block_mid;  // per block, post-ReLU
        std::vector<std::vector<double>> block_out;  // per block, after skip
        std::vector<double> tail_out;                // (c, h, w)
    };

    /// ms: (h, w, c), pan: (r*h, r*w, 1); the ratio is inferred from the
    /// geometry. Returns (r*h, r*w, c). Caches activations for backward().
    RasterImage forward(const RasterImage& ms, const RasterImage& pan);
    RasterImage forward(const RasterImage& ms, const RasterImage& pan,
                        Activations& acts) const;

    /// Backward from d(loss)/d(output); accumulates parameter grads.
    void backward(const RasterImage& grad_out);

private:
    std::size_t bands_;
    std::size_t width_;
    std::size_t blocks_;
    Conv3x3 head_;
    std::vector<Conv3x3> block_convs_;  // two per block
    Conv3x3 tail_;
    Activations acts_;
};

// ---------------------------------------------------------------------------
// Finite-difference gradient check

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::size_t param_count = 0;
    std::string worst_param;
    std::size_t worst_index = 0;
    bool pass = false;
};

/// Compares accumulated analytic gradients against central finite
/// differences. `loss_fn(bool with_grad)` must evaluate the loss and,
/// when with_grad is set, leave gradients accumulated on the params
/// (which arrive zeroed). Relative error is guarded at unit scale:
/// |fd - analytic| / max(1, |fd|, |analytic|). Parameter count is capped
/// so the brute-force sweep stays tractable.
template <typename LossFn>
GradCheckReport grad_check(std::span<DiffParam* const> params, LossFn&& loss_fn,
                           double step, double tolerance) {
    GradCheckReport report;
    for (DiffParam* p : params) report.param_count += p->size();
    if (report.param_count > 5000 || report.param_count == 0) return report;

    for (DiffParam* p : params) p->zero_grad();
    loss_fn(true);
    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (DiffParam* p : params) analytic.push_back(p->grad);

    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        DiffParam* p = params[pi];
        for (std::size_t i = 0; i < p->size(); ++i) {
            const double saved = p->value[i];
            p->value[i] = saved + step;
            const double loss_hi = loss_fn(false);
            p->value[i] = saved - step;
            const double loss_lo = loss_fn(false);
            p->value[i] = saved;

            const double fd = (loss_hi - loss_lo) / (2.0 * step);
            const double a = analytic[pi][i];
            const double rel =
                std::fabs(fd - a) / std::max({1.0, std::fabs(fd), std::fabs(a)});
            if (rel > report.max_rel_error) {
                report.max_rel_error = rel;
                report.worst_param = p->name;
                report.worst_index = i;
            }
        }
    }
    for (DiffParam* p : params) p->zero_grad();
    report.pass = report.max_rel_error <= tolerance;
    return report;
}

// ---------------------------------------------------------------------------
// Checkpoints: one PFS-style f64 container per parameter plus a JSON
// manifest naming shapes and the model geometry.

void save_degradation_checkpoint(const DegradationNet& net,
                                 const std::filesystem::path& dir);
DegradationNet load_degradation_checkpoint(const std::filesystem::path& dir);

void save_fusion_checkpoint(const FusionBackbone& net,
                            const std::filesystem::path& dir);
FusionBackbone load_fusion_checkpoint(const std::filesystem::path& dir);

}  // namespace trapan
