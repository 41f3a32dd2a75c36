#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "trapan/dam.hpp"
#include "trapan/mtf.hpp"
#include "trapan/nn.hpp"
#include "trapan/raster.hpp"
#include "trapan/tencrop.hpp"

namespace trapan {

enum class TrainingOrder { kAlternating, kFullThenReduced, kReducedThenFull };
enum class SamplingStrategy { kAlwaysReduced, kAlwaysFull, kRandomEither };
enum class WarmupStrategy { kFull, kReduced, kNone };

std::string to_string(TrainingOrder v);
std::string to_string(SamplingStrategy v);
std::string to_string(WarmupStrategy v);
TrainingOrder training_order_from_string(const std::string& s);
SamplingStrategy sampling_strategy_from_string(const std::string& s);
WarmupStrategy warmup_strategy_from_string(const std::string& s);

/// Stage-2 hyperparameters. `epochs` counts warm-up epochs as part of the
/// total.
struct RaoConfig {
    double full_prob = 0.8;        // probability of the full-resolution branch
    int warmup_epochs = 20;        // m
    int epochs = 250;              // n2, warm-up included
    double lambda_spectral = 1.0;  // weight of the degradation-consistency loss
    double lambda_spatial = 1.0;   // weight of the reduced-consistency loss
    double lr_full = 5e-4;
    double lr_reduced = 5e-4;
    double lr_decay_factor = 0.1;
    int lr_decay_epoch = 200;  // decayed rate applies from this 1-based epoch on
    int batch_reduced = 8;     // crops per reduced-resolution optimizer step
    std::uint64_t seed = 0;
    TrainingOrder training_order = TrainingOrder::kAlternating;
    SamplingStrategy sampling_strategy = SamplingStrategy::kAlwaysReduced;
    WarmupStrategy warmup_strategy = WarmupStrategy::kFull;
    double crop_frac = 0.5;
    std::size_t net_width = 48;
    std::size_t net_blocks = 4;

    void validate() const;
};

/// Branch plan for one epoch. u is always drawn (and logged) even when a
/// warm-up or fixed-order rule ignores it, so the random stream stays
/// aligned across configurations.
struct EpochPlan {
    double u = 0.0;
    bool reduced_ran = false;
    bool full_ran = false;
};

/// Draws one u per epoch and resolves the branch flags per the warm-up
/// strategy, sampling strategy and training order:
///   - warm-up epochs (j <= m) run only the warm-up branch;
///   - alternating order: always_reduced runs the reduced branch every
///     epoch and the full branch iff u < p; always_full mirrors this;
///     random_either picks exactly one branch (full iff u < p);
///   - fixed orders ignore u and run ceil(p * (n2 - m)) full epochs and
///     the rest reduced, as one block each.
std::vector<EpochPlan> epoch_schedule(const RaoConfig& cfg, Rng& rng);

struct EpochRecord {
    int epoch = 0;  // 1-based
    double u = 0.0;
    bool reduced_ran = false;
    bool full_ran = false;
    std::optional<double> reduced_loss;
    std::optional<double> spectral_loss;
    std::optional<double> spatial_loss;
    std::optional<double> total_full_loss;
    double lr = 0.0;  // in effect for the branch(es) run this epoch
};

struct TrainLog {
    std::vector<EpochRecord> epochs;

    void write_csv(const std::filesystem::path& path) const;
    static TrainLog read_csv(const std::filesystem::path& path);
    static const char* csv_header();
};

/// One optimizer step on a batch of aligned crops: the backbone fuses
/// (lrms, lrpan) and is regressed onto the MS crop. Returns the
/// batch-mean loss.
double reduced_step(FusionBackbone& net, AdamOptimizer& opt,
                    std::span<const CropTriple* const> batch);

struct FullStepLosses {
    double total = 0.0;
    double spectral = 0.0;
    double spatial = 0.0;
};

/// One optimizer step on the un-augmented full pair: the fused image is
/// pushed through the frozen degradation model (spectral term) and the
/// fixed MTF operator (spatial term). Only the backbone parameters move;
/// gradient flows through both fixed operators.
FullStepLosses full_step(FusionBackbone& net, const DegradationNet& dam_net,
                         AdamOptimizer& opt, const RasterImage& ms,
                         const RasterImage& pan, std::span<const MtfKernel> ms_kernels,
                         int ratio, double lambda_spectral, double lambda_spatial);

struct RaoResult {
    FusionBackbone net;
    TrainLog log;
};

/// Full stage-2 run: builds the augmented triples once, executes the
/// epoch schedule (reduced branch first within an epoch), and logs one
/// record per epoch. Deterministic for a fixed config seed; the
/// degradation model is shared read-only.
RaoResult run_rao(const ImagePair& pair, const DegradationNet& dam_net,
                  std::span<const MtfKernel> ms_kernels, const MtfKernel& pan_kernel,
                  const RaoConfig& cfg);

/// Final inference: fuses the pair with the trained backbone. Pure
/// function of inputs and weights; throws NumericError if any output
/// sample is non-finite.
RasterImage infer(const FusionBackbone& net, const ImagePair& pair);

}  // namespace trapan
