#pragma once

#include <cstdint>
#include <vector>

#include "trapan/mtf.hpp"
#include "trapan/nn.hpp"
#include "trapan/raster.hpp"

namespace trapan {

/// Stage-1 hyperparameters. One optimizer step per augmented triple, ten
/// steps per epoch.
struct DamConfig {
    int epochs = 250;
    int batch_size = 1;
    double lr = 5e-4;
    std::uint64_t seed = 0;
    double crop_frac = 0.5;
};

struct DamResult {
    DegradationNet net;
    std::vector<double> loss_history;  // per-epoch mean loss
};

/// Applies the spectral degradation MLP at every pixel: (h, w, c) ->
/// (h, w, 1). Thin wrapper kept for symmetry with the training entry
/// point; shares weights read-only, so it is safe to call concurrently.
RasterImage dam_forward(const DegradationNet& net, const RasterImage& ms);

/// Trains the spectral degradation model on the pair's own reduced
/// observations: builds the aligned ten-crop set of (ms, lrms, lrpan) and
/// fits the per-pixel MLP so its response to the MS crops matches the
/// low-resolution PAN crops. Deterministic for a fixed config seed.
DamResult train_dam(const ImagePair& pair, std::span<const MtfKernel> ms_kernels,
                    const MtfKernel& pan_kernel, const DamConfig& cfg);

}  // namespace trapan
