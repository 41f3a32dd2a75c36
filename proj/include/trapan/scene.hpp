#pragma once

#include <cstdint>
#include <vector>

#include "trapan/mtf.hpp"
#include "trapan/raster.hpp"

namespace trapan {

/// Ground-truthed synthetic acquisition: a high-resolution multispectral
/// scene, the panchromatic image as an exact linear band mix of it, and
/// the multispectral observation produced by MTF-matched degradation.
struct SyntheticScene {
    RasterImage hrms;                    // H x W x C ground truth
    RasterImage pan;                     // H x W x 1
    RasterImage ms;                      // H/r x W/r x C
    std::vector<double> mixing_weights;  // per band, sums to 1
    int ratio = 4;
    std::vector<double> ms_nyquist_gains;
    double pan_nyquist_gain = 0.15;

    ImagePair pair() const {
        return ImagePair{pan, ms, ratio, ms_nyquist_gains, pan_nyquist_gain};
    }
};

struct SceneConfig {
    int ratio = 4;
    int kernel_size = 41;
    double ms_nyquist_gain = 0.29;  // used when the per-band list is empty
    // Synthetic scenes share one spatial response between MS and PAN so
    // the PAN/band-mix identity survives degradation exactly; sensor-like
    // mismatched gains (e.g. 0.15) are for real pairs.
    double pan_nyquist_gain = 0.29;
    std::vector<double> ms_nyquist_gains;  // optional per-band override
};

/// Deterministic scene from a seed: smooth random fields plus randomly
/// placed rectangles and disks with per-band correlated intensities,
/// clipped to [0,1]. mixing_weights must be nonnegative and sum to 1
/// within 1e-6 (empty selects uniform weights). height/width must be
/// divisible by the ratio.
SyntheticScene synth_scene(std::uint64_t seed, std::size_t height, std::size_t width,
                           std::size_t bands, std::vector<double> mixing_weights = {},
                           const SceneConfig& cfg = {});

}  // namespace trapan
