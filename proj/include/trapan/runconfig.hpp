#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "trapan/dam.hpp"
#include "trapan/rao.hpp"
#include "trapan/scene.hpp"

namespace trapan {

/// Input/output locations. Empty string means unset; command-line flags
/// override these, and the resolved values are serialized back out so a
/// saved config reproduces the run on its own.
struct PathsConfig {
    std::string ms;
    std::string pan;
    std::string hrms;
    std::string truth;
    std::string fused;
    std::string dam_checkpoint;
    std::string out_prefix;
};

/// Everything a run needs, resolved from JSON with strict key checking.
/// Unknown keys are rejected so typos cannot silently fall back to
/// defaults, and every run serializes the fully-populated document back
/// next to its outputs for provenance.
struct RunConfig {
    std::uint64_t seed = 1;
    int ratio = 4;
    PathsConfig paths;

    // degrade
    std::optional<std::vector<double>> ms_nyquist_gains;  // per band, else uniform
    double ms_nyquist_gain = 0.29;
    double pan_nyquist_gain = 0.15;
    int kernel_size = 41;
    double noise_std = 0.0;
    int decimation_offset = 0;

    // synth
    std::size_t synth_height = 64;
    std::size_t synth_width = 64;
    std::size_t synth_bands = 4;
    std::optional<std::vector<double>> mixing_weights;

    // augment
    double crop_frac = 0.5;

    // dam
    int dam_epochs = 250;
    int dam_batch_size = 1;
    double dam_lr = 5e-4;

    // rao
    RaoConfig rao;

    // metrics
    std::size_t q_window = 32;

    static RunConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    static RunConfig load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    /// Gains resolved to one entry per band.
    std::vector<double> resolved_ms_gains(std::size_t bands) const;

    DamConfig dam_config() const;
    RaoConfig rao_config() const;  // with seed/crop_frac propagated
    DegradeConfig degrade_config() const;
    SceneConfig scene_config() const;
};

}  // namespace trapan
