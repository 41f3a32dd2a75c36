#include "trapan/runconfig.hpp"

#include <fstream>
#include <set>

#include "trapan/errors.hpp"

namespace trapan {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const std::string& scope) {
    if (!j.is_object()) throw DomainError("config section '" + scope + "' must be an object");
    for (const auto& [key, value] : j.items())
        if (!known.contains(key))
            throw DomainError("unknown config key '" + scope + key + "'");
}

template <typename T>
void read_if(const json& j, const char* key, T& out) {
    if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

template <typename T>
void read_optional(const json& j, const char* key, std::optional<T>& out) {
    if (j.contains(key)) {
        if (j.at(key).is_null())
            out.reset();
        else
            out = j.at(key).get<T>();
    }
}

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
    RunConfig cfg;
    try {
        reject_unknown_keys(j,
                            {"seed", "ratio", "paths", "degrade", "synth", "augment",
                             "dam", "rao", "metrics"},
                            "");
        read_if(j, "seed", cfg.seed);
        read_if(j, "ratio", cfg.ratio);

        if (j.contains("paths")) {
            const json& p = j.at("paths");
            reject_unknown_keys(
                p, {"ms", "pan", "hrms", "truth", "fused", "dam_checkpoint", "out_prefix"},
                "paths.");
            read_if(p, "ms", cfg.paths.ms);
            read_if(p, "pan", cfg.paths.pan);
            read_if(p, "hrms", cfg.paths.hrms);
            read_if(p, "truth", cfg.paths.truth);
            read_if(p, "fused", cfg.paths.fused);
            read_if(p, "dam_checkpoint", cfg.paths.dam_checkpoint);
            read_if(p, "out_prefix", cfg.paths.out_prefix);
        }

        if (j.contains("degrade")) {
            const json& d = j.at("degrade");
            reject_unknown_keys(d,
                                {"ms_nyquist_gains", "ms_nyquist_gain", "pan_nyquist_gain",
                                 "kernel_size", "noise_std", "decimation_offset"},
                                "degrade.");
            read_optional(d, "ms_nyquist_gains", cfg.ms_nyquist_gains);
            read_if(d, "ms_nyquist_gain", cfg.ms_nyquist_gain);
            read_if(d, "pan_nyquist_gain", cfg.pan_nyquist_gain);
            read_if(d, "kernel_size", cfg.kernel_size);
            read_if(d, "noise_std", cfg.noise_std);
            read_if(d, "decimation_offset", cfg.decimation_offset);
        }
        if (j.contains("synth")) {
            const json& s = j.at("synth");
            reject_unknown_keys(s, {"height", "width", "bands", "mixing_weights"},
                                "synth.");
            read_if(s, "height", cfg.synth_height);
            read_if(s, "width", cfg.synth_width);
            read_if(s, "bands", cfg.synth_bands);
            read_optional(s, "mixing_weights", cfg.mixing_weights);
        }
        if (j.contains("augment")) {
            const json& a = j.at("augment");
            reject_unknown_keys(a, {"crop_frac"}, "augment.");
            read_if(a, "crop_frac", cfg.crop_frac);
        }
        if (j.contains("dam")) {
            const json& d = j.at("dam");
            reject_unknown_keys(d, {"epochs", "batch_size", "lr"}, "dam.");
            read_if(d, "epochs", cfg.dam_epochs);
            read_if(d, "batch_size", cfg.dam_batch_size);
            read_if(d, "lr", cfg.dam_lr);
        }
        if (j.contains("rao")) {
            const json& r = j.at("rao");
            reject_unknown_keys(r,
                                {"epochs", "warmup_epochs", "full_prob", "lambda_spectral",
                                 "lambda_spatial", "lr_full", "lr_reduced",
                                 "lr_decay_factor", "lr_decay_epoch", "batch_reduced",
                                 "training_order", "sampling_strategy", "warmup_strategy",
                                 "net_width", "net_blocks"},
                                "rao.");
            read_if(r, "epochs", cfg.rao.epochs);
            read_if(r, "warmup_epochs", cfg.rao.warmup_epochs);
            read_if(r, "full_prob", cfg.rao.full_prob);
            read_if(r, "lambda_spectral", cfg.rao.lambda_spectral);
            read_if(r, "lambda_spatial", cfg.rao.lambda_spatial);
            read_if(r, "lr_full", cfg.rao.lr_full);
            read_if(r, "lr_reduced", cfg.rao.lr_reduced);
            read_if(r, "lr_decay_factor", cfg.rao.lr_decay_factor);
            read_if(r, "lr_decay_epoch", cfg.rao.lr_decay_epoch);
            read_if(r, "batch_reduced", cfg.rao.batch_reduced);
            if (r.contains("training_order"))
                cfg.rao.training_order =
                    training_order_from_string(r.at("training_order").get<std::string>());
            if (r.contains("sampling_strategy"))
                cfg.rao.sampling_strategy = sampling_strategy_from_string(
                    r.at("sampling_strategy").get<std::string>());
            if (r.contains("warmup_strategy"))
                cfg.rao.warmup_strategy =
                    warmup_strategy_from_string(r.at("warmup_strategy").get<std::string>());
            read_if(r, "net_width", cfg.rao.net_width);
            read_if(r, "net_blocks", cfg.rao.net_blocks);
        }
        if (j.contains("metrics")) {
            const json& m = j.at("metrics");
            reject_unknown_keys(m, {"q_window"}, "metrics.");
            read_if(m, "q_window", cfg.q_window);
        }
    } catch (const json::exception& e) {
        throw DomainError(std::string{"malformed config: "} + e.what());
    }

    // Validate eagerly so bad configs fail before any work happens.
    if (cfg.ratio < 1) throw DomainError("ratio must be >= 1");
    if (cfg.kernel_size < 1 || cfg.kernel_size % 2 == 0)
        throw DomainError("kernel_size must be odd and positive");
    if (cfg.noise_std < 0.0) throw DomainError("noise_std must be >= 0");
    if (cfg.decimation_offset < 0 || cfg.decimation_offset >= cfg.ratio)
        throw DomainError("decimation_offset outside [0, ratio)");
    if (!(cfg.ms_nyquist_gain > 0.0 && cfg.ms_nyquist_gain <= 1.0))
        throw DomainError("ms_nyquist_gain outside (0,1]");
    if (!(cfg.pan_nyquist_gain > 0.0 && cfg.pan_nyquist_gain <= 1.0))
        throw DomainError("pan_nyquist_gain outside (0,1]");
    if (cfg.ms_nyquist_gains)
        for (double g : *cfg.ms_nyquist_gains)
            if (!(g > 0.0 && g <= 1.0)) throw DomainError("ms_nyquist_gains entry outside (0,1]");
    if (!(cfg.crop_frac > 0.0 && cfg.crop_frac <= 1.0))
        throw DomainError("crop_frac outside (0,1]");
    if (cfg.dam_epochs < 1) throw DomainError("dam.epochs must be >= 1");
    if (cfg.dam_batch_size != 1) throw DomainError("dam.batch_size must be 1");
    if (cfg.dam_lr <= 0.0) throw DomainError("dam.lr must be positive");
    if (cfg.q_window < 1) throw DomainError("metrics.q_window must be >= 1");
    cfg.rao.validate();
    return cfg;
}

nlohmann::json RunConfig::to_json() const {
    json j;
    j["seed"] = seed;
    j["ratio"] = ratio;
    j["paths"] = {
        {"ms", paths.ms},
        {"pan", paths.pan},
        {"hrms", paths.hrms},
        {"truth", paths.truth},
        {"fused", paths.fused},
        {"dam_checkpoint", paths.dam_checkpoint},
        {"out_prefix", paths.out_prefix},
    };
    j["degrade"] = {
        {"ms_nyquist_gains", ms_nyquist_gains ? json(*ms_nyquist_gains) : json(nullptr)},
        {"ms_nyquist_gain", ms_nyquist_gain},
        {"pan_nyquist_gain", pan_nyquist_gain},
        {"kernel_size", kernel_size},
        {"noise_std", noise_std},
        {"decimation_offset", decimation_offset},
    };
    j["synth"] = {
        {"height", synth_height},
        {"width", synth_width},
        {"bands", synth_bands},
        {"mixing_weights", mixing_weights ? json(*mixing_weights) : json(nullptr)},
    };
    j["augment"] = {{"crop_frac", crop_frac}};
    j["dam"] = {{"epochs", dam_epochs}, {"batch_size", dam_batch_size}, {"lr", dam_lr}};
    j["rao"] = {
        {"epochs", rao.epochs},
        {"warmup_epochs", rao.warmup_epochs},
        {"full_prob", rao.full_prob},
        {"lambda_spectral", rao.lambda_spectral},
        {"lambda_spatial", rao.lambda_spatial},
        {"lr_full", rao.lr_full},
        {"lr_reduced", rao.lr_reduced},
        {"lr_decay_factor", rao.lr_decay_factor},
        {"lr_decay_epoch", rao.lr_decay_epoch},
        {"batch_reduced", rao.batch_reduced},
        {"training_order", to_string(rao.training_order)},
        {"sampling_strategy", to_string(rao.sampling_strategy)},
        {"warmup_strategy", to_string(rao.warmup_strategy)},
        {"net_width", rao.net_width},
        {"net_blocks", rao.net_blocks},
    };
    j["metrics"] = {{"q_window", q_window}};
    return j;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DomainError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return from_json(j);
}

void RunConfig::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << to_json().dump(2) << "\n";
    if (!out) throw IoError("write failed for " + path.string());
}

std::vector<double> RunConfig::resolved_ms_gains(std::size_t bands) const {
    if (ms_nyquist_gains) {
        if (ms_nyquist_gains->size() != bands)
            throw DomainError("ms_nyquist_gains has " +
                              std::to_string(ms_nyquist_gains->size()) +
                              " entries for " + std::to_string(bands) + " bands");
        return *ms_nyquist_gains;
    }
    return std::vector<double>(bands, ms_nyquist_gain);
}

DamConfig RunConfig::dam_config() const {
    DamConfig d;
    d.epochs = dam_epochs;
    d.batch_size = dam_batch_size;
    d.lr = dam_lr;
    d.seed = seed;
    d.crop_frac = crop_frac;
    return d;
}

RaoConfig RunConfig::rao_config() const {
    RaoConfig r = rao;
    r.seed = seed;
    r.crop_frac = crop_frac;
    return r;
}

DegradeConfig RunConfig::degrade_config() const {
    DegradeConfig d;
    d.noise_std = noise_std;
    d.decimation_offset = decimation_offset;
    return d;
}

SceneConfig RunConfig::scene_config() const {
    SceneConfig s;
    s.ratio = ratio;
    s.kernel_size = kernel_size;
    s.ms_nyquist_gain = ms_nyquist_gain;
    // One spatial response on both paths keeps the scene's PAN/band-mix
    // identity exact; pan_nyquist_gain applies to real-pair degradation.
    s.pan_nyquist_gain = ms_nyquist_gain;
    return s;
}

}  // namespace trapan
