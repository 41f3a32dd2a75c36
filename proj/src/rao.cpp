#include "trapan/rao.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "trapan/errors.hpp"

namespace trapan {

std::string to_string(TrainingOrder v) {
    switch (v) {
        case TrainingOrder::kAlternating: return "alternating";
        case TrainingOrder::kFullThenReduced: return "full_then_reduced";
        case TrainingOrder::kReducedThenFull: return "reduced_then_full";
    }
    return "alternating";
}

std::string to_string(SamplingStrategy v) {
    switch (v) {
        case SamplingStrategy::kAlwaysReduced: return "always_reduced";
        case SamplingStrategy::kAlwaysFull: return "always_full";
        case SamplingStrategy::kRandomEither: return "random_either";
    }
    return "always_reduced";
}

std::string to_string(WarmupStrategy v) {
    switch (v) {
        case WarmupStrategy::kFull: return "full";
        case WarmupStrategy::kReduced: return "reduced";
        case WarmupStrategy::kNone: return "none";
    }
    return "full";
}

TrainingOrder training_order_from_string(const std::string& s) {
    if (s == "alternating") return TrainingOrder::kAlternating;
    if (s == "full_then_reduced") return TrainingOrder::kFullThenReduced;
    if (s == "reduced_then_full") return TrainingOrder::kReducedThenFull;
    throw DomainError("unknown training order '" + s + "'");
}

SamplingStrategy sampling_strategy_from_string(const std::string& s) {
    if (s == "always_reduced") return SamplingStrategy::kAlwaysReduced;
    if (s == "always_full") return SamplingStrategy::kAlwaysFull;
    if (s == "random_either") return SamplingStrategy::kRandomEither;
    throw DomainError("unknown sampling strategy '" + s + "'");
}

WarmupStrategy warmup_strategy_from_string(const std::string& s) {
    if (s == "full") return WarmupStrategy::kFull;
    if (s == "reduced") return WarmupStrategy::kReduced;
    if (s == "none") return WarmupStrategy::kNone;
    throw DomainError("unknown warm-up strategy '" + s + "'");
}

void RaoConfig::validate() const {
    if (!(full_prob >= 0.0 && full_prob <= 1.0))
        throw DomainError("full-resolution probability outside [0,1]");
    if (epochs < 1) throw DomainError("need at least one epoch");
    if (warmup_epochs < 0 || warmup_epochs > epochs)
        throw DomainError("warm-up epochs outside [0, epochs]");
    if (lambda_spectral < 0.0 || lambda_spatial < 0.0)
        throw DomainError("loss weights must be nonnegative");
    if (lr_full <= 0.0 || lr_reduced <= 0.0) throw DomainError("learning rates must be positive");
    if (lr_decay_factor <= 0.0) throw DomainError("lr decay factor must be positive");
    if (batch_reduced < 1) throw DomainError("reduced batch size must be >= 1");
    if (!(crop_frac > 0.0 && crop_frac <= 1.0)) throw DomainError("crop fraction outside (0,1]");
    if (net_width < 1 || net_blocks < 1) throw DomainError("backbone geometry must be positive");
}

std::vector<EpochPlan> epoch_schedule(const RaoConfig& cfg, Rng& rng) {
    cfg.validate();
    const int warmup =
        cfg.warmup_strategy == WarmupStrategy::kNone ? 0 : cfg.warmup_epochs;
    const int post = cfg.epochs - warmup;
    const int fixed_full =
        static_cast<int>(std::ceil(cfg.full_prob * static_cast<double>(post)));

    std::vector<EpochPlan> plans;
    plans.reserve(static_cast<std::size_t>(cfg.epochs));
    for (int j = 1; j <= cfg.epochs; ++j) {
        EpochPlan plan;
        plan.u = rng.u01();
        if (j <= warmup) {
            plan.full_ran = cfg.warmup_strategy == WarmupStrategy::kFull;
            plan.reduced_ran = cfg.warmup_strategy == WarmupStrategy::kReduced;
        } else if (cfg.training_order == TrainingOrder::kAlternating) {
            switch (cfg.sampling_strategy) {
                case SamplingStrategy::kAlwaysReduced:
                    plan.reduced_ran = true;
                    plan.full_ran = plan.u < cfg.full_prob;
                    break;
                case SamplingStrategy::kAlwaysFull:
                    plan.full_ran = true;
                    plan.reduced_ran = plan.u < cfg.full_prob;
                    break;
                case SamplingStrategy::kRandomEither:
                    plan.full_ran = plan.u < cfg.full_prob;
                    plan.reduced_ran = !plan.full_ran;
                    break;
            }
        } else {
            const int idx = j - warmup;  // 1-based among post-warm-up epochs
            if (cfg.training_order == TrainingOrder::kFullThenReduced) {
                plan.full_ran = idx <= fixed_full;
                plan.reduced_ran = !plan.full_ran;
            } else {
                plan.reduced_ran = idx <= post - fixed_full;
                plan.full_ran = !plan.reduced_ran;
            }
        }
        plans.push_back(plan);
    }
    return plans;
}

// ---------------------------------------------------------------------------
// TrainLog CSV

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_optional(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string{};
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    fields.push_back(cur);
    return fields;
}

std::optional<double> parse_optional(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return std::stod(s);
}

}  // namespace

const char* TrainLog::csv_header() {
    return "epoch,u,reduced_ran,full_ran,reduced_loss,spectral_loss,spatial_loss,"
           "total_full_loss,lr";
}

void TrainLog::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << csv_header() << "\n";
    for (const EpochRecord& r : epochs) {
        out << r.epoch << ',' << format_double(r.u) << ',' << (r.reduced_ran ? 1 : 0)
            << ',' << (r.full_ran ? 1 : 0) << ',' << format_optional(r.reduced_loss)
            << ',' << format_optional(r.spectral_loss) << ','
            << format_optional(r.spatial_loss) << ','
            << format_optional(r.total_full_loss) << ',' << format_double(r.lr)
            << "\n";
    }
    if (!out) throw IoError("write failed for " + path.string());
}

TrainLog TrainLog::read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty train log " + path.string());
    if (split_csv_line(line) != split_csv_line(csv_header()))
        throw FormatError("unexpected train log header in " + path.string());

    TrainLog log;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 9)
            throw FormatError("bad train log row in " + path.string() + ": " + line);
        EpochRecord r;
        r.epoch = std::stoi(f[0]);
        r.u = std::stod(f[1]);
        r.reduced_ran = f[2] == "1";
        r.full_ran = f[3] == "1";
        r.reduced_loss = parse_optional(f[4]);
        r.spectral_loss = parse_optional(f[5]);
        r.spatial_loss = parse_optional(f[6]);
        r.total_full_loss = parse_optional(f[7]);
        r.lr = std::stod(f[8]);
        log.epochs.push_back(r);
    }
    return log;
}

// ---------------------------------------------------------------------------
// Training steps

double reduced_step(FusionBackbone& net, AdamOptimizer& opt,
                    std::span<const CropTriple* const> batch) {
    if (batch.empty()) throw DomainError("reduced step needs a nonempty batch");
    const double inv_batch = 1.0 / static_cast<double>(batch.size());
    double total = 0.0;
    for (const CropTriple* t : batch) {
        const RasterImage pred = net.forward(t->lrms, t->lrpan);
        if (!pred.same_shape(t->ms)) throw ShapeError("fused crop does not match MS crop");
        const double loss = mse(pred.data, t->ms.data);
        if (!std::isfinite(loss)) throw NumericError("non-finite reduced-resolution loss");
        RasterImage grad(pred.height, pred.width, pred.bands);
        mse_backward(pred.data, t->ms.data, inv_batch, grad.data);
        net.backward(grad);
        total += loss * inv_batch;
    }
    auto params = net.params();
    opt.step(params);
    return total;
}

FullStepLosses full_step(FusionBackbone& net, const DegradationNet& dam_net,
                         AdamOptimizer& opt, const RasterImage& ms,
                         const RasterImage& pan, std::span<const MtfKernel> ms_kernels,
                         int ratio, double lambda_spectral, double lambda_spatial) {
    if (dam_net.bands() != ms.bands)
        throw ShapeError("degradation model band count does not match the MS image");

    const RasterImage fused = net.forward(ms, pan);

    DegradationNet::Activations dam_acts;
    const RasterImage degraded = dam_net.forward(fused, dam_acts);
    const RasterImage downsampled = mtf_downsample(fused, ms_kernels, ratio);

    FullStepLosses losses;
    losses.spectral = mse(degraded.data, pan.data);
    losses.spatial = mse(downsampled.data, ms.data);
    losses.total = lambda_spectral * losses.spectral + lambda_spatial * losses.spatial;
    if (!std::isfinite(losses.total)) throw NumericError("non-finite full-resolution loss");

    RasterImage grad_fused(fused.height, fused.width, fused.bands);
    if (lambda_spectral != 0.0) {
        RasterImage grad_degraded(degraded.height, degraded.width, 1);
        mse_backward(degraded.data, pan.data, lambda_spectral, grad_degraded.data);
        RasterImage grad_in;
        dam_net.backward_input_only(dam_acts, grad_degraded, grad_in);
        for (std::size_t i = 0; i < grad_fused.size(); ++i)
            grad_fused.data[i] += grad_in.data[i];
    }
    if (lambda_spatial != 0.0) {
        RasterImage grad_down(downsampled.height, downsampled.width, downsampled.bands);
        mse_backward(downsampled.data, ms.data, lambda_spatial, grad_down.data);
        const RasterImage grad_in = mtf_downsample_adjoint(
            grad_down, ms_kernels, ratio, fused.height, fused.width);
        for (std::size_t i = 0; i < grad_fused.size(); ++i)
            grad_fused.data[i] += grad_in.data[i];
    }

    net.backward(grad_fused);
    auto params = net.params();
    opt.step(params);
    return losses;
}

// ---------------------------------------------------------------------------
// Stage driver

RaoResult run_rao(const ImagePair& pair, const DegradationNet& dam_net,
                  std::span<const MtfKernel> ms_kernels, const MtfKernel& pan_kernel,
                  const RaoConfig& cfg) {
    pair.validate();
    cfg.validate();
    if (dam_net.bands() != pair.ms.bands)
        throw ShapeError("degradation model band count does not match the pair");

    const WaldPair wald = wald_pair(pair.ms, pair.pan, pair.ratio, ms_kernels, pan_kernel);
    const auto triples =
        aligned_ten_crop(pair.ms, wald.lrms, wald.lrpan, pair.ratio, cfg.crop_frac);
    const std::size_t pool = triples.size();

    Rng root(cfg.seed);
    Rng init_rng = root.fork("rao-init");
    Rng sched_rng = root.fork("rao-schedule");
    Rng batch_rng = root.fork("rao-batch");

    RaoResult result{FusionBackbone(pair.ms.bands, cfg.net_width, cfg.net_blocks), {}};
    result.net.init_weights(init_rng);
    AdamOptimizer opt(cfg.lr_full);

    const auto schedule = epoch_schedule(cfg, sched_rng);
    const std::size_t batch_size =
        std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_reduced), pool);
    const std::size_t steps_per_epoch = (pool + batch_size - 1) / batch_size;

    result.log.epochs.reserve(schedule.size());
    for (std::size_t e = 0; e < schedule.size(); ++e) {
        const EpochPlan& plan = schedule[e];
        const int epoch = static_cast<int>(e) + 1;
        const double decay = epoch >= cfg.lr_decay_epoch ? cfg.lr_decay_factor : 1.0;

        EpochRecord rec;
        rec.epoch = epoch;
        rec.u = plan.u;
        rec.reduced_ran = plan.reduced_ran;
        rec.full_ran = plan.full_ran;

        if (plan.reduced_ran) {
            opt.set_lr(cfg.lr_reduced * decay);
            // One pass over the shuffled crop pool in batches, the last
            // batch filled by wrapping around to the front.
            const auto order = batch_rng.permutation(pool);
            double loss_sum = 0.0;
            for (std::size_t s = 0; s < steps_per_epoch; ++s) {
                std::vector<const CropTriple*> batch(batch_size);
                for (std::size_t i = 0; i < batch_size; ++i)
                    batch[i] = &triples[order[(s * batch_size + i) % pool]];
                loss_sum += reduced_step(result.net, opt, batch);
            }
            rec.reduced_loss = loss_sum / static_cast<double>(steps_per_epoch);
            rec.lr = opt.lr();
        }
        if (plan.full_ran) {
            opt.set_lr(cfg.lr_full * decay);
            const FullStepLosses losses =
                full_step(result.net, dam_net, opt, pair.ms, pair.pan, ms_kernels,
                          pair.ratio, cfg.lambda_spectral, cfg.lambda_spatial);
            rec.spectral_loss = losses.spectral;
            rec.spatial_loss = losses.spatial;
            rec.total_full_loss = losses.total;
            rec.lr = opt.lr();
        }
        result.log.epochs.push_back(rec);
    }
    return result;
}

RasterImage infer(const FusionBackbone& net, const ImagePair& pair) {
    pair.validate();
    FusionBackbone::Activations acts;
    RasterImage fused = net.forward(pair.ms, pair.pan, acts);
    for (double v : fused.data)
        if (!std::isfinite(v)) throw NumericError("non-finite sample in fused image");
    return fused;
}

}  // namespace trapan
