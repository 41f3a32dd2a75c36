#include "trapan/cli.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "trapan/dam.hpp"
#include "trapan/errors.hpp"
#include "trapan/metrics.hpp"
#include "trapan/pfs.hpp"
#include "trapan/rao.hpp"
#include "trapan/report.hpp"
#include "trapan/runconfig.hpp"
#include "trapan/scene.hpp"

namespace trapan {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string format_optional(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string{};
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

// ---------------------------------------------------------------------------
// Pair loading with sidecar-aware gain resolution

ImagePair load_pair_from(RunConfig& cfg) {
    const RasterImage ms = load_pfs(cfg.paths.ms);
    const RasterImage pan = load_pfs(cfg.paths.pan);
    if (pan.bands != 1) throw ShapeError("PAN image must be single-band");
    if (ms.height == 0 || ms.width == 0) throw ShapeError("empty MS image");
    if (pan.height % ms.height != 0 || pan.width % ms.width != 0 ||
        pan.height / ms.height != pan.width / ms.width)
        throw ShapeError("PAN dims are not an integer multiple of MS dims");
    const int ratio = static_cast<int>(pan.height / ms.height);

    std::vector<double> gains;
    if (const auto sc = load_sidecar(cfg.paths.ms)) {
        if (sc->ratio != ratio)
            throw CorruptError("MS sidecar ratio disagrees with the pair geometry");
        if (!sc->nyquist_gains.empty()) {
            if (sc->nyquist_gains.size() != ms.bands)
                throw CorruptError("MS sidecar gain count does not match the band count");
            gains = sc->nyquist_gains;
        }
    }
    if (gains.empty()) gains = cfg.resolved_ms_gains(ms.bands);

    double pan_gain = cfg.pan_nyquist_gain;
    if (const auto sc = load_sidecar(cfg.paths.pan))
        if (!sc->nyquist_gains.empty()) pan_gain = sc->nyquist_gains.front();

    cfg.ratio = ratio;  // provenance: record the geometry actually used
    ImagePair pair{pan, ms, ratio, std::move(gains), pan_gain};
    pair.validate();
    return pair;
}

struct Kernels {
    std::vector<MtfKernel> ms;
    MtfKernel pan;
};

Kernels kernels_for(const ImagePair& pair, const RunConfig& cfg) {
    Kernels k;
    k.ms = build_ms_kernels(pair.ms_nyquist_gains, pair.ratio, cfg.kernel_size);
    k.pan = build_mtf_kernel(pair.pan_nyquist_gain, pair.ratio, cfg.kernel_size);
    return k;
}

void write_loss_csv(const std::filesystem::path& path, std::span<const double> losses) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "epoch,loss\n";
    for (std::size_t i = 0; i < losses.size(); ++i)
        out << (i + 1) << ',' << format_double(losses[i]) << "\n";
    if (!out) throw IoError("write failed for " + path.string());
}

const char* kReportHeader = "d_lambda,d_s,hqnr,sam_degrees,ergas,psnr_db";

void write_report_csv(const std::filesystem::path& path, const QualityReport& r) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << kReportHeader << "\n";
    out << format_double(r.d_lambda) << ',' << format_double(r.d_s) << ','
        << format_double(r.hqnr) << ',' << format_optional(r.sam_degrees) << ','
        << format_optional(r.ergas) << ',' << format_optional(r.psnr_db) << "\n";
    if (!out) throw IoError("write failed for " + path.string());
}

void write_report_json(const std::filesystem::path& path, const QualityReport& r) {
    nlohmann::json j;
    j["d_lambda"] = r.d_lambda;
    j["d_s"] = r.d_s;
    j["hqnr"] = r.hqnr;
    j["sam_degrees"] = r.sam_degrees ? nlohmann::json(*r.sam_degrees) : nlohmann::json(nullptr);
    j["ergas"] = r.ergas ? nlohmann::json(*r.ergas) : nlohmann::json(nullptr);
    j["psnr_db"] = r.psnr_db ? nlohmann::json(*r.psnr_db) : nlohmann::json(nullptr);
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << "\n";
    if (!out) throw IoError("write failed for " + path.string());
}

Sidecar make_sidecar(int ratio, std::vector<double> gains, std::string label) {
    Sidecar sc;
    sc.ratio = ratio;
    sc.nyquist_gains = std::move(gains);
    sc.sensor_label = std::move(label);
    return sc;
}

// ---------------------------------------------------------------------------
// Subcommand bodies (run inside the processing-phase guard)

void cmd_synth(RunConfig& cfg) {
    SceneConfig scfg = cfg.scene_config();
    if (cfg.ms_nyquist_gains) scfg.ms_nyquist_gains = *cfg.ms_nyquist_gains;
    const SyntheticScene scene =
        synth_scene(cfg.seed, cfg.synth_height, cfg.synth_width, cfg.synth_bands,
                    cfg.mixing_weights.value_or(std::vector<double>{}), scfg);

    const std::string prefix = cfg.paths.out_prefix;
    cfg.paths.hrms = prefix + "_hrms.pfs";
    cfg.paths.pan = prefix + "_pan.pfs";
    cfg.paths.ms = prefix + "_ms.pfs";
    save_pfs(scene.hrms, cfg.paths.hrms);
    save_pfs(scene.pan, cfg.paths.pan);
    save_pfs(scene.ms, cfg.paths.ms);
    save_sidecar(make_sidecar(scene.ratio, scene.ms_nyquist_gains, "synthetic-hrms"),
                 cfg.paths.hrms);
    save_sidecar(make_sidecar(scene.ratio, {scene.pan_nyquist_gain}, "synthetic-pan"),
                 cfg.paths.pan);
    save_sidecar(make_sidecar(scene.ratio, scene.ms_nyquist_gains, "synthetic-ms"),
                 cfg.paths.ms);
    cfg.save(prefix + "_config.json");
    std::cout << "synth: wrote " << cfg.paths.hrms << ", " << cfg.paths.pan << ", "
              << cfg.paths.ms << "\n";
}

void cmd_degrade(RunConfig& cfg) {
    const std::string prefix = cfg.paths.out_prefix;
    const DegradeConfig dcfg = cfg.degrade_config();
    Rng noise_rng = Rng(cfg.seed).fork("degrade-noise");
    Rng* rng = dcfg.noise_std > 0.0 ? &noise_rng : nullptr;

    if (!cfg.paths.hrms.empty()) {
        const RasterImage hrms = load_pfs(cfg.paths.hrms);
        const auto gains = cfg.resolved_ms_gains(hrms.bands);
        const auto kernels = build_ms_kernels(gains, cfg.ratio, cfg.kernel_size);
        const RasterImage ms = mtf_downsample(hrms, kernels, cfg.ratio, dcfg, rng);
        const std::string out = prefix + "_ms.pfs";
        save_pfs(ms, out);
        save_sidecar(make_sidecar(cfg.ratio, gains, "degraded-hrms"), out);
        cfg.paths.ms = out;
        std::cout << "degrade: wrote " << out << "\n";
    } else {
        ImagePair pair = load_pair_from(cfg);
        const Kernels k = kernels_for(pair, cfg);
        const WaldPair wald =
            wald_pair(pair.ms, pair.pan, pair.ratio, k.ms, k.pan, dcfg, rng);
        const std::string lrms_path = prefix + "_lrms.pfs";
        const std::string lrpan_path = prefix + "_lrpan.pfs";
        save_pfs(wald.lrms, lrms_path);
        save_pfs(wald.lrpan, lrpan_path);
        save_sidecar(make_sidecar(pair.ratio, pair.ms_nyquist_gains, "wald-lrms"),
                     lrms_path);
        save_sidecar(make_sidecar(pair.ratio, {pair.pan_nyquist_gain}, "wald-lrpan"),
                     lrpan_path);
        std::cout << "degrade: wrote " << lrms_path << ", " << lrpan_path << "\n";
    }
    cfg.save(prefix + "_config.json");
}

void cmd_dam(RunConfig& cfg) {
    ImagePair pair = load_pair_from(cfg);
    const Kernels k = kernels_for(pair, cfg);
    const DamResult dam = train_dam(pair, k.ms, k.pan, cfg.dam_config());

    const std::string prefix = cfg.paths.out_prefix;
    cfg.paths.dam_checkpoint = prefix + "_dam.ckpt";
    save_degradation_checkpoint(dam.net, cfg.paths.dam_checkpoint);
    write_loss_csv(prefix + "_dam_loss.csv", dam.loss_history);
    cfg.save(prefix + "_config.json");
    std::cout << "dam: final epoch loss " << format_double(dam.loss_history.back())
              << ", checkpoint " << cfg.paths.dam_checkpoint << "\n";
}

void cmd_fuse(RunConfig& cfg) {
    ImagePair pair = load_pair_from(cfg);
    const Kernels k = kernels_for(pair, cfg);
    const std::string prefix = cfg.paths.out_prefix;

    DegradationNet dam_net = [&] {
        if (!cfg.paths.dam_checkpoint.empty())
            return load_degradation_checkpoint(cfg.paths.dam_checkpoint);
        const DamResult dam = train_dam(pair, k.ms, k.pan, cfg.dam_config());
        cfg.paths.dam_checkpoint = prefix + "_dam.ckpt";
        save_degradation_checkpoint(dam.net, cfg.paths.dam_checkpoint);
        write_loss_csv(prefix + "_dam_loss.csv", dam.loss_history);
        return dam.net;
    }();
    if (dam_net.bands() != pair.ms.bands)
        throw ShapeError("degradation checkpoint band count does not match the pair");

    const RaoResult rao = run_rao(pair, dam_net, k.ms, k.pan, cfg.rao_config());
    save_fusion_checkpoint(rao.net, prefix + "_fusion.ckpt");
    rao.log.write_csv(prefix + "_trainlog.csv");

    const RasterImage fused = infer(rao.net, pair);
    cfg.paths.fused = prefix + "_fused.pfs";
    save_pfs(fused, cfg.paths.fused);
    save_sidecar(make_sidecar(pair.ratio, pair.ms_nyquist_gains, "fused"), cfg.paths.fused);
    cfg.save(prefix + "_config.json");
    std::cout << "fuse: wrote " << cfg.paths.fused << " and " << prefix
              << "_trainlog.csv\n";
}

void cmd_eval(RunConfig& cfg, bool emit_json) {
    ImagePair pair = load_pair_from(cfg);
    const Kernels k = kernels_for(pair, cfg);
    const RasterImage fused = load_pfs(cfg.paths.fused);

    std::optional<RasterImage> truth;
    if (!cfg.paths.truth.empty()) truth = load_pfs(cfg.paths.truth);

    const QualityReport report = evaluate(fused, pair, k.ms, k.pan, cfg.q_window,
                                          truth ? &*truth : nullptr);
    const std::string prefix = cfg.paths.out_prefix;
    write_report_csv(prefix + "_report.csv", report);
    if (emit_json) write_report_json(prefix + "_report.json", report);
    cfg.save(prefix + "_config.json");
    std::cout << "eval: d_lambda " << format_double(report.d_lambda) << " d_s "
              << format_double(report.d_s) << " hqnr " << format_double(report.hqnr)
              << "\n";
}

// ---------------------------------------------------------------------------
// Ablation harness

struct AblateCell {
    std::size_t index = 0;
    std::string value_label;
    RunConfig config;
};

std::vector<AblateCell> build_cells(const RunConfig& base, const std::string& axis,
                                    const std::vector<std::string>& values) {
    std::vector<AblateCell> cells;
    for (std::size_t i = 0; i < values.size(); ++i) {
        AblateCell cell;
        cell.index = i;
        cell.value_label = values[i];
        cell.config = base;  // differs from the base only on the swept axis
        RaoConfig& r = cell.config.rao;
        if (axis == "warmup_strategy") {
            r.warmup_strategy = warmup_strategy_from_string(values[i]);
        } else if (axis == "training_order") {
            r.training_order = training_order_from_string(values[i]);
        } else if (axis == "sampling_strategy") {
            r.sampling_strategy = sampling_strategy_from_string(values[i]);
        } else if (axis == "p") {
            r.full_prob = std::stod(values[i]);
        } else if (axis == "m") {
            r.warmup_epochs = std::stoi(values[i]);
        } else {
            throw DomainError("unknown ablation axis '" + axis + "'");
        }
        cell.config.rao.validate();
        cells.push_back(std::move(cell));
    }
    return cells;
}

struct CellResult {
    QualityReport report;
    std::optional<double> final_reduced_loss;
    std::optional<double> final_total_full_loss;
};

void cmd_ablate(RunConfig& cfg, const std::string& axis,
                const std::vector<std::string>& values, int jobs) {
    ImagePair pair = load_pair_from(cfg);
    const Kernels k = kernels_for(pair, cfg);
    const std::string prefix = cfg.paths.out_prefix;

    DegradationNet dam_net = [&] {
        if (!cfg.paths.dam_checkpoint.empty())
            return load_degradation_checkpoint(cfg.paths.dam_checkpoint);
        const DamResult dam = train_dam(pair, k.ms, k.pan, cfg.dam_config());
        return dam.net;
    }();

    std::optional<RasterImage> truth;
    if (!cfg.paths.truth.empty()) truth = load_pfs(cfg.paths.truth);

    std::vector<AblateCell> cells = build_cells(cfg, axis, values);
    std::vector<CellResult> results(cells.size());
    std::vector<std::exception_ptr> failures(cells.size());
    std::atomic<std::size_t> next{0};

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t workers =
        std::min<std::size_t>(cells.size(), jobs > 0 ? static_cast<std::size_t>(jobs) : hw);

    auto run_cell = [&](std::size_t idx) {
        const AblateCell& cell = cells[idx];
        const RaoResult rao = run_rao(pair, dam_net, k.ms, k.pan, cell.config.rao_config());
        const RasterImage fused = infer(rao.net, pair);
        CellResult res;
        res.report = evaluate(fused, pair, k.ms, k.pan, cell.config.q_window,
                              truth ? &*truth : nullptr);
        for (auto it = rao.log.epochs.rbegin(); it != rao.log.epochs.rend(); ++it) {
            if (!res.final_reduced_loss && it->reduced_loss)
                res.final_reduced_loss = it->reduced_loss;
            if (!res.final_total_full_loss && it->total_full_loss)
                res.final_total_full_loss = it->total_full_loss;
            if (res.final_reduced_loss && res.final_total_full_loss) break;
        }
        const std::string cell_prefix = prefix + "_cell" + std::to_string(idx);
        rao.log.write_csv(cell_prefix + "_trainlog.csv");
        cell.config.save(cell_prefix + "_config.json");
        results[idx] = std::move(res);
    };

    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t idx = next.fetch_add(1);
                if (idx >= cells.size()) return;
                try {
                    run_cell(idx);
                } catch (...) {
                    failures[idx] = std::current_exception();
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();
    for (const auto& f : failures)
        if (f) std::rethrow_exception(f);

    // Rows ordered by cell index, not completion time.
    const std::string csv_path = prefix + "_ablate.csv";
    std::ofstream out(csv_path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + csv_path + " for writing");
    out << "cell,axis,value,d_lambda,d_s,hqnr,sam_degrees,ergas,psnr_db,"
           "final_reduced_loss,final_total_full_loss\n";
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const CellResult& r = results[i];
        out << i << ',' << axis << ',' << cells[i].value_label << ','
            << format_double(r.report.d_lambda) << ',' << format_double(r.report.d_s)
            << ',' << format_double(r.report.hqnr) << ','
            << format_optional(r.report.sam_degrees) << ','
            << format_optional(r.report.ergas) << ','
            << format_optional(r.report.psnr_db) << ','
            << format_optional(r.final_reduced_loss) << ','
            << format_optional(r.final_total_full_loss) << "\n";
    }
    if (!out) throw IoError("write failed for " + csv_path);
    cfg.save(prefix + "_config.json");
    std::cout << "ablate: wrote " << csv_path << " (" << cells.size() << " cells)\n";
}

// ---------------------------------------------------------------------------
// Report

void cmd_report(RunConfig& cfg, const std::vector<std::string>& trainlogs,
                const std::string& ablate_csv) {
    const std::string prefix = cfg.paths.out_prefix;
    std::vector<TrainLogSummary> summaries;
    for (const std::string& path : trainlogs) {
        const TrainLog log = TrainLog::read_csv(path);
        const std::string label = std::filesystem::path(path).stem().string();
        summaries.push_back(summarize_trainlog(label, log));
        write_loss_curves_svg(log, prefix + "_losses_" + label + ".svg");
    }
    if (!summaries.empty()) write_summary_csv(prefix + "_summary.csv", summaries);

    if (!ablate_csv.empty()) {
        std::ifstream in(ablate_csv);
        if (!in) throw IoError("cannot open " + ablate_csv);
        std::string line;
        if (!std::getline(in, line)) throw FormatError("empty ablate csv " + ablate_csv);
        const auto header = split_list(line);
        const auto col = [&](const std::string& name) {
            for (std::size_t i = 0; i < header.size(); ++i)
                if (header[i] == name) return i;
            throw FormatError("column '" + name + "' missing from " + ablate_csv);
        };
        const std::size_t value_col = col("value");
        const std::size_t hqnr_col = col("hqnr");
        const std::size_t axis_col = col("axis");

        ChartSeries series{"hqnr", {}};
        std::string axis = "value";
        std::size_t row_idx = 0;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto fields = split_list(line);
            if (fields.size() != header.size())
                throw FormatError("bad ablate row in " + ablate_csv);
            axis = fields[axis_col];
            double x;
            try {
                x = std::stod(fields[value_col]);
            } catch (...) {
                x = static_cast<double>(row_idx);  // categorical axis
            }
            series.points.emplace_back(x, std::stod(fields[hqnr_col]));
            ++row_idx;
        }
        write_line_chart_svg(prefix + "_hqnr_vs_" + axis + ".svg",
                             "HQNR vs " + axis, axis, "hqnr", {series});
    }
    cfg.save(prefix + "_config.json");
    std::cout << "report: wrote outputs with prefix " << prefix << "\n";
}

// ---------------------------------------------------------------------------
// Argument wiring

struct CommonFlags {
    std::string config_path;
    std::uint64_t seed = 0;
    CLI::Option* seed_opt = nullptr;
    std::string out_prefix;
    std::string ms, pan, hrms, truth, fused, dam_ckpt;
};

void add_io_flags(CLI::App* sub, CommonFlags& f, bool need_prefix = true) {
    sub->add_option("--config", f.config_path, "JSON run configuration");
    f.seed_opt = sub->add_option("--seed", f.seed, "Override the run seed");
    if (need_prefix)
        sub->add_option("--out-prefix", f.out_prefix, "Prefix for output files");
}

/// Seed precedence: config < TRAPAN_SEED < --seed flag.
RunConfig resolve_config(const CommonFlags& f) {
    RunConfig cfg;
    if (!f.config_path.empty()) cfg = RunConfig::load(f.config_path);
    if (const char* env = std::getenv("TRAPAN_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end == env || *end != '\0')
            throw DomainError("TRAPAN_SEED is not an unsigned integer");
        cfg.seed = v;
    }
    if (f.seed_opt != nullptr && f.seed_opt->count() > 0) cfg.seed = f.seed;
    if (!f.out_prefix.empty()) cfg.paths.out_prefix = f.out_prefix;
    if (!f.ms.empty()) cfg.paths.ms = f.ms;
    if (!f.pan.empty()) cfg.paths.pan = f.pan;
    if (!f.hrms.empty()) cfg.paths.hrms = f.hrms;
    if (!f.truth.empty()) cfg.paths.truth = f.truth;
    if (!f.fused.empty()) cfg.paths.fused = f.fused;
    if (!f.dam_ckpt.empty()) cfg.paths.dam_checkpoint = f.dam_ckpt;
    return cfg;
}

void require_paths(
    std::initializer_list<std::pair<const char*, const std::string*>> req) {
    for (const auto& [name, value] : req)
        if (value->empty())
            throw DomainError(std::string{"missing required path: "} + name);
}

int guarded(const std::function<void()>& fn) {
    try {
        fn();
        return 0;
    } catch (const NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const FormatError& e) {
        std::cerr << "format error: " << e.what() << "\n";
        return 2;
    } catch (const CorruptError& e) {
        std::cerr << "corrupt data: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 2;
    } catch (const ShapeError& e) {
        std::cerr << "shape error: " << e.what() << "\n";
        return 2;
    } catch (const RangeError& e) {
        std::cerr << "range error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace

int run_command(int argc, const char* const* argv) {
    CLI::App app{"One-shot MS/PAN fusion toolkit"};
    app.require_subcommand(1);

    CommonFlags synth_f, degrade_f, dam_f, fuse_f, eval_f, ablate_f, report_f;

    auto* synth = app.add_subcommand("synth", "Generate a ground-truthed synthetic scene");
    add_io_flags(synth, synth_f);
    std::uint64_t synth_h = 0, synth_w = 0, synth_c = 0;
    auto* synth_h_opt = synth->add_option("--height", synth_h, "Scene height (PAN grid)");
    auto* synth_w_opt = synth->add_option("--width", synth_w, "Scene width (PAN grid)");
    auto* synth_c_opt = synth->add_option("--bands", synth_c, "MS band count");
    std::string synth_mix;
    auto* synth_mix_opt =
        synth->add_option("--mixing", synth_mix, "Comma-separated PAN mixing weights");

    auto* degrade = app.add_subcommand("degrade", "Produce reduced-resolution observations");
    add_io_flags(degrade, degrade_f);
    degrade->add_option("--ms", degrade_f.ms, "MS image (PFS)");
    degrade->add_option("--pan", degrade_f.pan, "PAN image (PFS)");
    degrade->add_option("--hrms", degrade_f.hrms, "High-resolution MS image (PFS)");

    auto* dam = app.add_subcommand("dam", "Train the spectral degradation model");
    add_io_flags(dam, dam_f);
    dam->add_option("--ms", dam_f.ms, "MS image (PFS)");
    dam->add_option("--pan", dam_f.pan, "PAN image (PFS)");

    auto* fuse = app.add_subcommand("fuse", "One-shot training and fusion of a pair");
    add_io_flags(fuse, fuse_f);
    fuse->add_option("--ms", fuse_f.ms, "MS image (PFS)");
    fuse->add_option("--pan", fuse_f.pan, "PAN image (PFS)");
    fuse->add_option("--dam", fuse_f.dam_ckpt, "Reuse a degradation checkpoint");

    auto* eval = app.add_subcommand("eval", "Quality metrics for a fused image");
    add_io_flags(eval, eval_f);
    eval->add_option("--fused", eval_f.fused, "Fused image (PFS)");
    eval->add_option("--ms", eval_f.ms, "MS image (PFS)");
    eval->add_option("--pan", eval_f.pan, "PAN image (PFS)");
    eval->add_option("--truth", eval_f.truth, "Ground-truth HRMS (PFS)");
    bool eval_json = false;
    eval->add_flag("--json", eval_json, "Also emit the report as JSON");

    auto* ablate = app.add_subcommand("ablate", "Sweep one axis of the training recipe");
    add_io_flags(ablate, ablate_f);
    ablate->add_option("--ms", ablate_f.ms, "MS image (PFS)");
    ablate->add_option("--pan", ablate_f.pan, "PAN image (PFS)");
    ablate->add_option("--truth", ablate_f.truth, "Ground-truth HRMS (PFS)");
    ablate->add_option("--dam", ablate_f.dam_ckpt, "Reuse a degradation checkpoint");
    std::string ablate_axis, ablate_values;
    ablate->add_option("--axis", ablate_axis,
                       "One of: warmup_strategy, training_order, sampling_strategy, p, m")
        ->required();
    ablate->add_option("--values", ablate_values, "Comma-separated cell values")->required();
    int ablate_jobs = 0;
    ablate->add_option("--jobs", ablate_jobs, "Worker threads (default: hardware)");

    auto* report = app.add_subcommand("report", "Curves and summaries from run outputs");
    add_io_flags(report, report_f);
    std::vector<std::string> report_logs;
    report->add_option("--trainlog", report_logs, "Training log CSV (repeatable)");
    std::string report_ablate;
    report->add_option("--ablate", report_ablate, "Ablation CSV to chart");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    // Config phase: resolve and validate everything up front so bad
    // configurations exit with the usage code before touching data.
    RunConfig cfg;
    std::vector<std::string> ablate_value_list;
    try {
        if (app.got_subcommand(synth)) {
            cfg = resolve_config(synth_f);
            if (synth_h_opt->count() > 0) cfg.synth_height = synth_h;
            if (synth_w_opt->count() > 0) cfg.synth_width = synth_w;
            if (synth_c_opt->count() > 0) cfg.synth_bands = synth_c;
            if (synth_mix_opt->count() > 0) {
                std::vector<double> weights;
                for (const std::string& tok : split_list(synth_mix))
                    weights.push_back(std::stod(tok));
                cfg.mixing_weights = weights;
            }
            require_paths({{"--out-prefix", &cfg.paths.out_prefix}});
        } else if (app.got_subcommand(degrade)) {
            cfg = resolve_config(degrade_f);
            require_paths({{"--out-prefix", &cfg.paths.out_prefix}});
            const bool have_pair = !cfg.paths.ms.empty() && !cfg.paths.pan.empty();
            if (cfg.paths.hrms.empty() && !have_pair)
                throw DomainError("degrade needs --hrms or both --ms and --pan");
        } else if (app.got_subcommand(dam)) {
            cfg = resolve_config(dam_f);
            require_paths({{"--out-prefix", &cfg.paths.out_prefix},
                                {"--ms", &cfg.paths.ms},
                                {"--pan", &cfg.paths.pan}});
        } else if (app.got_subcommand(fuse)) {
            cfg = resolve_config(fuse_f);
            require_paths({{"--out-prefix", &cfg.paths.out_prefix},
                                {"--ms", &cfg.paths.ms},
                                {"--pan", &cfg.paths.pan}});
        } else if (app.got_subcommand(eval)) {
            cfg = resolve_config(eval_f);
            require_paths({{"--out-prefix", &cfg.paths.out_prefix},
                                {"--ms", &cfg.paths.ms},
                                {"--pan", &cfg.paths.pan},
                                {"--fused", &cfg.paths.fused}});
        } else if (app.got_subcommand(ablate)) {
            cfg = resolve_config(ablate_f);
            require_paths({{"--out-prefix", &cfg.paths.out_prefix},
                                {"--ms", &cfg.paths.ms},
                                {"--pan", &cfg.paths.pan}});
            ablate_value_list = split_list(ablate_values);
            if (ablate_value_list.empty() ||
                (ablate_value_list.size() == 1 && ablate_value_list[0].empty()))
                throw DomainError("--values must list at least one cell");
            build_cells(cfg, ablate_axis, ablate_value_list);  // validate axis/values
        } else if (app.got_subcommand(report)) {
            cfg = resolve_config(report_f);
            require_paths({{"--out-prefix", &cfg.paths.out_prefix}});
            if (report_logs.empty() && report_ablate.empty())
                throw DomainError("report needs --trainlog and/or --ablate inputs");
        }
    } catch (const std::invalid_argument&) {
        std::cerr << "config error: malformed numeric value\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }

    if (app.got_subcommand(synth)) return guarded([&] { cmd_synth(cfg); });
    if (app.got_subcommand(degrade)) return guarded([&] { cmd_degrade(cfg); });
    if (app.got_subcommand(dam)) return guarded([&] { cmd_dam(cfg); });
    if (app.got_subcommand(fuse)) return guarded([&] { cmd_fuse(cfg); });
    if (app.got_subcommand(eval)) return guarded([&] { cmd_eval(cfg, eval_json); });
    if (app.got_subcommand(ablate))
        return guarded([&] { cmd_ablate(cfg, ablate_axis, ablate_value_list, ablate_jobs); });
    if (app.got_subcommand(report))
        return guarded([&] { cmd_report(cfg, report_logs, report_ablate); });
    return 1;
}

int run_command(const std::vector<std::string>& args) {
    std::vector<std::string> argv_storage;
    argv_storage.reserve(args.size() + 1);
    argv_storage.push_back("trapan");
    for (const std::string& a : args) argv_storage.push_back(a);
    std::vector<const char*> argv;
    argv.reserve(argv_storage.size());
    for (const std::string& s : argv_storage) argv.push_back(s.c_str());
    return run_command(static_cast<int>(argv.size()), argv.data());
}

}  // namespace trapan
