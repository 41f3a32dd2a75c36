// Acceptance suite: one test case per criterion, each printing one
// [PASS]/[FAIL] line so the run log reads as a checklist. Criteria are
// asserted at their stated tolerances.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "test_util.hpp"
#include "trapan/cli.hpp"
#include "trapan/dam.hpp"
#include "trapan/metrics.hpp"
#include "trapan/nn.hpp"
#include "trapan/rao.hpp"
#include "trapan/scene.hpp"

using namespace trapan;
using test::TempDir;

namespace {

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

void report_line(int criterion, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion,
                detail.c_str());
    std::fflush(stdout);
}

struct PrintedRow {
    const char* method;
    const char* dataset;
    double d_lambda;
    double d_s;
    double hqnr_printed;
};

// Full-resolution comparison table, 10 methods x 3 datasets.
const PrintedRow kMainTable[] = {
    {"TV", "WV3", 0.024, 0.039, 0.938},
    {"TV", "QB", 0.055, 0.100, 0.850},
    {"TV", "GF2", 0.055, 0.112, 0.839},
    {"MTF-GLP-FS", "WV3", 0.020, 0.063, 0.918},
    {"MTF-GLP-FS", "QB", 0.047, 0.150, 0.810},
    {"MTF-GLP-FS", "GF2", 0.035, 0.143, 0.828},
    {"BDSD-PC", "WV3", 0.063, 0.073, 0.869},
    {"BDSD-PC", "QB", 0.198, 0.164, 0.672},
    {"BDSD-PC", "GF2", 0.076, 0.155, 0.781},
    {"FusionNet", "WV3", 0.025, 0.044, 0.932},
    {"FusionNet", "QB", 0.057, 0.052, 0.894},
    {"FusionNet", "GF2", 0.035, 0.101, 0.867},
    {"LAGNet", "WV3", 0.036, 0.041, 0.925},
    {"LAGNet", "QB", 0.086, 0.068, 0.852},
    {"LAGNet", "GF2", 0.028, 0.079, 0.895},
    {"LGPNet", "WV3", 0.022, 0.039, 0.940},
    {"LGPNet", "QB", 0.074, 0.061, 0.870},
    {"LGPNet", "GF2", 0.030, 0.080, 0.892},
    {"CANNet", "WV3", 0.020, 0.029, 0.951},
    {"CANNet", "QB", 0.038, 0.047, 0.917},
    {"CANNet", "GF2", 0.019, 0.063, 0.919},
    {"ZS-Pan", "WV3", 0.026, 0.031, 0.945},
    {"ZS-Pan", "QB", 0.053, 0.082, 0.870},
    {"ZS-Pan", "GF2", 0.054, 0.100, 0.852},
    {"PanMamba", "WV3", 0.020, 0.031, 0.954},
    {"PanMamba", "QB", 0.049, 0.044, 0.910},
    {"PanMamba", "GF2", 0.023, 0.057, 0.921},
    {"Proposed", "WV3", 0.019, 0.015, 0.966},
    {"Proposed", "QB", 0.045, 0.033, 0.924},
    {"Proposed", "GF2", 0.031, 0.040, 0.930},
};

// Ablation tables (warm-up strategy, training order, sampling strategy),
// all on WV3 at four decimals.
const PrintedRow kAblationTables[] = {
    {"w Full", "WV3", 0.0193, 0.0154, 0.9657},
    {"w Reduced", "WV3", 0.0286, 0.0252, 0.9469},
    {"w/o Warmup", "WV3", 0.0266, 0.0263, 0.9478},
    {"Alternating", "WV3", 0.0193, 0.0154, 0.9657},
    {"Full/Reduced", "WV3", 0.0316, 0.0323, 0.9372},
    {"Reduced/Full", "WV3", 0.0234, 0.0393, 0.9384},
    {"Always Reduced", "WV3", 0.0193, 0.0154, 0.9657},
    {"Always Full", "WV3", 0.0248, 0.0326, 0.9435},
    {"Random", "WV3", 0.0256, 0.0261, 0.9491},
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

TEST_CASE("criterion 1: printed hybrid-quality rows reproduce arithmetically") {
    Stopwatch watch;
    const double tolerance = 0.0015;
    int checked = 0;
    int failed = 0;
    auto check_row = [&](const PrintedRow& row) {
        const double computed = hqnr(row.d_lambda, row.d_s);
        const double diff = std::fabs(computed - row.hqnr_printed);
        ++checked;
        if (diff > tolerance) {
            ++failed;
            std::printf("  row %s/%s: (1-%g)(1-%g) = %.6f vs printed %.4g, |diff| = %.6f\n",
                        row.method, row.dataset, row.d_lambda, row.d_s, computed,
                        row.hqnr_printed, diff);
        }
        CHECK(diff <= tolerance);
    };
    for (const PrintedRow& row : kMainTable) check_row(row);
    for (const PrintedRow& row : kAblationTables) check_row(row);

    const double elapsed = watch.seconds();
    const bool pass = failed == 0 && elapsed < 1.0;
    report_line(1, pass,
                std::to_string(checked - failed) + "/" + std::to_string(checked) +
                    " rows within 0.0015 in " + fmt(elapsed) + " s");
    CHECK(elapsed < 1.0);
}

TEST_CASE("criterion 2: analytic gradients match finite differences at 1e-4") {
    Stopwatch watch;
    bool all_pass = true;

    {
        Rng rng(101);
        DegradationNet net(4);
        net.randomize_all(rng);
        const RasterImage input = test::random_image(rng, 2, 4, 4);  // 8 pixels
        const RasterImage target = test::random_image(rng, 2, 4, 1);
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
        const auto report = grad_check(std::span<DiffParam* const>(params), loss_fn,
                                       1e-5, 1e-4);
        std::printf("  degradation net: %zu params, max rel err %.3g\n",
                    report.param_count, report.max_rel_error);
        CHECK(report.pass);
        all_pass = all_pass && report.pass;
    }

    {
        // every backbone layer type on 8x8 inputs: head conv + relu,
        // residual block with skip, tail conv, mirror padding, bicubic base
        Rng rng(102);
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
        const auto report = grad_check(std::span<DiffParam* const>(params), loss_fn,
                                       1e-5, 1e-4);
        std::printf("  fusion backbone: %zu params, max rel err %.3g\n",
                    report.param_count, report.max_rel_error);
        CHECK(report.pass);
        all_pass = all_pass && report.pass;
    }

    const double elapsed = watch.seconds();
    report_line(2, all_pass && elapsed < 30.0,
                "finite-difference checks at 1e-4 in " + fmt(elapsed) + " s");
    CHECK(elapsed < 30.0);
}

TEST_CASE("criterion 3: kernel response at Nyquist matches the gain") {
    Stopwatch watch;
    bool pass = true;
    for (double gain : {0.15, 0.29, 0.5}) {
        const MtfKernel k = build_mtf_kernel(gain, 4, 41);
        const double response = kernel_response(k, 1.0 / 8.0);
        double sum = 0.0;
        for (double t : k.taps) sum += t;
        std::printf("  gain %.2f: response %.6f (err %.2e), tap sum err %.2e\n", gain,
                    response, std::fabs(response - gain), std::fabs(sum - 1.0));
        CHECK(std::fabs(response - gain) < 1e-3);
        CHECK(std::fabs(sum - 1.0) < 1e-9);
        pass = pass && std::fabs(response - gain) < 1e-3 && std::fabs(sum - 1.0) < 1e-9;
    }
    const double elapsed = watch.seconds();
    report_line(3, pass && elapsed < 1.0,
                "spectrum within 1e-3, taps normalized, in " + fmt(elapsed) + " s");
    CHECK(elapsed < 1.0);
}

TEST_CASE("criterion 4: stage-1 training fits the synthetic spectral map") {
    Stopwatch watch;
    const SyntheticScene scene = synth_scene(1, 64, 64, 4);
    const auto ks = build_ms_kernels(scene.ms_nyquist_gains, scene.ratio, 41);
    const auto pk = build_mtf_kernel(scene.pan_nyquist_gain, scene.ratio, 41);
    DamConfig cfg;  // defaults: 250 epochs, batch 1, lr 5e-4
    cfg.seed = 1;
    const DamResult result = train_dam(scene.pair(), ks, pk, cfg);
    const double final_loss = result.loss_history.back();
    const double elapsed = watch.seconds();
    const bool pass = final_loss < 1e-5 && elapsed < 120.0;
    report_line(4, pass,
                "final epoch loss " + fmt(final_loss) + " in " + fmt(elapsed) + " s");
    CHECK(final_loss < 1e-5);
    CHECK(elapsed < 120.0);
}

TEST_CASE("criterion 5: scheduler statistics") {
    Stopwatch watch;
    RaoConfig cfg;
    cfg.epochs = 10020;
    cfg.warmup_epochs = 20;
    cfg.full_prob = 0.8;
    cfg.seed = 7;
    Rng rng(cfg.seed);
    const auto plans = epoch_schedule(cfg, rng);
    bool warmup_ok = true;
    for (int j = 0; j < 20; ++j)
        warmup_ok = warmup_ok && plans[j].full_ran && !plans[j].reduced_ran;
    std::size_t full_count = 0;
    bool reduced_ok = true;
    for (std::size_t j = 20; j < plans.size(); ++j) {
        reduced_ok = reduced_ok && plans[j].reduced_ran;
        if (plans[j].full_ran) ++full_count;
    }
    const double freq = static_cast<double>(full_count) / 10000.0;

    bool exact_ok = true;
    for (double p : {0.0, 1.0}) {
        RaoConfig c2;
        c2.epochs = 500;
        c2.warmup_epochs = 0;
        c2.full_prob = p;
        Rng r2(3);
        for (const EpochPlan& plan : epoch_schedule(c2, r2))
            exact_ok = exact_ok && plan.reduced_ran && plan.full_ran == (p == 1.0);
    }

    const double elapsed = watch.seconds();
    const bool pass =
        warmup_ok && reduced_ok && freq >= 0.78 && freq <= 0.82 && exact_ok && elapsed < 1.0;
    report_line(5, pass,
                "post-warm-up full frequency " + fmt(freq) + ", extremes exact, in " +
                    fmt(elapsed) + " s");
    CHECK(warmup_ok);
    CHECK(reduced_ok);
    CHECK(freq >= 0.78);
    CHECK(freq <= 0.82);
    CHECK(exact_ok);
    CHECK(elapsed < 1.0);
}

TEST_CASE("criterion 6: one-shot training beats the interpolation baseline") {
    Stopwatch watch;
    bool all_pass = true;
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        const SyntheticScene scene = synth_scene(seed, 64, 64, 4);
        const ImagePair pair = scene.pair();
        const auto ks = build_ms_kernels(scene.ms_nyquist_gains, scene.ratio, 41);
        const auto pk = build_mtf_kernel(scene.pan_nyquist_gain, scene.ratio, 41);

        DamConfig dam_cfg;
        dam_cfg.seed = seed;
        const DamResult dam = train_dam(pair, ks, pk, dam_cfg);

        RaoConfig rao_cfg;  // defaults: 250 epochs, m=20, p=0.8
        rao_cfg.seed = seed;
        const RaoResult rao = run_rao(pair, dam.net, ks, pk, rao_cfg);
        const RasterImage fused = infer(rao.net, pair);
        const RasterImage baseline = upsample(pair.ms, pair.ratio);

        const QualityReport fused_q = evaluate(fused, pair, ks, pk, 32, &scene.hrms);
        const QualityReport base_q = evaluate(baseline, pair, ks, pk, 32, &scene.hrms);
        const bool hqnr_ok = fused_q.hqnr >= base_q.hqnr;
        const bool sam_ok = *fused_q.sam_degrees <= *base_q.sam_degrees;
        std::printf(
            "  seed %llu: hqnr %.4f vs baseline %.4f | sam %.4f vs baseline %.4f deg\n",
            static_cast<unsigned long long>(seed), fused_q.hqnr, base_q.hqnr,
            *fused_q.sam_degrees, *base_q.sam_degrees);
        CHECK(hqnr_ok);
        CHECK(sam_ok);
        all_pass = all_pass && hqnr_ok && sam_ok;
    }
    const double elapsed = watch.seconds();
    report_line(6, all_pass && elapsed < 900.0,
                "three seeded scenes improved on both metrics in " + fmt(elapsed) + " s");
    CHECK(elapsed < 900.0);
}

TEST_CASE("criterion 7: ablation harness obeys the schedule invariants") {
    Stopwatch watch;
    TempDir tmp("acceptance_ablate");
    const std::string scene_prefix = (tmp / "scene").string();
    REQUIRE(run_command({"synth", "--seed", "21", "--height", "32", "--width", "32",
                         "--bands", "2", "--out-prefix", scene_prefix}) == 0);
    {
        std::ofstream cfg(tmp / "cfg.json");
        cfg << R"({
  "seed": 21,
  "dam": {"epochs": 10},
  "rao": {"epochs": 12, "warmup_epochs": 3, "net_width": 8, "net_blocks": 1}
})";
    }

    const std::string warm_prefix = (tmp / "warm").string();
    REQUIRE(run_command({"ablate", "--ms", scene_prefix + "_ms.pfs", "--pan",
                         scene_prefix + "_pan.pfs", "--config",
                         (tmp / "cfg.json").string(), "--axis", "warmup_strategy",
                         "--values", "full,reduced,none", "--out-prefix",
                         warm_prefix}) == 0);
    const std::string samp_prefix = (tmp / "samp").string();
    REQUIRE(run_command({"ablate", "--ms", scene_prefix + "_ms.pfs", "--pan",
                         scene_prefix + "_pan.pfs", "--config",
                         (tmp / "cfg.json").string(), "--axis", "sampling_strategy",
                         "--values", "always_reduced,always_full,random_either",
                         "--out-prefix", samp_prefix}) == 0);

    const double p = 0.8;
    const int m = 3;
    bool pass = true;
    auto check_log = [&](const std::string& path, const std::string& warmup,
                         const std::string& sampling) {
        const TrainLog log = TrainLog::read_csv(path);
        REQUIRE(log.epochs.size() == 12);
        for (const EpochRecord& r : log.epochs) {
            bool ok = true;
            if (warmup != "none" && r.epoch <= m) {
                ok = warmup == "full" ? (r.full_ran && !r.reduced_ran)
                                      : (r.reduced_ran && !r.full_ran);
            } else if (sampling == "always_reduced") {
                ok = r.reduced_ran && r.full_ran == (r.u < p);
            } else if (sampling == "always_full") {
                ok = r.full_ran && r.reduced_ran == (r.u < p);
            } else {
                ok = (r.full_ran == (r.u < p)) && (r.reduced_ran != r.full_ran);
            }
            CHECK(ok);
            pass = pass && ok;
        }
    };
    check_log(warm_prefix + "_cell0_trainlog.csv", "full", "always_reduced");
    check_log(warm_prefix + "_cell1_trainlog.csv", "reduced", "always_reduced");
    check_log(warm_prefix + "_cell2_trainlog.csv", "none", "always_reduced");
    check_log(samp_prefix + "_cell0_trainlog.csv", "full", "always_reduced");
    check_log(samp_prefix + "_cell1_trainlog.csv", "full", "always_full");
    check_log(samp_prefix + "_cell2_trainlog.csv", "full", "random_either");

    // both sweeps produced complete result tables
    for (const std::string& prefix : {warm_prefix, samp_prefix}) {
        std::ifstream in(prefix + "_ablate.csv");
        REQUIRE(in.good());
        std::string line;
        int rows = -1;  // header
        while (std::getline(in, line))
            if (!line.empty()) ++rows;
        CHECK(rows == 3);
        pass = pass && rows == 3;
    }

    const double elapsed = watch.seconds();
    report_line(7, pass, "6 cells completed, branch flags obey the schedule, in " +
                             fmt(elapsed) + " s");
}

TEST_CASE("criterion 8: fuse runs are bit-identical from the same config") {
    Stopwatch watch;
    TempDir tmp("acceptance_determinism");
    const std::string scene_prefix = (tmp / "scene").string();
    REQUIRE(run_command({"synth", "--seed", "31", "--height", "32", "--width", "32",
                         "--bands", "2", "--out-prefix", scene_prefix}) == 0);
    {
        std::ofstream cfg(tmp / "cfg.json");
        cfg << R"({
  "seed": 31,
  "dam": {"epochs": 25},
  "rao": {"epochs": 40, "warmup_epochs": 5, "lr_decay_epoch": 30,
          "net_width": 16, "net_blocks": 2}
})";
    }
    const std::string out = (tmp / "run").string();
    REQUIRE(run_command({"fuse", "--ms", scene_prefix + "_ms.pfs", "--pan",
                         scene_prefix + "_pan.pfs", "--config",
                         (tmp / "cfg.json").string(), "--out-prefix", out}) == 0);

    // snapshot all outputs, then rerun from the resolved config
    std::vector<std::pair<std::string, std::vector<unsigned char>>> snapshot;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(tmp.path()))
        if (entry.is_regular_file() &&
            entry.path().string().find("/run_") != std::string::npos)
            snapshot.emplace_back(entry.path().string(),
                                  test::read_file_bytes(entry.path()));
    REQUIRE(!snapshot.empty());

    REQUIRE(run_command({"fuse", "--config", out + "_config.json"}) == 0);

    bool pass = true;
    for (const auto& [path, bytes] : snapshot) {
        const bool same = test::read_file_bytes(path) == bytes;
        if (!same) std::printf("  differs after rerun: %s\n", path.c_str());
        CHECK(same);
        pass = pass && same;
    }
    const double elapsed = watch.seconds();
    report_line(8, pass,
                std::to_string(snapshot.size()) +
                    " output files bit-identical across reruns, in " + fmt(elapsed) +
                    " s");
}
