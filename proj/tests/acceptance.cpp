// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
//   acceptance [--quick] [--threads N]
// --quick skips the full-scale training runs (criteria 2 and 3 then use the
// desk-scale variant only) and is meant for local iteration, not for sign-off.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "gradient_check.hpp"
#include "oracles.hpp"
#include "wctlab/io.hpp"
#include "wctlab/pipeline.hpp"

using namespace wct;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void require(bool ok, const std::string& what) {
        pass = pass && ok;
        notes.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string pct(double v) { return fmt("%.2f%%", 100.0 * v); }

struct Options {
    bool quick = false;
    int threads = 0;
};

struct Context {
    Options opt;
    fs::path dir;
    // Kept from earlier criteria so later ones can reuse them.
    std::string desk_dataset_checksum;
    std::string desk_model_checksum;
};

LabConfig reference_lab(std::uint64_t seed, int slots = 500) {
    LabConfig lc;
    lc.sim = reference_config();
    lc.sim.n_slots_per_snr = slots;
    lc.seed = seed;
    return lc;
}

Dataset with_scheme(Dataset ds, LabelScheme scheme) {
    ds.info.scheme = scheme;
    attach_labels(ds);
    return ds;
}

struct RunResult {
    EvalReport report;
    double train_seconds = 0.0;
    Checkpoint checkpoint;
};

RunResult train_and_evaluate(const Dataset& ds, std::uint64_t seed) {
    TrainConfig cfg;
    cfg.init_seed = seed;
    cfg.metrics_every = cfg.epochs;
    const auto t0 = Clock::now();
    FitResult fr = fit(ds, cfg);
    RunResult r;
    r.train_seconds = seconds_since(t0);
    r.report = evaluate(fr.checkpoint, ds);
    r.checkpoint = std::move(fr.checkpoint);
    return r;
}

// 1. Dimensions of the full reference dataset and generation time.
Outcome dimensions(Context& ctx) {
    Outcome o;
    const auto t0 = Clock::now();
    const Dataset single = generate_dataset(reference_lab(1), resolve_threads(ctx.opt.threads));
    const double gen = seconds_since(t0);
    const Dataset multi = with_scheme(single, LabelScheme::kMultiTask);
    const auto& sp = single.split;
    o.require(sp.train.rows() == 768 && sp.train.cols() + sp.infer.cols() == 77500, "samples 768x" + std::to_string(sp.train.cols() + sp.infer.cols()));
    o.require(sp.train.rows() == 768 && sp.train.cols() == 69750, "train samples " + std::to_string(sp.train.rows()) + "x" + std::to_string(sp.train.cols()));
    o.require(sp.infer.rows() == 768 && sp.infer.cols() == 7750, "inference samples " + std::to_string(sp.infer.rows()) + "x" + std::to_string(sp.infer.cols()));
    o.require(single.train_labels.e.rows() == 5 && single.train_labels.e.cols() == 69750,
              "single-task labels " + std::to_string(single.train_labels.e.rows()) + "x" + std::to_string(single.train_labels.e.cols()));
    const auto seg = multi.train_labels.layout.segment_sizes();
    o.require(seg == std::vector<int>{3, 3, 2} && multi.train_labels.e.cols() == 69750,
              "multi-task labels " + std::to_string(seg.size() == 3 ? seg[0] : -1) + "+" + std::to_string(seg.size() == 3 ? seg[1] : -1) + "+" +
                  std::to_string(seg.size() == 3 ? seg[2] : -1) + " x " + std::to_string(multi.train_labels.e.cols()));
    o.require(multi.infer_labels.e.rows() == 8 && multi.infer_labels.e.cols() == 7750, "multi-task inference labels 8x7750");
    o.require(gen < 600.0, "generation " + fmt("%.1f s", gen) + " (< 600 s)");
    return o;
}

// 2. Single-task accuracy, full scale over three seeds and desk scale.
Outcome single_task(Context& ctx) {
    Outcome o;
    if (!ctx.opt.quick) {
        for (std::uint64_t seed : {1, 2, 3}) {
            const Dataset ds = generate_dataset(reference_lab(seed), resolve_threads(ctx.opt.threads));
            const RunResult r = train_and_evaluate(ds, seed);
            o.require(r.report.overall_accuracy() >= 0.80,
                      "full scale seed " + std::to_string(seed) + ": " + pct(r.report.overall_accuracy()) + " (>= 80%), train " + fmt("%.0f s", r.train_seconds));
        }
    } else {
        o.require(false, "full-scale runs skipped (--quick)");
    }
    for (std::uint64_t seed : {1, 2, 3}) {
        const Dataset ds = generate_dataset(reference_lab(seed, 100), resolve_threads(ctx.opt.threads));
        const RunResult r = train_and_evaluate(ds, seed);
        o.require(r.report.overall_accuracy() >= 0.75 && r.train_seconds < 300.0,
                  "desk scale seed " + std::to_string(seed) + ": " + pct(r.report.overall_accuracy()) + " (>= 75%), train " + fmt("%.0f s", r.train_seconds) + " (< 300 s)");
        if (seed == 1) {
            const fs::path dp = ctx.dir / "desk.bin";
            const fs::path mp = ctx.dir / "desk.model";
            save_dataset(ds, dp.string());
            save_checkpoint(r.checkpoint, mp.string());
            ctx.desk_dataset_checksum = io::file_checksum(dp.string());
            ctx.desk_model_checksum = io::file_checksum(mp.string());
        }
    }
    return o;
}

// 3. Multi-task per-task accuracy, full scale over three seeds and desk scale.
Outcome multi_task(Context& ctx) {
    Outcome o;
    auto check = [&](const std::string& label, const EvalReport& r) {
        for (std::size_t t = 0; t < r.tasks.size(); ++t) {
            const std::string& name = r.tasks[t].name;
            const double target = name == "doppler" ? 0.95 : name == "delay_spread" ? 0.85 : 0.75;
            o.require(r.tasks[t].accuracy() >= target, label + " " + name + ": " + pct(r.tasks[t].accuracy()) + " (>= " + pct(target) + ")");
        }
    };
    for (int slots : {500, 100}) {
        if (slots == 500 && ctx.opt.quick) {
            o.require(false, "full-scale runs skipped (--quick)");
            continue;
        }
        for (std::uint64_t seed : {1, 2, 3}) {
            LabConfig lc = reference_lab(seed, slots);
            lc.scheme = LabelScheme::kMultiTask;
            const Dataset ds = generate_dataset(lc, resolve_threads(ctx.opt.threads));
            const RunResult r = train_and_evaluate(ds, seed);
            check(std::string(slots == 500 ? "full" : "desk") + " seed " + std::to_string(seed), r.report);
            if (slots == 100) o.require(r.train_seconds < 300.0, "desk seed " + std::to_string(seed) + " train " + fmt("%.0f s", r.train_seconds) + " (< 300 s)");
            o.notes.push_back("     reconstructed WCT accuracy " + pct(*r.report.reconstructed_wct_accuracy()));
        }
    }
    return o;
}

// 4. AWGN vs EVA5 high correlation.
Outcome pairwise(Context& ctx) {
    Outcome o;
    LabConfig lc = reference_lab(1);
    lc.sim.wcts = {awgn_profile(), eva_profile(5, RxCorrelation::kHigh)};
    const Dataset ds = generate_dataset(lc, resolve_threads(ctx.opt.threads));
    const RunResult r = train_and_evaluate(ds, 1);
    o.require(r.report.overall_accuracy() >= 0.99, "{AWGN, EVA5 high correlation}: " + pct(r.report.overall_accuracy()) + " (>= 99%)");
    return o;
}

// 5. Backprop against central differences, both heads.
Outcome gradients(Context&) {
    Outcome o;
    for (auto scheme : {LabelScheme::kSingleTask, LabelScheme::kMultiTask}) {
        for (auto act : {Activation::kRelu, Activation::kTanh}) {
            double worst = 0.0;
            long params = 0;
            for (std::uint64_t seed = 0; seed < 50; ++seed) {
                const auto r = testing::check_gradients(scheme, act, seed);
                worst = std::max(worst, r.max_rel_error);
                params += r.parameters;
            }
            o.require(worst < 1e-4, to_string(scheme) + " head, " + to_string(act) + ": max relative error " + fmt("%.2e", worst) + " over " +
                                        std::to_string(params) + " parameters of 50 models (< 1e-4)");
        }
    }
    return o;
}

// 6. Channel model oracles.
Outcome channel(Context&) {
    Outcome o;
    const SimConfig cfg = reference_config();

    // (a) temporal autocorrelation of an EVA5 tap against J0(2 pi 5 tau)
    const FadingProcess proc(eva_profile(5, RxCorrelation::kLow), cfg.n_rx, 2024);
    std::vector<std::complex<double>> series;
    for (int slot = 0; slot < 10000; ++slot) series.push_back(proc.gain(0, 0, slot * cfg.slot_duration_s));
    const int max_lag = 40;
    const auto r = oracle::autocorrelation(series, max_lag);
    double worst = 0.0;
    for (int lag = 0; lag <= max_lag; ++lag)
        worst = std::max(worst, std::abs(r[static_cast<std::size_t>(lag)] - oracle::bessel_j0(2.0 * M_PI * 5.0 * lag * cfg.slot_duration_s)));
    o.require(worst <= 0.05, "(a) Doppler autocorrelation max |R - J0| = " + fmt("%.4f", worst) + " (<= 0.05)");

    // (b) cross-antenna correlation of realized high-correlation channels
    const Eigen::Index per_rx = cfg.n_sym * cfg.n_subcarriers();
    std::complex<double> cross = 0.0;
    double p0 = 0.0, p1 = 0.0;
    for (int n = 0; n < 3000; ++n) {
        const auto h = realize_channel(eva_profile(5, RxCorrelation::kHigh), cfg, 0, static_cast<std::uint64_t>(n)).h;
        cross += (h.head(per_rx).array() * h.tail(per_rx).array().conjugate()).sum();
        p0 += h.head(per_rx).squaredNorm();
        p1 += h.tail(per_rx).squaredNorm();
    }
    const double rho = std::abs(cross) / std::sqrt(p0 * p1);
    o.require(rho >= 0.85 && rho <= 0.95, "(b) high-correlation |rho| = " + fmt("%.4f", rho) + " (in [0.85, 0.95])");

    // (c) noiseless descrambling
    const SrsSequence seq = gen_srs(cfg);
    bool exact = true;
    for (const auto& p : make_standard_profiles())
        for (int slot = 0; slot < 20; ++slot) {
            const auto h = realize_channel(p, cfg, slot, 9);
            exact = exact && transmit_descramble(seq, h, kNoiselessSnrDb, 1).s == h.h;
        }
    o.require(exact, "(c) noiseless descrambling returns the channel exactly");

    // (d) SNR calibration on every grid point
    const auto flat = realize_channel(awgn_profile(), cfg, 0, 0);
    double worst_db = 0.0;
    for (double snr : cfg.snr_grid_db) {
        double noise = 0.0, signal = 0.0;
        for (std::uint64_t n = 0; n < 300; ++n) {
            const auto s = transmit_descramble(seq, flat, snr, derive_seed(77, {static_cast<std::uint64_t>(snr), n}));
            noise += (s.s - flat.h).squaredNorm();
            signal += flat.h.squaredNorm();
        }
        worst_db = std::max(worst_db, std::abs(10.0 * std::log10(signal / noise) - snr));
    }
    o.require(worst_db <= 0.2, "(d) SNR calibration max error " + fmt("%.3f dB", worst_db) + " (<= 0.2 dB)");
    return o;
}

// 7. Labeling oracles.
Outcome labeling(Context&) {
    Outcome o;
    const std::vector<ChannelProfile> set{awgn_profile(), epa_profile(5, RxCorrelation::kLow), epa_profile(5, RxCorrelation::kHigh),
                                          eva_profile(700, RxCorrelation::kLow), eva_profile(700, RxCorrelation::kHigh)};
    const FeatureSet f = default_features(FeatureConvention::kAwgnAsLow);
    const TaskLayout layout = derive_task_layout(set, f);
    const LabelMatrix l = multi_task_labels(ColumnMetaList{{2, 0, 0}}, layout, set, f);
    std::ostringstream got;
    for (Eigen::Index i = 0; i < l.e.rows(); ++i) got << (i ? " " : "") << l.e(i, 0);
    o.require(got.str() == "0 1 0 0 1 1 0 0", "EPA5 high correlation encodes as [" + got.str() + "] (expected [0 1 0 0 1 1 0 0])");

    bool round_trip = true;
    int checked = 0;
    for (auto convention : {FeatureConvention::kDistinctNone, FeatureConvention::kAwgnAsLow}) {
        for (const auto& profiles : {make_standard_profiles(), set}) {
            const FeatureSet fs = default_features(convention);
            const TaskLayout lay = derive_task_layout(profiles, fs);
            for (std::size_t i = 0; i < profiles.size(); ++i) {
                const auto m = label_to_wct(feature_tuple(profiles[i], lay, fs), profiles, lay, fs);
                round_trip = round_trip && m.wct == static_cast<int>(i);
                ++checked;
            }
        }
    }
    o.require(round_trip, "label_to_wct round-trips " + std::to_string(checked) + " configured profiles");
    const LabelMatrix single = single_task_labels(ColumnMetaList{{1, 0, 0}}, make_standard_profiles());
    o.require(single.e.col(0) == (Eigen::VectorXf(5) << 0, 1, 0, 0, 0).finished(), "single-task EPA5 low correlation is [0 1 0 0 0]");
    return o;
}

// 8. Determinism and persistence.
Outcome determinism(Context& ctx) {
    Outcome o;
    // End-to-end desk run again; criterion 2 saved the first one.
    const Dataset ds = generate_dataset(reference_lab(1, 100), 1);
    const fs::path dp = ctx.dir / "desk_again.bin";
    save_dataset(ds, dp.string());
    const std::string dsum = io::file_checksum(dp.string());
    if (ctx.desk_dataset_checksum.empty()) {
        o.require(false, "criterion 2 did not produce a reference desk dataset");
        return o;
    }
    o.require(dsum == ctx.desk_dataset_checksum, "dataset checksum " + dsum + " matches the earlier run (" + ctx.desk_dataset_checksum + ", different thread count)");
    const RunResult r = train_and_evaluate(ds, 1);
    const fs::path mp = ctx.dir / "desk_again.model";
    save_checkpoint(r.checkpoint, mp.string());
    const std::string msum = io::file_checksum(mp.string());
    o.require(msum == ctx.desk_model_checksum, "checkpoint checksum " + msum + " matches the earlier run (" + ctx.desk_model_checksum + ")");

    const Dataset back = load_dataset(dp.string());
    o.require(back.split.train == ds.split.train && back.split.infer == ds.split.infer && back.train_labels.e == ds.train_labels.e &&
                  back.infer_labels.e == ds.infer_labels.e && back.split.train_meta == ds.split.train_meta,
              "dataset file round trip is bit exact");
    const Checkpoint ck = load_checkpoint(mp.string());
    bool same = ck.model.layer_dims == r.checkpoint.model.layer_dims && ck.model.input_mean == r.checkpoint.model.input_mean &&
                ck.model.input_scale == r.checkpoint.model.input_scale;
    for (std::size_t l = 0; l < ck.model.weights.size(); ++l)
        same = same && ck.model.weights[l] == r.checkpoint.model.weights[l] && ck.model.biases[l] == r.checkpoint.model.biases[l];
    o.require(same, "checkpoint file round trip is bit exact");
    const fs::path dp2 = ctx.dir / "desk_resaved.bin";
    save_dataset(back, dp2.string());
    o.require(io::file_checksum(dp2.string()) == dsum, "re-saving a loaded dataset reproduces the file");
    return o;
}

} // namespace

int main(int argc, char** argv) {
    Context ctx;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--quick") == 0) ctx.opt.quick = true;
        else if (std::strcmp(argv[i], "--threads") == 0 && i + 1 < argc) ctx.opt.threads = std::atoi(argv[++i]);
        else {
            std::cerr << "usage: acceptance [--quick] [--threads N]\n";
            return 2;
        }
    }
    ctx.dir = fs::temp_directory_path() / ("wctlab_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(ctx.dir);

    const std::vector<std::pair<std::string, std::function<Outcome(Context&)>>> criteria{
        {"1 dimensional fidelity", dimensions},
        {"2 single-task accuracy", single_task},
        {"3 multi-task accuracy", multi_task},
        {"4 pairwise separability", pairwise},
        {"5 gradient oracle", gradients},
        {"6 channel-model oracles", channel},
        {"7 labeling oracles", labeling},
        {"8 determinism and persistence", determinism},
    };
    std::vector<std::string> summary;
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = fn(ctx);
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        const std::string line = std::string(o.pass ? "PASS" : "FAIL") + "  criterion " + name + fmt("  [%.0f s]", seconds_since(t0));
        std::cout << line << "\n";
        for (const auto& n : o.notes) std::cout << "      " << n << "\n";
        std::cout.flush();
        summary.push_back(line);
        failed += o.pass ? 0 : 1;
    }
    std::error_code ec;
    fs::remove_all(ctx.dir, ec);
    std::cout << "\nsummary\n";
    for (const auto& s : summary) std::cout << s << "\n";
    std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << "\n";
    return failed ? 1 : 0;
}
