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

// wctlab: dataset generation, training, evaluation and inference for
// wireless channel type recognition.

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "wctlab/config.hpp"
#include "wctlab/dataset.hpp"
#include "wctlab/error.hpp"
#include "wctlab/evaluation.hpp"
#include "wctlab/io.hpp"
#include "wctlab/labeling.hpp"
#include "wctlab/mlp.hpp"
#include "wctlab/pipeline.hpp"

namespace {

using namespace wct;

enum ExitCode { kOk = 0, kUsage = 2, kData = 3, kDiverged = 4 };

struct GenerateArgs {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> mode;
    std::optional<std::string> scheme;
    int threads = 0;
};

struct TrainArgs {
    std::string data;
    std::string out;
    std::optional<std::string> scheme;
    std::optional<int> epochs;
    std::optional<double> lr;
    std::optional<int> batch;
    std::vector<int> hidden;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> optimizer;
    std::string history;
    bool no_standardize = false;
    bool quiet = false;
};

struct EvalArgs {
    std::string model;
    std::string data;
    std::string csv;
};

struct InferArgs {
    std::string model;
    std::string input;
};

struct SampleArgs {
    std::string config;
    std::string wct;
    std::string snr = "inf";
    int count = 1;
    std::uint64_t seed = 1;
    std::string out;
};

int cmd_generate(const GenerateArgs& a) {
    LabConfig cfg = load_lab_config(a.config);
    if (a.seed) cfg.seed = *a.seed;
    if (a.mode) cfg.mode = vectorization_mode_from_string(*a.mode);
    if (a.scheme) cfg.scheme = label_scheme_from_string(*a.scheme);
    const Dataset ds = generate_dataset(cfg, resolve_threads(a.threads));
    save_dataset(ds, a.out);
    const auto& sp = ds.split;
    std::cout << "samples " << sp.train.rows() << "x" << (sp.train.cols() + sp.infer.cols()) << ", train " << sp.train.cols()
              << ", infer " << sp.infer.cols() << "\n";
    std::cout << "labels (" << to_string(ds.info.scheme) << ") " << ds.train_labels.e.rows() << "x" << ds.train_labels.e.cols()
              << " / " << ds.infer_labels.e.rows() << "x" << ds.infer_labels.e.cols();
    if (ds.info.scheme == LabelScheme::kMultiTask) {
        std::cout << ", segments";
        for (const auto& t : ds.train_labels.layout.tasks) std::cout << " " << t.feature << "=" << t.k();
    }
    std::cout << "\nchecksum " << io::file_checksum(a.out) << "\n";
    return kOk;
}

int cmd_train(const TrainArgs& a) {
    const Dataset ds = load_dataset(a.data);
    if (a.scheme && label_scheme_from_string(*a.scheme) != ds.info.scheme)
        throw ConfigError("dataset is labeled '" + to_string(ds.info.scheme) + "' but --scheme " + *a.scheme +
                          " was requested; regenerate the dataset with --scheme " + *a.scheme);
    TrainConfig tc;
    if (a.epochs) tc.epochs = *a.epochs;
    if (a.lr) tc.learning_rate = *a.lr;
    if (a.batch) tc.batch_size = *a.batch;
    if (a.seed) tc.init_seed = *a.seed;
    if (a.optimizer) tc.optimizer = optimizer_from_string(*a.optimizer);
    if (!a.hidden.empty()) {
        if (a.hidden.size() != 3) throw ConfigError("--hidden takes exactly three sizes");
        tc.hidden = {a.hidden[0], a.hidden[1], a.hidden[2]};
    }
    tc.standardize = !a.no_standardize;

    const FitResult fr = fit(ds, tc, [&](const EpochMetrics& e) {
        if (a.quiet) return;
        std::cout << "epoch " << e.epoch << " train_loss " << e.train_loss << " train_acc " << e.train_accuracy;
        if (e.has_infer) std::cout << " infer_loss " << e.infer_loss << " infer_acc " << e.infer_accuracy;
        std::cout << std::endl;
    });
    save_checkpoint(fr.checkpoint, a.out);
    const std::string history_path = a.history.empty() ? a.out + ".history.csv" : a.history;
    std::ofstream(history_path) << history_csv(fr.history);

    const auto& m = fr.checkpoint.model;
    std::cout << "model " << a.out << " dims";
    for (int d : m.layer_dims) std::cout << " " << d;
    std::cout << ", head " << to_string(m.scheme);
    for (const auto& t : m.head.tasks) std::cout << " " << t.feature << "=" << t.k();
    std::cout << "\nchecksum " << io::file_checksum(a.out) << "\n";
    return kOk;
}

int cmd_eval(const EvalArgs& a) {
    const Checkpoint ck = load_checkpoint(a.model);
    const Dataset ds = load_dataset(a.data);
    if (ck.model.input_dim() != ds.split.infer.rows())
        throw ConfigError("model input dim " + std::to_string(ck.model.input_dim()) + " does not match dataset rows " +
                          std::to_string(ds.split.infer.rows()));
    const EvalReport report = evaluate(ck, ds);
    std::cout << render_text(report);
    if (!a.csv.empty()) {
        std::ofstream out(a.csv);
        if (!out) throw FormatError("cannot write " + a.csv);
        out << render_csv(report);
    }
    return kOk;
}

int cmd_infer(const InferArgs& a) {
    const Checkpoint ck = load_checkpoint(a.model);
    std::ifstream in(a.input);
    if (!in) throw FormatError("cannot open " + a.input);
    const int expected = ck.model.input_dim();
    const FeatureSet features = default_features(ck.convention);

    std::string line;
    int lineno = 0;
    int sample = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::vector<double> values;
        std::string tok;
        while (ls >> tok) {
            try {
                values.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw FormatError("line " + std::to_string(lineno) + ": '" + tok + "' is not a number");
            }
        }
        if (static_cast<int>(values.size()) != expected)
            throw FormatError("line " + std::to_string(lineno) + ": expected " + std::to_string(expected) + " values (" +
                              std::to_string(expected / 2) + " complex samples as 're im' pairs), got " +
                              std::to_string(values.size()));
        Eigen::VectorXcd s(expected / 2);
        for (int i = 0; i < expected / 2; ++i) s[i] = {values[2 * i], values[2 * i + 1]};
        const Eigen::MatrixXf x = vectorize(s, ck.mode).cast<float>();
        const Eigen::MatrixXi pred = predict<float>(ck.model, x);

        std::cout << "sample " << sample++ << ": ";
        if (ck.model.scheme == LabelScheme::kSingleTask) {
            std::cout << ck.model.head.tasks[0].classes[static_cast<std::size_t>(pred(0, 0))] << "\n";
            continue;
        }
        std::vector<int> tuple;
        for (std::size_t t = 0; t < ck.model.head.tasks.size(); ++t) {
            const int k = pred(static_cast<Eigen::Index>(t), 0);
            tuple.push_back(k);
            std::cout << ck.model.head.tasks[t].feature << "=" << ck.model.head.tasks[t].classes[static_cast<std::size_t>(k)] << " ";
        }
        const WctMatch match = label_to_wct(tuple, ck.profiles, ck.model.head, features);
        std::cout << "-> " << (match.wct ? ck.profiles[static_cast<std::size_t>(*match.wct)].name : "unconfigured combination") << "\n";
    }
    return kOk;
}

int cmd_sample(const SampleArgs& a) {
    const LabConfig cfg = load_lab_config(a.config);
    std::uint32_t wct = 0;
    bool found = false;
    for (std::size_t i = 0; i < cfg.sim.wcts.size(); ++i) {
        if (cfg.sim.wcts[i].name == a.wct) {
            wct = static_cast<std::uint32_t>(i);
            found = true;
        }
    }
    if (!found) throw ConfigError("channel type '" + a.wct + "' is not in the config");
    SimConfig sim = cfg.sim;
    sim.snr_grid_db = {a.snr == "inf" ? kNoiselessSnrDb : std::stod(a.snr)};
    const SrsSequence seq = gen_srs(sim, cfg.zc_root);
    std::ofstream out(a.out);
    if (!out) throw FormatError("cannot write " + a.out);
    out.precision(9);
    for (int n = 0; n < a.count; ++n) {
        const DescrambledSlot slot = simulate_slot(sim, seq, wct, static_cast<std::uint32_t>(n), 0, a.seed);
        for (Eigen::Index i = 0; i < slot.s.size(); ++i) out << (i ? " " : "") << slot.s[i].real() << " " << slot.s[i].imag();
        out << "\n";
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wireless channel type recognition lab"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "Simulate descrambled SRS slots and write a labeled dataset file");
    g->add_option("config", gen.config, "Lab config file (JSON)")->required();
    g->add_option("--out,-o", gen.out, "Output dataset path")->required();
    g->add_option("--seed", gen.seed, "Master seed (overrides the config)");
    g->add_option("--mode", gen.mode, "Vectorization mode")->check(CLI::IsMember({"reim", "magphase"}));
    g->add_option("--scheme", gen.scheme, "Labeling scheme")->check(CLI::IsMember({"single", "multi"}));
    g->add_option("--threads", gen.threads, "Worker threads (default: WCTLAB_THREADS or all cores)");

    TrainArgs tr;
    auto* t = app.add_subcommand("train", "Train a classifier on a dataset file");
    t->add_option("dataset", tr.data, "Dataset file")->required();
    t->add_option("--out,-o", tr.out, "Output checkpoint path")->required();
    t->add_option("--scheme", tr.scheme, "Expected labeling scheme")->check(CLI::IsMember({"single", "multi"}));
    t->add_option("--epochs", tr.epochs, "Training epochs (default 30)");
    t->add_option("--lr", tr.lr, "Learning rate (default 1e-3)");
    t->add_option("--batch", tr.batch, "Mini-batch size (default 256)");
    t->add_option("--hidden", tr.hidden, "Three hidden layer sizes (default 512 256 128)")->expected(3);
    t->add_option("--seed", tr.seed, "Initialization and shuffling seed");
    t->add_option("--optimizer", tr.optimizer, "Optimizer")->check(CLI::IsMember({"adam", "sgd"}));
    t->add_option("--history", tr.history, "Per-epoch metrics CSV (default <out>.history.csv)");
    t->add_flag("--no-standardize", tr.no_standardize, "Disable input standardization");
    t->add_flag("--quiet,-q", tr.quiet, "Do not print per-epoch metrics");

    EvalArgs ev;
    auto* e = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset's inference split");
    e->add_option("model", ev.model, "Checkpoint file")->required();
    e->add_option("dataset", ev.data, "Dataset file")->required();
    e->add_option("--csv", ev.csv, "Also write the report as CSV");

    InferArgs in;
    auto* i = app.add_subcommand("infer", "Classify raw descrambled slots (one per line, 're im' pairs)");
    i->add_option("model", in.model, "Checkpoint file")->required();
    i->add_option("input", in.input, "Raw complex samples file")->required();

    SampleArgs sa;
    auto* s = app.add_subcommand("sample", "Write raw descrambled slots of one channel type for 'infer'");
    s->add_option("config", sa.config, "Lab config file (JSON)")->required();
    s->add_option("--wct", sa.wct, "Channel type name from the config")->required();
    s->add_option("--snr", sa.snr, "SNR in dB, or 'inf' for noiseless");
    s->add_option("--count", sa.count, "Number of slots");
    s->add_option("--seed", sa.seed, "Seed");
    s->add_option("--out,-o", sa.out, "Output path")->required();

    int threads = 0;
    app.add_option("--threads", threads, "Worker thread cap (fallback: WCTLAB_THREADS)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& err) {
        return app.exit(err);
    } catch (const CLI::ParseError& err) {
        app.exit(err);
        return kUsage;
    }
    if (gen.threads == 0) gen.threads = threads;

    try {
        if (*g) return cmd_generate(gen);
        if (*t) return cmd_train(tr);
        if (*e) return cmd_eval(ev);
        if (*i) return cmd_infer(in);
        if (*s) return cmd_sample(sa);
    } catch (const ConfigError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kUsage;
    } catch (const FormatError& err) {
        std::cerr << "data error: " << err.what() << "\n";
        return kData;
    } catch (const DivergenceError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return kDiverged;
    }
    return kUsage;
}
