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

#include "wctlab/pipeline.hpp"

#include <cstdlib>
#include <sstream>
#include <thread>

namespace wct {

Dataset generate_dataset(const LabConfig& cfg, int threads) {
    Dataset ds;
    ds.info.mode = cfg.mode;
    ds.info.n_des = cfg.sim.n_des();
    ds.info.sim = cfg.sim;
    ds.info.scheme = cfg.scheme;
    ds.info.convention = cfg.convention;
    ds.info.seed = cfg.seed;
    ds.info.zc_root = cfg.zc_root;
    {
        const SampleMatrix s = build_sample_matrix(cfg.sim, cfg.mode, cfg.seed, threads, cfg.zc_root);
        ds.split = split(s, cfg.alpha, {cfg.shuffle, cfg.seed});
    }
    attach_labels(ds);
    return ds;
}

FitResult fit(const Dataset& ds, const TrainConfig& cfg, const std::function<void(const EpochMetrics&)>& on_epoch) {
    cfg.validate();
    FitResult out;
    out.checkpoint.train = cfg;
    out.checkpoint.mode = ds.info.mode;
    out.checkpoint.convention = ds.info.convention;
    out.checkpoint.profiles = ds.info.sim.wcts;
    auto& model = out.checkpoint.model;
    model = init_model<float>(static_cast<int>(ds.split.train.rows()), ds.train_labels.layout, ds.info.scheme, cfg);
    if (cfg.standardize) {
        const Standardizer st = Standardizer::fit(ds.split.train);
        model.input_mean = st.mean.cast<float>();
        model.input_scale = st.scale.cast<float>();
    }
    out.history = train<float>(model, ds.split.train, ds.train_labels.e, &ds.split.infer, &ds.infer_labels.e, cfg, on_epoch);
    return out;
}

EvalReport evaluate(const Checkpoint& ckpt, const Dataset& ds) {
    return evaluate(ckpt.model, ds.split.infer, ds.infer_labels, ds.split.infer_meta, ds.info.sim.snr_grid_db);
}

std::string history_csv(const TrainHistory& history) {
    std::ostringstream os;
    os << "epoch,train_loss,train_accuracy,infer_loss,infer_accuracy\n";
    os.precision(10);
    for (const auto& e : history) {
        os << e.epoch << "," << e.train_loss << "," << e.train_accuracy << ",";
        if (e.has_infer) os << e.infer_loss << "," << e.infer_accuracy;
        else os << ",";
        os << "\n";
    }
    return os.str();
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("WCTLAB_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

} // namespace wct
