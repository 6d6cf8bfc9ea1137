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

#pragma once

#include <functional>
#include <string>

#include "wctlab/config.hpp"
#include "wctlab/dataset.hpp"
#include "wctlab/evaluation.hpp"
#include "wctlab/mlp.hpp"

namespace wct {

/// Sample matrix, split and labels for a lab config.
Dataset generate_dataset(const LabConfig& cfg, int threads = 1);

struct FitResult {
    Checkpoint checkpoint;
    TrainHistory history;
};

/// Initializes and trains a model on the dataset's training split; the
/// inference split is used for per-epoch metrics only.
FitResult fit(const Dataset& ds, const TrainConfig& cfg, const std::function<void(const EpochMetrics&)>& on_epoch = {});

EvalReport evaluate(const Checkpoint& ckpt, const Dataset& ds);

std::string history_csv(const TrainHistory& history);

/// Worker count from an explicit value, else WCTLAB_THREADS, else hardware concurrency.
int resolve_threads(int requested);

} // namespace wct
