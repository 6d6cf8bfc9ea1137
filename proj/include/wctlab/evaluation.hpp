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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wctlab/column_meta.hpp"
#include "wctlab/labeling.hpp"
#include "wctlab/mlp.hpp"

namespace wct {

struct Tally {
    std::int64_t correct = 0;
    std::int64_t total = 0;

    /// Empty when total is 0.
    std::optional<double> accuracy() const;

    friend bool operator==(const Tally&, const Tally&) = default;
};

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Rows are true classes, columns predicted classes.
struct TaskConfusion {
    std::string name;
    std::vector<std::string> classes;
    CountMatrix counts;

    std::int64_t total() const { return counts.sum(); }
    double accuracy() const;
    Tally class_tally(int k) const;
};

struct SnrTally {
    double snr_db = 0.0;
    Tally tally;
};

struct EvalReport {
    LabelScheme scheme = LabelScheme::kSingleTask;
    int input_dim = 0;
    std::vector<TaskConfusion> tasks;
    std::vector<SnrTally> per_snr;  ///< exact-match accuracy per grid point
    Tally exact;                    ///< all tasks correct
    std::int64_t n_eval = 0;

    /// Single-task: WCT accuracy. Multi-task: reconstructed-WCT accuracy.
    double overall_accuracy() const;
    std::vector<double> per_task_accuracy() const;
    std::optional<double> reconstructed_wct_accuracy() const;
};

/// Counts predicted vs true per-task class indices (tasks x n).
EvalReport evaluate(const Eigen::MatrixXi& predicted, const Eigen::MatrixXi& truth, const ColumnMetaList& meta,
                    const std::vector<double>& snr_grid, LabelScheme scheme, const TaskLayout& layout);

/// Predicts in chunks and evaluates against the label matrix.
EvalReport evaluate(const Mlp<float>& model, const Eigen::MatrixXf& samples, const LabelMatrix& labels,
                    const ColumnMetaList& meta, const std::vector<double>& snr_grid);

/// Fixed-width tables: headline, per-class, confusion, per-SNR.
std::string render_text(const EvalReport& report);

/// CSV with header "section,task,key,correct,total,accuracy"; rows for scheme,
/// dims, per-task, per-class, confusion cells, per-SNR and exact-match.
std::string render_csv(const EvalReport& report);

/// Inverse of render_csv. Throws FormatError on malformed input.
EvalReport parse_csv(const std::string& csv);

} // namespace wct
