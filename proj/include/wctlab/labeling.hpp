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
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wctlab/channel.hpp"
#include "wctlab/column_meta.hpp"

namespace wct {

enum class LabelScheme { kSingleTask, kMultiTask };

std::string to_string(LabelScheme s);
LabelScheme label_scheme_from_string(const std::string& s);

/// How the AWGN channel and the static Doppler class are placed in the
/// multi-task feature classes.
///  - kDistinctNone: AWGN gets its own "none" correlation class; every task's
///    classes are ordered by ascending value (delay spread, alpha, Doppler Hz).
///  - kAwgnAsLow: AWGN is labeled low correlation, and the 0 Hz Doppler class is
///    ordered after the fading Doppler values.
enum class FeatureConvention { kDistinctNone, kAwgnAsLow };

std::string to_string(FeatureConvention c);
FeatureConvention feature_convention_from_string(const std::string& s);

/// A feature value: numeric ordering key plus display label. Two values are the
/// same class iff their keys are equal.
struct FeatureValue {
    double key;
    std::string label;
};

struct FeatureExtractor {
    std::string name;
    std::function<FeatureValue(const ChannelProfile&)> value;
};

using FeatureSet = std::vector<FeatureExtractor>;

/// Delay spread, Rx correlation and Doppler, in that order.
FeatureSet default_features(FeatureConvention convention = FeatureConvention::kDistinctNone);

struct Task {
    std::string feature;
    std::vector<std::string> classes;
    std::vector<double> keys;

    int k() const { return static_cast<int>(classes.size()); }
};

/// Ordered output segments of a classifier head.
struct TaskLayout {
    std::vector<Task> tasks;

    int total_dim() const;
    /// Row offset of each task's segment.
    std::vector<int> offsets() const;
    std::vector<int> segment_sizes() const;

    friend bool operator==(const TaskLayout& a, const TaskLayout& b);
};

/// One task named "wct" whose classes are the profile names, in order.
TaskLayout single_task_layout(const std::vector<ChannelProfile>& profiles);

/// Per feature, the distinct values across profiles sorted by key.
TaskLayout derive_task_layout(const std::vector<ChannelProfile>& profiles, const FeatureSet& features);

/// Class index per task for one profile. Throws ConfigError on a value missing from the layout.
std::vector<int> feature_tuple(const ChannelProfile& profile, const TaskLayout& layout, const FeatureSet& features);

/// Label matrix E (label_dim x n_columns), entries 0 or 1.
struct LabelMatrix {
    Eigen::MatrixXf e;
    LabelScheme scheme = LabelScheme::kSingleTask;
    TaskLayout layout;
};

/// Column for wct_index k is the k-th column of the n_wct identity. Throws
/// ConfigError on an out-of-range index.
LabelMatrix single_task_labels(const ColumnMetaList& meta, int n_wct);
LabelMatrix single_task_labels(const ColumnMetaList& meta, const std::vector<ChannelProfile>& profiles);

/// Concatenated one-hot segment per task, following the layout order.
LabelMatrix multi_task_labels(const ColumnMetaList& meta, const TaskLayout& layout,
                              const std::vector<ChannelProfile>& profiles, const FeatureSet& features);

/// Per-task class index of each label column (tasks x n). Throws FormatError
/// if a segment is not one-hot.
Eigen::MatrixXi label_indices(const LabelMatrix& labels);

/// Result of mapping a per-task class tuple back to a configured WCT.
struct WctMatch {
    std::optional<int> wct;  ///< empty when no configured profile has this tuple
    std::vector<int> tuple;
};

WctMatch label_to_wct(const std::vector<int>& tuple, const std::vector<ChannelProfile>& profiles,
                      const TaskLayout& layout, const FeatureSet& features);

} // namespace wct
