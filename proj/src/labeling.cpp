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

#include "wctlab/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "wctlab/error.hpp"

namespace wct {

namespace {

std::string format_number(double v, const char* unit) {
    std::ostringstream os;
    os << v << unit;
    return os.str();
}

void set_column(LabelMatrix& out, Eigen::Index col, const std::vector<int>& tuple) {
    const auto offsets = out.layout.offsets();
    for (std::size_t t = 0; t < tuple.size(); ++t) out.e(offsets[t] + tuple[t], col) = 1.0f;
}

} // namespace

std::string to_string(LabelScheme s) {
    return s == LabelScheme::kSingleTask ? "single" : "multi";
}

LabelScheme label_scheme_from_string(const std::string& s) {
    if (s == "single") return LabelScheme::kSingleTask;
    if (s == "multi") return LabelScheme::kMultiTask;
    throw ConfigError("unknown labeling scheme '" + s + "' (expected single|multi)");
}

std::string to_string(FeatureConvention c) {
    return c == FeatureConvention::kDistinctNone ? "distinct-none" : "awgn-as-low";
}

FeatureConvention feature_convention_from_string(const std::string& s) {
    if (s == "distinct-none") return FeatureConvention::kDistinctNone;
    if (s == "awgn-as-low") return FeatureConvention::kAwgnAsLow;
    throw ConfigError("unknown feature convention '" + s + "' (expected distinct-none|awgn-as-low)");
}

FeatureSet default_features(FeatureConvention convention) {
    FeatureSet fs;
    fs.push_back({"delay_spread", [](const ChannelProfile& p) {
                      const double ns = std::round(p.rms_delay_spread_s() * 1e9);
                      return FeatureValue{p.rms_delay_spread_s(), format_number(ns, "ns")};
                  }});
    fs.push_back({"correlation", [convention](const ChannelProfile& p) {
                      RxCorrelation c = p.rx_correlation;
                      if (convention == FeatureConvention::kAwgnAsLow && c == RxCorrelation::kNone)
                          c = RxCorrelation::kLow;
                      // "none" sorts before "low" even though both have alpha = 0.
                      const double key = c == RxCorrelation::kNone ? -1.0 : correlation_alpha(c);
                      return FeatureValue{key, to_string(c)};
                  }});
    fs.push_back({"doppler", [convention](const ChannelProfile& p) {
                      double key = p.doppler_hz;
                      if (convention == FeatureConvention::kAwgnAsLow && p.doppler_hz == 0.0)
                          key = std::numeric_limits<double>::infinity();
                      return FeatureValue{key, format_number(p.doppler_hz, "Hz")};
                  }});
    return fs;
}

int TaskLayout::total_dim() const {
    int n = 0;
    for (const auto& t : tasks) n += t.k();
    return n;
}

std::vector<int> TaskLayout::offsets() const {
    std::vector<int> out;
    int at = 0;
    for (const auto& t : tasks) {
        out.push_back(at);
        at += t.k();
    }
    return out;
}

std::vector<int> TaskLayout::segment_sizes() const {
    std::vector<int> out;
    for (const auto& t : tasks) out.push_back(t.k());
    return out;
}

bool operator==(const TaskLayout& a, const TaskLayout& b) {
    if (a.tasks.size() != b.tasks.size()) return false;
    for (std::size_t i = 0; i < a.tasks.size(); ++i) {
        if (a.tasks[i].feature != b.tasks[i].feature || a.tasks[i].classes != b.tasks[i].classes ||
            a.tasks[i].keys != b.tasks[i].keys)
            return false;
    }
    return true;
}

TaskLayout single_task_layout(const std::vector<ChannelProfile>& profiles) {
    Task t{"wct", {}, {}};
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        t.classes.push_back(profiles[i].name);
        t.keys.push_back(static_cast<double>(i));
    }
    return TaskLayout{{t}};
}

TaskLayout derive_task_layout(const std::vector<ChannelProfile>& profiles, const FeatureSet& features) {
    if (profiles.empty()) throw ConfigError("cannot derive a task layout from zero profiles");
    TaskLayout layout;
    for (const auto& f : features) {
        std::vector<FeatureValue> values;
        for (const auto& p : profiles) values.push_back(f.value(p));
        std::stable_sort(values.begin(), values.end(),
                         [](const FeatureValue& a, const FeatureValue& b) { return a.key < b.key; });
        Task task{f.name, {}, {}};
        for (const auto& v : values) {
            if (task.keys.empty() || task.keys.back() != v.key) {
                task.keys.push_back(v.key);
                task.classes.push_back(v.label);
            }
        }
        layout.tasks.push_back(std::move(task));
    }
    return layout;
}

std::vector<int> feature_tuple(const ChannelProfile& profile, const TaskLayout& layout, const FeatureSet& features) {
    if (features.size() != layout.tasks.size()) throw ConfigError("feature set does not match the task layout");
    std::vector<int> tuple;
    for (std::size_t t = 0; t < features.size(); ++t) {
        const FeatureValue v = features[t].value(profile);
        const auto& keys = layout.tasks[t].keys;
        const auto it = std::find(keys.begin(), keys.end(), v.key);
        if (it == keys.end())
            throw ConfigError("profile '" + profile.name + "': " + features[t].name + " value " + v.label +
                              " is not a class of the layout");
        tuple.push_back(static_cast<int>(it - keys.begin()));
    }
    return tuple;
}

LabelMatrix single_task_labels(const ColumnMetaList& meta, int n_wct) {
    if (n_wct < 1) throw ConfigError("n_wct must be >= 1");
    LabelMatrix out;
    out.scheme = LabelScheme::kSingleTask;
    Task t{"wct", {}, {}};
    for (int i = 0; i < n_wct; ++i) {
        t.classes.push_back(std::to_string(i));
        t.keys.push_back(i);
    }
    out.layout.tasks.push_back(std::move(t));
    out.e = Eigen::MatrixXf::Zero(n_wct, static_cast<Eigen::Index>(meta.size()));
    for (std::size_t c = 0; c < meta.size(); ++c) {
        if (meta[c].wct >= static_cast<std::uint32_t>(n_wct))
            throw ConfigError("column " + std::to_string(c) + ": wct index " + std::to_string(meta[c].wct) +
                              " out of range for " + std::to_string(n_wct) + " channel types");
        out.e(meta[c].wct, static_cast<Eigen::Index>(c)) = 1.0f;
    }
    return out;
}

LabelMatrix single_task_labels(const ColumnMetaList& meta, const std::vector<ChannelProfile>& profiles) {
    LabelMatrix out = single_task_labels(meta, static_cast<int>(profiles.size()));
    out.layout = single_task_layout(profiles);
    return out;
}

LabelMatrix multi_task_labels(const ColumnMetaList& meta, const TaskLayout& layout,
                              const std::vector<ChannelProfile>& profiles, const FeatureSet& features) {
    LabelMatrix out;
    out.scheme = LabelScheme::kMultiTask;
    out.layout = layout;
    std::vector<std::vector<int>> tuples;
    for (const auto& p : profiles) tuples.push_back(feature_tuple(p, layout, features));

    out.e = Eigen::MatrixXf::Zero(layout.total_dim(), static_cast<Eigen::Index>(meta.size()));
    for (std::size_t c = 0; c < meta.size(); ++c) {
        if (meta[c].wct >= profiles.size())
            throw ConfigError("column " + std::to_string(c) + ": wct index out of range");
        set_column(out, static_cast<Eigen::Index>(c), tuples[meta[c].wct]);
    }
    return out;
}

Eigen::MatrixXi label_indices(const LabelMatrix& labels) {
    const auto offsets = labels.layout.offsets();
    const auto sizes = labels.layout.segment_sizes();
    if (labels.e.rows() != labels.layout.total_dim()) throw FormatError("label matrix rows do not match the layout");
    Eigen::MatrixXi idx(static_cast<Eigen::Index>(sizes.size()), labels.e.cols());
    for (Eigen::Index c = 0; c < labels.e.cols(); ++c) {
        for (std::size_t t = 0; t < sizes.size(); ++t) {
            int hot = -1;
            for (int k = 0; k < sizes[t]; ++k) {
                const float v = labels.e(offsets[t] + k, c);
                if (v == 1.0f && hot < 0) {
                    hot = k;
                } else if (v != 0.0f) {
                    hot = -2;
                    break;
                }
            }
            if (hot < 0) throw FormatError("label column " + std::to_string(c) + " is not one-hot in task " + labels.layout.tasks[t].feature);
            idx(static_cast<Eigen::Index>(t), c) = hot;
        }
    }
    return idx;
}

WctMatch label_to_wct(const std::vector<int>& tuple, const std::vector<ChannelProfile>& profiles,
                      const TaskLayout& layout, const FeatureSet& features) {
    WctMatch match{std::nullopt, tuple};
    int hits = 0;
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        if (feature_tuple(profiles[i], layout, features) == tuple) {
            match.wct = static_cast<int>(i);
            ++hits;
        }
    }
    if (hits != 1) match.wct.reset();
    return match;
}

} // namespace wct
