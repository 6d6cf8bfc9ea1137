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
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wctlab/channel.hpp"
#include "wctlab/column_meta.hpp"
#include "wctlab/labeling.hpp"
#include "wctlab/srs.hpp"

namespace wct {

enum class VectorizationMode { kRealImag, kMagPhase };

std::string to_string(VectorizationMode m);
VectorizationMode vectorization_mode_from_string(const std::string& s);

/// Real feature vector of length 2 N_des: [Re(s); Im(s)] or [|s|; arg(s)].
struct FeatureVector {
    Eigen::VectorXd v;
    VectorizationMode mode = VectorizationMode::kRealImag;
    ColumnMeta meta;
};

FeatureVector vectorize(const DescrambledSlot& slot, VectorizationMode mode);
Eigen::VectorXd vectorize(const Eigen::VectorXcd& s, VectorizationMode mode);

/// Inverse of vectorize. Exact for kRealImag.
Eigen::VectorXcd devectorize(const Eigen::VectorXd& v, VectorizationMode mode);

/// Sample matrix S (2 N_des x N_wct N_slot N_snr), columns WCT-major, then slot, then SNR.
struct SampleMatrix {
    Eigen::MatrixXf s;
    ColumnMetaList meta;
    VectorizationMode mode = VectorizationMode::kRealImag;
    std::uint32_t n_wct = 0;
    std::uint32_t n_slot = 0;
    std::uint32_t n_snr = 0;
};

/// Descrambled slot for one (WCT, slot, SNR) triple. Channel and noise seeds
/// are derived from master_seed and the triple, so any column can be
/// regenerated in isolation.
DescrambledSlot simulate_slot(const SimConfig& cfg, const SrsSequence& seq, std::uint32_t wct, std::uint32_t slot,
                              std::uint32_t snr, std::uint64_t master_seed);

/// Runs the WCT x slot x SNR loop nest. Columns are generated on up to
/// 'threads' workers; the result does not depend on the thread count.
SampleMatrix build_sample_matrix(const SimConfig& cfg, VectorizationMode mode, std::uint64_t master_seed,
                                 int threads = 1, int zc_root = kDefaultZcRoot);

struct SplitOptions {
    /// Shuffle within each (WCT, SNR) group before splitting. When false the
    /// first round(alpha N) columns of S form the training set.
    bool shuffle = true;
    std::uint64_t seed = 0;
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> infer;
};

/// Column indices of each partition, both ascending. Throws ConfigError unless 0 < alpha < 1.
SplitIndices split_indices(const ColumnMetaList& meta, double alpha, const SplitOptions& opts = {});

struct DatasetSplit {
    double alpha = 0.9;
    bool shuffled = true;
    Eigen::MatrixXf train;
    Eigen::MatrixXf infer;
    ColumnMetaList train_meta;
    ColumnMetaList infer_meta;
};

DatasetSplit split(const SampleMatrix& s, double alpha, const SplitOptions& opts = {});

/// Per-feature (row) affine standardization fitted on one matrix.
struct Standardizer {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;  ///< 1 / std; 1 for constant rows

    static Standardizer fit(const Eigen::MatrixXf& x);
    void apply(Eigen::MatrixXf& x) const;
};

/// Everything recorded in a dataset file header besides payload dimensions.
struct DatasetInfo {
    int version = 1;
    VectorizationMode mode = VectorizationMode::kRealImag;
    int n_des = 0;
    SimConfig sim;
    LabelScheme scheme = LabelScheme::kSingleTask;
    FeatureConvention convention = FeatureConvention::kDistinctNone;
    std::uint64_t seed = 0;
    int zc_root = kDefaultZcRoot;
};

struct Dataset {
    DatasetInfo info;
    DatasetSplit split;
    LabelMatrix train_labels;
    LabelMatrix infer_labels;
};

/// Builds the label matrices for a split under the requested scheme.
void attach_labels(Dataset& ds);

/// WCTDSET1 file. Throws ConfigError on inconsistent label/sample column
/// counts and FormatError on I/O failure.
void save_dataset(const Dataset& ds, const std::string& path);

/// Throws FormatError naming the offending field on corrupt or truncated input.
Dataset load_dataset(const std::string& path);

} // namespace wct
