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

#include "wctlab/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <thread>

#include "wctlab/config.hpp"
#include "wctlab/error.hpp"
#include "wctlab/io.hpp"
#include "wctlab/random.hpp"

namespace wct {

using nlohmann::json;

namespace {

const std::string kDatasetMagic = "WCTDSET1";

json dims_json(const Eigen::MatrixXf& m) { return json::array({m.rows(), m.cols()}); }

std::pair<Eigen::Index, Eigen::Index> dims_from(const json& header, const char* key) {
    try {
        const auto& d = header.at("dims").at(key);
        return {d.at(0).get<Eigen::Index>(), d.at(1).get<Eigen::Index>()};
    } catch (const json::exception&) {
        throw FormatError(std::string("header field dims.") + key + " missing or malformed");
    }
}

template <typename T>
T header_field(const json& header, const char* key) {
    try {
        return header.at(key).get<T>();
    } catch (const json::exception&) {
        throw FormatError(std::string("header field '") + key + "' missing or malformed");
    } catch (const ConfigError& e) {
        throw FormatError(std::string("header field '") + key + "': " + e.what());
    }
}

std::vector<std::uint32_t> flatten(const ColumnMetaList& meta) {
    std::vector<std::uint32_t> out;
    out.reserve(meta.size() * 3);
    for (const auto& m : meta) {
        out.push_back(m.wct);
        out.push_back(m.slot);
        out.push_back(m.snr);
    }
    return out;
}

ColumnMetaList unflatten(const std::vector<std::uint32_t>& v) {
    ColumnMetaList out(v.size() / 3);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = {v[3 * i], v[3 * i + 1], v[3 * i + 2]};
    return out;
}

Eigen::MatrixXf gather_columns(const Eigen::MatrixXf& s, const std::vector<std::size_t>& idx) {
    Eigen::MatrixXf out(s.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = s.col(static_cast<Eigen::Index>(idx[i]));
    return out;
}

} // namespace

std::string to_string(VectorizationMode m) {
    return m == VectorizationMode::kRealImag ? "reim" : "magphase";
}

VectorizationMode vectorization_mode_from_string(const std::string& s) {
    if (s == "reim") return VectorizationMode::kRealImag;
    if (s == "magphase") return VectorizationMode::kMagPhase;
    throw ConfigError("unknown vectorization mode '" + s + "' (expected reim|magphase)");
}

Eigen::VectorXd vectorize(const Eigen::VectorXcd& s, VectorizationMode mode) {
    const Eigen::Index n = s.size();
    Eigen::VectorXd v(2 * n);
    if (mode == VectorizationMode::kRealImag) {
        v.head(n) = s.real();
        v.tail(n) = s.imag();
    } else {
        for (Eigen::Index i = 0; i < n; ++i) {
            v[i] = std::abs(s[i]);
            const double phase = std::arg(s[i]);
            v[n + i] = phase == -std::numbers::pi ? std::numbers::pi : phase;
        }
    }
    return v;
}

FeatureVector vectorize(const DescrambledSlot& slot, VectorizationMode mode) {
    return {vectorize(slot.s, mode), mode,
            {static_cast<std::uint32_t>(slot.wct_index), static_cast<std::uint32_t>(slot.slot_index),
             static_cast<std::uint32_t>(slot.snr_index)}};
}

Eigen::VectorXcd devectorize(const Eigen::VectorXd& v, VectorizationMode mode) {
    if (v.size() % 2 != 0) throw FormatError("feature vector length must be even");
    const Eigen::Index n = v.size() / 2;
    Eigen::VectorXcd s(n);
    for (Eigen::Index i = 0; i < n; ++i)
        s[i] = mode == VectorizationMode::kRealImag ? std::complex<double>(v[i], v[n + i]) : std::polar(v[i], v[n + i]);
    return s;
}

DescrambledSlot simulate_slot(const SimConfig& cfg, const SrsSequence& seq, std::uint32_t wct, std::uint32_t slot,
                              std::uint32_t snr, std::uint64_t master_seed) {
    const std::uint64_t channel_seed = cfg.independent_slots
                                           ? derive_seed(master_seed, {tag(Stream::kFading), wct, slot, snr})
                                           : derive_seed(master_seed, {tag(Stream::kFading), wct, snr});
    const std::uint64_t noise_seed = derive_seed(master_seed, {tag(Stream::kNoise), wct, slot, snr});
    const ChannelRealization h = realize_channel(cfg.wcts.at(wct), cfg, slot, channel_seed);
    DescrambledSlot out = transmit_descramble(seq, h, cfg.snr_grid_db.at(snr), noise_seed);
    out.wct_index = static_cast<int>(wct);
    out.slot_index = static_cast<int>(slot);
    out.snr_index = static_cast<int>(snr);
    return out;
}

SampleMatrix build_sample_matrix(const SimConfig& cfg, VectorizationMode mode, std::uint64_t master_seed, int threads,
                                 int zc_root) {
    cfg.validate();
    const SrsSequence seq = gen_srs(cfg, zc_root);

    SampleMatrix out;
    out.mode = mode;
    out.n_wct = static_cast<std::uint32_t>(cfg.wcts.size());
    out.n_slot = static_cast<std::uint32_t>(cfg.n_slots_per_snr);
    out.n_snr = static_cast<std::uint32_t>(cfg.snr_grid_db.size());
    const std::uint64_t n_cols = static_cast<std::uint64_t>(out.n_wct) * out.n_slot * out.n_snr;
    out.s.resize(2 * cfg.n_des(), static_cast<Eigen::Index>(n_cols));
    out.meta.resize(n_cols);

    // Fail fast on configuration errors (e.g. aliasing delays) before spawning workers.
    for (std::uint32_t w = 0; w < out.n_wct; ++w) (void)realize_channel(cfg.wcts[w], cfg, 0, 0);

    auto work = [&](std::uint64_t begin, std::uint64_t end) {
        for (std::uint64_t c = begin; c < end; ++c) {
            const ColumnMeta m = column_meta_for(c, out.n_slot, out.n_snr);
            const DescrambledSlot slot = simulate_slot(cfg, seq, m.wct, m.slot, m.snr, master_seed);
            out.s.col(static_cast<Eigen::Index>(c)) = vectorize(slot.s, mode).cast<float>();
            out.meta[c] = m;
        }
    };

    const auto n_workers = static_cast<std::uint64_t>(std::clamp<std::int64_t>(threads, 1, std::max<std::int64_t>(1, static_cast<std::int64_t>(n_cols))));
    if (n_workers == 1) {
        work(0, n_cols);
    } else {
        std::vector<std::jthread> pool;
        const std::uint64_t chunk = (n_cols + n_workers - 1) / n_workers;
        for (std::uint64_t b = 0; b < n_cols; b += chunk) pool.emplace_back(work, b, std::min(n_cols, b + chunk));
    }
    return out;
}

SplitIndices split_indices(const ColumnMetaList& meta, double alpha, const SplitOptions& opts) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie strictly between 0 and 1");
    const std::size_t n = meta.size();
    const auto target = static_cast<std::size_t>(std::llround(alpha * static_cast<double>(n)));
    SplitIndices out;

    if (!opts.shuffle) {
        for (std::size_t c = 0; c < n; ++c) (c < target ? out.train : out.infer).push_back(c);
        return out;
    }

    // Stratify by (wct, snr): each group contributes floor(alpha n_g) columns,
    // the remainder goes to the groups with the largest fractional shares.
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<std::size_t>> groups;
    for (std::size_t c = 0; c < n; ++c) groups[{meta[c].wct, meta[c].snr}].push_back(c);

    struct Quota {
        std::vector<std::size_t>* members;
        std::size_t take;
        double frac;
    };
    std::vector<Quota> quotas;
    std::size_t assigned = 0;
    std::mt19937_64 rng(derive_seed(opts.seed, {tag(Stream::kSplit)}));
    for (auto& [key, members] : groups) {
        std::shuffle(members.begin(), members.end(), rng);
        const double share = alpha * static_cast<double>(members.size());
        const auto take = static_cast<std::size_t>(std::floor(share + 1e-9));
        quotas.push_back({&members, take, share - static_cast<double>(take)});
        assigned += take;
    }
    std::vector<std::size_t> order(quotas.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return quotas[a].frac > quotas[b].frac; });
    for (std::size_t i = 0; assigned < target && i < order.size(); ++i) {
        auto& q = quotas[order[i]];
        if (q.take < q.members->size()) {
            ++q.take;
            ++assigned;
        }
    }
    for (const auto& q : quotas) {
        for (std::size_t i = 0; i < q.members->size(); ++i) (i < q.take ? out.train : out.infer).push_back((*q.members)[i]);
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.infer.begin(), out.infer.end());
    return out;
}

DatasetSplit split(const SampleMatrix& s, double alpha, const SplitOptions& opts) {
    const SplitIndices idx = split_indices(s.meta, alpha, opts);
    DatasetSplit out;
    out.alpha = alpha;
    out.shuffled = opts.shuffle;
    out.train = gather_columns(s.s, idx.train);
    out.infer = gather_columns(s.s, idx.infer);
    for (auto i : idx.train) out.train_meta.push_back(s.meta[i]);
    for (auto i : idx.infer) out.infer_meta.push_back(s.meta[i]);
    return out;
}

Standardizer Standardizer::fit(const Eigen::MatrixXf& x) {
    Standardizer st;
    st.mean = Eigen::VectorXd::Zero(x.rows());
    st.scale = Eigen::VectorXd::Ones(x.rows());
    if (x.cols() == 0) return st;
    const double n = static_cast<double>(x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const Eigen::VectorXd row = x.row(r).cast<double>().transpose();
        const double mean = row.sum() / n;
        const double var = (row.array() - mean).square().sum() / n;
        st.mean[r] = mean;
        st.scale[r] = var > 1e-24 ? 1.0 / std::sqrt(var) : 1.0;
    }
    return st;
}

void Standardizer::apply(Eigen::MatrixXf& x) const {
    const Eigen::VectorXf m = mean.cast<float>();
    const Eigen::VectorXf s = scale.cast<float>();
    x = ((x.colwise() - m).array().colwise() * s.array()).matrix();
}

void attach_labels(Dataset& ds) {
    const auto& profiles = ds.info.sim.wcts;
    if (ds.info.scheme == LabelScheme::kSingleTask) {
        ds.train_labels = single_task_labels(ds.split.train_meta, profiles);
        ds.infer_labels = single_task_labels(ds.split.infer_meta, profiles);
    } else {
        const FeatureSet features = default_features(ds.info.convention);
        const TaskLayout layout = derive_task_layout(profiles, features);
        ds.train_labels = multi_task_labels(ds.split.train_meta, layout, profiles, features);
        ds.infer_labels = multi_task_labels(ds.split.infer_meta, layout, profiles, features);
    }
}

void save_dataset(const Dataset& ds, const std::string& path) {
    const auto& sp = ds.split;
    if (ds.train_labels.e.cols() != sp.train.cols() || ds.infer_labels.e.cols() != sp.infer.cols())
        throw ConfigError("label and sample column counts differ");
    if (static_cast<std::size_t>(sp.train.cols()) != sp.train_meta.size() ||
        static_cast<std::size_t>(sp.infer.cols()) != sp.infer_meta.size())
        throw ConfigError("metadata and sample column counts differ");
    if (sp.train.rows() != sp.infer.rows() || ds.train_labels.e.rows() != ds.infer_labels.e.rows())
        throw ConfigError("train and inference row counts differ");

    std::vector<std::string> names;
    for (const auto& p : ds.info.sim.wcts) names.push_back(p.name);
    const json header{{"version", ds.info.version},
                      {"mode", to_string(ds.info.mode)},
                      {"n_des", ds.info.n_des},
                      {"dims",
                       {{"train_samples", dims_json(sp.train)},
                        {"train_labels", dims_json(ds.train_labels.e)},
                        {"infer_samples", dims_json(sp.infer)},
                        {"infer_labels", dims_json(ds.infer_labels.e)}}},
                      {"payload_order", {"train_samples", "train_labels", "infer_samples", "infer_labels", "train_meta", "infer_meta"}},
                      {"alpha", sp.alpha},
                      {"shuffled", sp.shuffled},
                      {"snr_grid", json(ds.info.sim).at("snr_db")},
                      {"wct_names", names},
                      {"labeling_scheme", to_string(ds.info.scheme)},
                      {"feature_convention", to_string(ds.info.convention)},
                      {"task_layout", ds.train_labels.layout},
                      {"seed", ds.info.seed},
                      {"zc_root", ds.info.zc_root},
                      {"sim", ds.info.sim}};

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open " + path + " for writing");
    io::write_header(out, kDatasetMagic, header);
    io::write_f32_rowmajor(out, sp.train);
    io::write_f32_rowmajor(out, ds.train_labels.e);
    io::write_f32_rowmajor(out, sp.infer);
    io::write_f32_rowmajor(out, ds.infer_labels.e);
    const auto tm = flatten(sp.train_meta);
    const auto im = flatten(sp.infer_meta);
    io::write_u32s(out, tm);
    io::write_u32s(out, im);
    out.flush();
    if (!out) throw FormatError("write to " + path + " failed");
}

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open dataset " + path);
    in.seekg(0, std::ios::end);
    const auto file_size = static_cast<std::uint64_t>(in.tellg());
    in.seekg(0);

    const json header = io::read_header(in, kDatasetMagic);
    Dataset ds;
    ds.info.version = header_field<int>(header, "version");
    if (ds.info.version != 1) throw FormatError("unsupported dataset version " + std::to_string(ds.info.version));
    ds.info.mode = vectorization_mode_from_string(header_field<std::string>(header, "mode"));
    ds.info.n_des = header_field<int>(header, "n_des");
    ds.info.scheme = label_scheme_from_string(header_field<std::string>(header, "labeling_scheme"));
    ds.info.convention = feature_convention_from_string(header_field<std::string>(header, "feature_convention"));
    ds.info.seed = header_field<std::uint64_t>(header, "seed");
    ds.info.zc_root = header_field<int>(header, "zc_root");
    ds.info.sim = header_field<SimConfig>(header, "sim");
    ds.split.alpha = header_field<double>(header, "alpha");
    ds.split.shuffled = header_field<bool>(header, "shuffled");
    const auto layout = header_field<TaskLayout>(header, "task_layout");

    const auto [tr, tc] = dims_from(header, "train_samples");
    const auto [lr, lc] = dims_from(header, "train_labels");
    const auto [ir, ic] = dims_from(header, "infer_samples");
    const auto [jr, jc] = dims_from(header, "infer_labels");
    if (tr != 2 * ds.info.n_des || ir != tr) throw FormatError("dims.train_samples/infer_samples rows do not equal 2 * n_des");
    if (lc != tc) throw FormatError("dims.train_labels columns do not match dims.train_samples");
    if (jc != ic) throw FormatError("dims.infer_labels columns do not match dims.infer_samples");
    if (lr != layout.total_dim() || jr != lr) throw FormatError("dims.*_labels rows do not match task_layout");

    const std::uint64_t payload = 4ull * static_cast<std::uint64_t>(tr * tc + lr * lc + ir * ic + jr * jc) +
                                  12ull * static_cast<std::uint64_t>(tc + ic);
    if (static_cast<std::uint64_t>(in.tellg()) + payload != file_size)
        throw FormatError("payload size does not match header dims (file truncated or padded)");

    ds.split.train = io::read_f32_rowmajor(in, tr, tc, "train samples");
    ds.train_labels.e = io::read_f32_rowmajor(in, lr, lc, "train labels");
    ds.split.infer = io::read_f32_rowmajor(in, ir, ic, "infer samples");
    ds.infer_labels.e = io::read_f32_rowmajor(in, jr, jc, "infer labels");
    ds.split.train_meta = unflatten(io::read_u32s(in, 3 * static_cast<std::size_t>(tc), "train metadata"));
    ds.split.infer_meta = unflatten(io::read_u32s(in, 3 * static_cast<std::size_t>(ic), "infer metadata"));
    for (auto* lm : {&ds.train_labels, &ds.infer_labels}) {
        lm->scheme = ds.info.scheme;
        lm->layout = layout;
    }
    return ds;
}

} // namespace wct
