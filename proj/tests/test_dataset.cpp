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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include <unistd.h>

#include "wctlab/config.hpp"
#include "wctlab/dataset.hpp"
#include "wctlab/error.hpp"
#include "wctlab/io.hpp"
#include "wctlab/pipeline.hpp"

using namespace wct;
namespace fs = std::filesystem;

namespace {

SimConfig small_config(int slots = 6) {
    SimConfig cfg = reference_config();
    cfg.n_slots_per_snr = slots;
    cfg.snr_grid_db = {0.0, 10.0, 20.0};
    return cfg;
}

fs::path temp_path(const std::string& name) {
    return fs::temp_directory_path() / ("wctlab_test_" + std::to_string(::getpid()) + "_" + name);
}

Dataset small_dataset(LabelScheme scheme = LabelScheme::kSingleTask) {
    LabConfig lc;
    lc.sim = small_config();
    lc.scheme = scheme;
    lc.seed = 5;
    return generate_dataset(lc, 2);
}

} // namespace

TEST_CASE("real/imag vectorization stacks real parts over imaginary parts") {
    Eigen::VectorXcd s(2);
    s << std::complex<double>(1, 2), std::complex<double>(3, -4);
    const Eigen::VectorXd v = vectorize(s, VectorizationMode::kRealImag);
    REQUIRE(v.size() == 4);
    CHECK(v[0] == 1.0);
    CHECK(v[1] == 3.0);
    CHECK(v[2] == 2.0);
    CHECK(v[3] == -4.0);
    CHECK(devectorize(v, VectorizationMode::kRealImag) == s);
}

TEST_CASE("magnitude/phase vectorization") {
    Eigen::VectorXcd s(3);
    s << std::complex<double>(3, 4), std::complex<double>(-1, 0), std::complex<double>(0, -2);
    const Eigen::VectorXd v = vectorize(s, VectorizationMode::kMagPhase);
    CHECK(v[0] == doctest::Approx(5.0));
    CHECK(v[1] == doctest::Approx(1.0));
    CHECK(v[2] == doctest::Approx(2.0));
    CHECK(v[3] == doctest::Approx(std::atan2(4.0, 3.0)));
    CHECK(v[4] == doctest::Approx(M_PI));
    CHECK(v[5] == doctest::Approx(-M_PI / 2));
    // phase lies in (-pi, pi]
    const Eigen::VectorXcd neg_zero_imag = Eigen::VectorXcd::Constant(1, std::complex<double>(-1.0, -0.0));
    CHECK(vectorize(neg_zero_imag, VectorizationMode::kMagPhase)[1] == M_PI);
    CHECK((devectorize(v, VectorizationMode::kMagPhase) - s).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("vectorization round trip on random vectors") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXcd s(1 + trial);
        for (auto& z : s) z = {g(rng), g(rng)};
        CHECK(devectorize(vectorize(s, VectorizationMode::kRealImag), VectorizationMode::kRealImag) == s);
        CHECK((devectorize(vectorize(s, VectorizationMode::kMagPhase), VectorizationMode::kMagPhase) - s).cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK_THROWS_AS(devectorize(Eigen::VectorXd::Zero(3), VectorizationMode::kRealImag), FormatError);
}

TEST_CASE("column order is WCT-major, then slot, then SNR") {
    const SimConfig cfg = small_config(4);
    const SampleMatrix s = build_sample_matrix(cfg, VectorizationMode::kRealImag, 9);
    CHECK(s.s.rows() == 2 * cfg.n_des());
    CHECK(s.s.cols() == 5 * 4 * 3);
    std::mt19937_64 rng(1);
    const SrsSequence seq = gen_srs(cfg);
    for (int trial = 0; trial < 20; ++trial) {
        const auto c = std::uniform_int_distribution<std::uint64_t>(0, static_cast<std::uint64_t>(s.s.cols()) - 1)(rng);
        const ColumnMeta expect{static_cast<std::uint32_t>(c / 12), static_cast<std::uint32_t>((c / 3) % 4),
                                static_cast<std::uint32_t>(c % 3)};
        CHECK(s.meta[c] == expect);
        CHECK(column_meta_for(c, 4, 3) == expect);
        CHECK(column_index_for(expect, 4, 3) == c);
        const DescrambledSlot slot = simulate_slot(cfg, seq, expect.wct, expect.slot, expect.snr, 9);
        CHECK(s.s.col(static_cast<Eigen::Index>(c)) == vectorize(slot.s, VectorizationMode::kRealImag).cast<float>());
    }
}

TEST_CASE("a one-column matrix is well formed") {
    SimConfig cfg = small_config(1);
    cfg.wcts = {awgn_profile()};
    cfg.snr_grid_db = {kNoiselessSnrDb};
    const SampleMatrix s = build_sample_matrix(cfg, VectorizationMode::kRealImag, 1, 4);
    REQUIRE(s.s.cols() == 1);
    CHECK(s.s.col(0).head(cfg.n_des()).isOnes());
    CHECK(s.s.col(0).tail(cfg.n_des()).isZero());
}

TEST_CASE("generation is deterministic and independent of thread count") {
    const SimConfig cfg = small_config(5);
    const SampleMatrix a = build_sample_matrix(cfg, VectorizationMode::kRealImag, 77, 1);
    const SampleMatrix b = build_sample_matrix(cfg, VectorizationMode::kRealImag, 77, 4);
    const SampleMatrix c = build_sample_matrix(cfg, VectorizationMode::kRealImag, 77, 7);
    CHECK(a.s == b.s);
    CHECK(a.s == c.s);
    CHECK(a.meta == b.meta);
    const SampleMatrix d = build_sample_matrix(cfg, VectorizationMode::kRealImag, 78, 1);
    CHECK(a.s != d.s);
}

TEST_CASE("generation rejects invalid configurations") {
    SimConfig cfg = small_config();
    cfg.snr_grid_db.clear();
    CHECK_THROWS_AS(build_sample_matrix(cfg, VectorizationMode::kRealImag, 1), ConfigError);
}

TEST_CASE("split sizes") {
    ColumnMetaList meta;
    for (std::uint64_t c = 0; c < 77500; ++c) meta.push_back(column_meta_for(c, 500, 31));
    const SplitIndices s = split_indices(meta, 0.9, {true, 1});
    CHECK(s.train.size() == 69750);
    CHECK(s.infer.size() == 7750);
    const SplitIndices lit = split_indices(meta, 0.9, {false, 1});
    CHECK(lit.train.size() == 69750);
    CHECK(lit.train.back() == 69749);
    CHECK(lit.infer.front() == 69750);

    ColumnMetaList ten(meta.begin(), meta.begin() + 10);
    CHECK(split_indices(ten, 0.5).train.size() == 5);
    CHECK(split_indices(ten, 0.5).infer.size() == 5);
    CHECK_THROWS_AS(split_indices(ten, 1.0), ConfigError);
    CHECK_THROWS_AS(split_indices(ten, 0.0), ConfigError);
    CHECK_THROWS_AS(split_indices(ten, -0.1), ConfigError);
}

TEST_CASE("split is a partition of the columns for any alpha") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 40; ++trial) {
        const auto n_wct = std::uniform_int_distribution<std::uint32_t>(1, 6)(rng);
        const auto n_slot = std::uniform_int_distribution<std::uint32_t>(1, 30)(rng);
        const auto n_snr = std::uniform_int_distribution<std::uint32_t>(1, 8)(rng);
        const double alpha = std::uniform_real_distribution<double>(0.01, 0.99)(rng);
        ColumnMetaList meta;
        const std::uint64_t n = static_cast<std::uint64_t>(n_wct) * n_slot * n_snr;
        for (std::uint64_t c = 0; c < n; ++c) meta.push_back(column_meta_for(c, n_slot, n_snr));
        for (bool shuffle : {true, false}) {
            const SplitIndices s = split_indices(meta, alpha, {shuffle, static_cast<std::uint64_t>(trial)});
            std::set<std::size_t> all(s.train.begin(), s.train.end());
            all.insert(s.infer.begin(), s.infer.end());
            CHECK(all.size() == n);
            CHECK(s.train.size() + s.infer.size() == n);
            CHECK(s.train.size() == static_cast<std::size_t>(std::llround(alpha * static_cast<double>(n))));
        }
    }
}

TEST_CASE("shuffled split keeps every (WCT, SNR) group proportionally represented") {
    ColumnMetaList meta;
    for (std::uint64_t c = 0; c < 77500; ++c) meta.push_back(column_meta_for(c, 500, 31));
    const SplitIndices s = split_indices(meta, 0.9, {true, 4});
    std::map<std::pair<std::uint32_t, std::uint32_t>, int> infer_count;
    for (auto i : s.infer) ++infer_count[{meta[i].wct, meta[i].snr}];
    CHECK(infer_count.size() == 5 * 31);
    for (const auto& [key, count] : infer_count) CHECK(count == 50);

    const SplitIndices other = split_indices(meta, 0.9, {true, 5});
    CHECK(other.infer != s.infer);
    CHECK(split_indices(meta, 0.9, {true, 4}).infer == s.infer);
}

TEST_CASE("split carries the matching metadata") {
    const SimConfig cfg = small_config(4);
    const SampleMatrix s = build_sample_matrix(cfg, VectorizationMode::kRealImag, 2);
    const DatasetSplit sp = split(s, 0.75, {true, 3});
    REQUIRE(static_cast<std::size_t>(sp.train.cols()) == sp.train_meta.size());
    for (Eigen::Index i = 0; i < sp.train.cols(); ++i) {
        const auto c = column_index_for(sp.train_meta[static_cast<std::size_t>(i)], s.n_slot, s.n_snr);
        CHECK(sp.train.col(i) == s.s.col(static_cast<Eigen::Index>(c)));
    }
    for (Eigen::Index i = 0; i < sp.infer.cols(); ++i) {
        const auto c = column_index_for(sp.infer_meta[static_cast<std::size_t>(i)], s.n_slot, s.n_snr);
        CHECK(sp.infer.col(i) == s.s.col(static_cast<Eigen::Index>(c)));
    }
}

TEST_CASE("standardizer gives zero mean and unit variance") {
    Eigen::MatrixXf x(3, 4);
    x << 1, 2, 3, 4, 5, 5, 5, 5, -1, 1, -1, 1;
    const Standardizer st = Standardizer::fit(x);
    Eigen::MatrixXf y = x;
    st.apply(y);
    CHECK(std::abs(y.row(0).mean()) < 1e-6);
    CHECK(y.row(0).squaredNorm() / 4 == doctest::Approx(1.0));
    CHECK(y.row(1).isZero());
    CHECK(st.scale[1] == 1.0);
    CHECK(y.row(2).cwiseAbs().isOnes());
}

TEST_CASE("dataset save and load are bit exact") {
    for (auto scheme : {LabelScheme::kSingleTask, LabelScheme::kMultiTask}) {
        const Dataset ds = small_dataset(scheme);
        const fs::path p = temp_path("roundtrip.bin");
        save_dataset(ds, p.string());
        const Dataset back = load_dataset(p.string());
        CHECK(back.split.train == ds.split.train);
        CHECK(back.split.infer == ds.split.infer);
        CHECK(back.train_labels.e == ds.train_labels.e);
        CHECK(back.infer_labels.e == ds.infer_labels.e);
        CHECK(back.split.train_meta == ds.split.train_meta);
        CHECK(back.split.infer_meta == ds.split.infer_meta);
        CHECK(back.train_labels.layout == ds.train_labels.layout);
        CHECK(back.info.scheme == scheme);
        CHECK(back.info.seed == ds.info.seed);
        CHECK(back.info.sim.snr_grid_db == ds.info.sim.snr_grid_db);
        CHECK(back.info.sim.wcts.size() == 5);
        CHECK(back.split.alpha == ds.split.alpha);

        // saving the loaded copy reproduces the file
        const fs::path q = temp_path("roundtrip2.bin");
        save_dataset(back, q.string());
        CHECK(io::file_checksum(p.string()) == io::file_checksum(q.string()));
        fs::remove(p);
        fs::remove(q);
    }
}

TEST_CASE("header declares the payload layout") {
    const Dataset ds = small_dataset();
    const fs::path p = temp_path("header.bin");
    save_dataset(ds, p.string());
    std::ifstream in(p, std::ios::binary);
    const auto header = io::read_header(in, "WCTDSET1");
    CHECK(header.at("dims").at("train_samples").at(0) == 768);
    CHECK(header.at("dims").at("train_samples").at(1) == ds.split.train.cols());
    CHECK(header.at("dims").at("train_labels").at(0) == 5);
    CHECK(header.at("mode") == "reim");
    CHECK(header.at("alpha") == 0.9);
    CHECK(header.at("wct_names").size() == 5);
    fs::remove(p);
}

TEST_CASE("corrupt dataset files are rejected") {
    const Dataset ds = small_dataset();
    const fs::path p = temp_path("corrupt.bin");
    save_dataset(ds, p.string());
    const auto size = fs::file_size(p);

    SUBCASE("truncated") {
        fs::resize_file(p, size - 7);
        CHECK_THROWS_AS(load_dataset(p.string()), FormatError);
    }
    SUBCASE("padded") {
        std::ofstream(p, std::ios::binary | std::ios::app) << "xx";
        CHECK_THROWS_AS(load_dataset(p.string()), FormatError);
    }
    SUBCASE("bad magic") {
        std::fstream f(p, std::ios::binary | std::ios::in | std::ios::out);
        f.write("XXXXXXXX", 8);
        f.close();
        CHECK_THROWS_AS(load_dataset(p.string()), FormatError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_dataset((p.string() + ".absent")), FormatError);
    }
    fs::remove(p);
}

TEST_CASE("saving mismatched samples and labels is refused") {
    Dataset ds = small_dataset();
    ds.train_labels.e.conservativeResize(Eigen::NoChange, ds.train_labels.e.cols() - 1);
    CHECK_THROWS_AS(save_dataset(ds, temp_path("mismatch.bin").string()), ConfigError);
}

TEST_CASE("full reference dimensions") {
    // Labels and split only; the sample matrix itself is covered by the acceptance run.
    const SimConfig cfg = reference_config();
    CHECK(2 * cfg.n_des() == 768);
    CHECK(cfg.wcts.size() * static_cast<std::size_t>(cfg.n_slots_per_snr) * cfg.snr_grid_db.size() == 77500);
}

TEST_CASE("a noiseless SNR grid point survives the file round trip") {
    LabConfig lc;
    lc.sim = small_config(4);
    lc.sim.snr_grid_db = {5.0, kNoiselessSnrDb};
    const Dataset ds = generate_dataset(lc, 1);
    const fs::path p = temp_path("noiseless.bin");
    save_dataset(ds, p.string());
    const Dataset back = load_dataset(p.string());
    REQUIRE(back.info.sim.snr_grid_db.size() == 2);
    CHECK(std::isinf(back.info.sim.snr_grid_db[1]));
    fs::remove(p);
}
