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

#include "wctlab/srs.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "wctlab/error.hpp"

namespace wct {

namespace {

void check_compatible(const SrsSequence& seq, const ChannelRealization& h) {
    if (seq.n_sym != h.n_sym || seq.n_sc != h.n_sc || h.h.size() != static_cast<Eigen::Index>(h.n_rx) * h.n_sym * h.n_sc)
        throw ConfigError("SRS sequence and channel realization dimensions differ");
}

// Pilot entry for flat index i of an (rx, symbol, subcarrier) tensor.
const std::complex<double>& pilot_at(const SrsSequence& seq, Eigen::Index i) {
    return seq.samples[i % seq.samples.size()];
}

Eigen::VectorXcd noise(Eigen::Index n, double snr_db, std::uint64_t seed) {
    Eigen::VectorXcd out(n);
    const double sigma = std::sqrt(std::pow(10.0, -snr_db / 10.0) / 2.0);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, sigma);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        out[i] = {re, im};
    }
    return out;
}

} // namespace

int largest_prime_at_most(int n) {
    for (int p = n; p >= 2; --p) {
        bool prime = true;
        for (int d = 2; d * d <= p; ++d) {
            if (p % d == 0) {
                prime = false;
                break;
            }
        }
        if (prime) return p;
    }
    throw ConfigError("no prime <= " + std::to_string(n));
}

Eigen::VectorXcd zadoff_chu(int root, int n_zc) {
    if (n_zc < 1 || n_zc % 2 == 0) throw ConfigError("Zadoff-Chu length must be odd and positive");
    if (std::gcd(root, n_zc) != 1) throw ConfigError("Zadoff-Chu root must be coprime with the length");
    Eigen::VectorXcd x(n_zc);
    for (int m = 0; m < n_zc; ++m) {
        // Reduce q m (m+1) mod 2 n_zc in integers so the phase argument stays small.
        const auto k = (static_cast<std::int64_t>(root) * m * (m + 1)) % (2 * static_cast<std::int64_t>(n_zc));
        x[m] = std::polar(1.0, -std::numbers::pi * static_cast<double>(k) / n_zc);
    }
    return x;
}

SrsSequence gen_srs(const SimConfig& cfg, int root) {
    SrsSequence seq;
    seq.n_sym = cfg.n_sym;
    seq.n_sc = cfg.n_subcarriers();
    if (seq.n_sc < 3) throw ConfigError("SRS needs at least 3 active subcarriers");
    seq.root = root;
    seq.zc_length = largest_prime_at_most(seq.n_sc);
    const Eigen::VectorXcd base = zadoff_chu(root, seq.zc_length);
    seq.samples.resize(static_cast<Eigen::Index>(seq.n_sym) * seq.n_sc);
    for (int sym = 0; sym < seq.n_sym; ++sym)
        for (int k = 0; k < seq.n_sc; ++k) seq.samples[static_cast<Eigen::Index>(sym) * seq.n_sc + k] = base[k % seq.zc_length];
    return seq;
}

Eigen::VectorXcd receive(const SrsSequence& seq, const ChannelRealization& h, double snr_db, std::uint64_t seed) {
    check_compatible(seq, h);
    Eigen::VectorXcd y(h.h.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = h.h[i] * pilot_at(seq, i);
    if (!std::isinf(snr_db)) y += noise(y.size(), snr_db, seed);
    return y;
}

Eigen::VectorXcd descramble(const Eigen::VectorXcd& y, const SrsSequence& seq, int n_rx) {
    if (y.size() != seq.samples.size() * n_rx) throw ConfigError("received vector length does not match the SRS");
    Eigen::VectorXcd s(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) s[i] = y[i] * std::conj(pilot_at(seq, i));
    return s;
}

DescrambledSlot transmit_descramble(const SrsSequence& seq, const ChannelRealization& h, double snr_db,
                                    std::uint64_t seed) {
    check_compatible(seq, h);
    if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity())
        throw ConfigError("SNR must be finite or +inf");
    DescrambledSlot out;
    out.snr_db = snr_db;
    out.s = h.h;
    if (!std::isinf(snr_db)) {
        const Eigen::VectorXcd n = noise(h.h.size(), snr_db, seed);
        for (Eigen::Index i = 0; i < n.size(); ++i) out.s[i] += n[i] * std::conj(pilot_at(seq, i));
    }
    return out;
}

} // namespace wct
