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
#include <limits>

#include <Eigen/Dense>

#include "wctlab/channel.hpp"

namespace wct {

/// SNR sentinel that disables noise injection.
inline constexpr double kNoiselessSnrDb = std::numeric_limits<double>::infinity();

inline constexpr int kDefaultZcRoot = 25;

/// Largest prime not exceeding n (n >= 2).
int largest_prime_at_most(int n);

/// Zadoff-Chu sequence x_q(m) = exp(-j pi q m (m+1) / n_zc), m = 0..n_zc-1, n_zc odd.
Eigen::VectorXcd zadoff_chu(int root, int n_zc);

/// Known pilot over (symbol, active subcarrier), symbol-major; unit modulus.
struct SrsSequence {
    int n_sym = 0;
    int n_sc = 0;
    int root = kDefaultZcRoot;
    int zc_length = 0;
    Eigen::VectorXcd samples;

    const std::complex<double>& at(int sym, int sc) const { return samples[static_cast<Eigen::Index>(sym) * n_sc + sc]; }
};

/// Zadoff-Chu pilot of the largest prime length <= active subcarriers, cyclically
/// extended to the full width and repeated on every SRS symbol.
SrsSequence gen_srs(const SimConfig& cfg, int root = kDefaultZcRoot);

/// One descrambled slot, flattened rx-major, then symbol, then subcarrier.
struct DescrambledSlot {
    Eigen::VectorXcd s;
    int wct_index = 0;
    int slot_index = 0;
    int snr_index = 0;
    double snr_db = 0.0;
};

/// Received pilot y = h * x + n, with n ~ CN(0, 10^(-snr_db/10)).
Eigen::VectorXcd receive(const SrsSequence& seq, const ChannelRealization& h, double snr_db, std::uint64_t seed);

/// y * conj(x) per resource element.
Eigen::VectorXcd descramble(const Eigen::VectorXcd& y, const SrsSequence& seq, int n_rx);

/// Pilot through the channel plus AWGN, then descrambled. Uses the unit-modulus
/// identity y conj(x) = h + n conj(x), so a noiseless call returns h exactly.
DescrambledSlot transmit_descramble(const SrsSequence& seq, const ChannelRealization& h, double snr_db,
                                    std::uint64_t seed);

} // namespace wct
