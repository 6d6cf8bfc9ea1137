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

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace wct {

enum class RxCorrelation { kNone, kLow, kHigh };

std::string to_string(RxCorrelation c);
RxCorrelation rx_correlation_from_string(const std::string& s);

/// Exponential-model correlation coefficient for a level: 0 for None/Low, 0.9 for High.
double correlation_alpha(RxCorrelation level);

struct Tap {
    double delay_s;
    double power;  ///< linear, relative
};

/// One wireless channel type: tapped-delay-line power profile, Doppler and
/// Rx antenna correlation.
struct ChannelProfile {
    std::string name;
    std::vector<Tap> taps;
    double doppler_hz = 0.0;
    RxCorrelation rx_correlation = RxCorrelation::kNone;
    std::uint32_t seed_domain = 0;

    bool is_static() const { return taps.size() == 1 && doppler_hz == 0.0; }
    double rms_delay_spread_s() const;
    double max_delay_s() const { return taps.empty() ? 0.0 : taps.back().delay_s; }

    /// Throws ConfigError if the tap invariants do not hold.
    void validate() const;
};

/// Builds a profile from delays (ns) and powers (dB); powers are normalized to sum 1.
ChannelProfile make_profile(std::string name, const std::vector<double>& delays_ns,
                            const std::vector<double>& powers_db, double doppler_hz,
                            RxCorrelation corr, std::uint32_t seed_domain);

ChannelProfile awgn_profile();
ChannelProfile epa_profile(double doppler_hz, RxCorrelation corr);
ChannelProfile eva_profile(double doppler_hz, RxCorrelation corr);
ChannelProfile etu_profile(double doppler_hz, RxCorrelation corr);

/// Parses names such as "AWGN", "EPA5 low correlation", "EVA70 high correlation".
ChannelProfile profile_from_name(const std::string& name);

/// AWGN, EPA5 low/high correlation, EVA5 low/high correlation.
std::vector<ChannelProfile> make_standard_profiles();

struct SimConfig {
    int n_rb = 16;
    int n_sym = 2;
    int n_rx = 2;
    int comb = 2;
    double subcarrier_spacing_hz = 30e3;
    double slot_duration_s = 0.5e-3;
    std::vector<double> snr_grid_db;
    int n_slots_per_snr = 500;
    std::vector<ChannelProfile> wcts;
    /// When false, all slots of one (WCT, SNR) sequence share a fading process
    /// and advance in time; when true, every slot draws an independent process.
    bool independent_slots = true;

    int n_subcarriers() const { return n_rb * 12 / comb; }
    int n_des() const { return n_subcarriers() * n_sym * n_rx; }
    double symbol_duration_s() const { return slot_duration_s / 14.0; }

    /// Throws ConfigError on any violated invariant.
    void validate() const;
};

/// Reference setup: 16 RBs, 2 SRS symbols, 31 SNRs (0..30 dB), 500 slots, five WCTs.
SimConfig reference_config();

/// Complex gain tensor indexed (rx, symbol, subcarrier), flattened rx-major,
/// then symbol, then subcarrier.
struct ChannelRealization {
    int n_rx = 0;
    int n_sym = 0;
    int n_sc = 0;
    Eigen::VectorXcd h;
    std::string profile_name;
    std::int64_t slot_index = 0;
    std::uint64_t rng_seed = 0;

    Eigen::Index index(int rx, int sym, int sc) const {
        return (static_cast<Eigen::Index>(rx) * n_sym + sym) * n_sc + sc;
    }
    std::complex<double>& at(int rx, int sym, int sc) { return h[index(rx, sym, sc)]; }
    const std::complex<double>& at(int rx, int sym, int sc) const { return h[index(rx, sym, sc)]; }
};

/// Sum-of-sinusoids Rayleigh process for every (rx antenna, tap) pair of a
/// profile. Tap gains are unit power before scaling by the tap's mean power;
/// antennas are mutually independent (correlation is applied afterwards).
class FadingProcess {
public:
    static constexpr int kSinusoids = 32;

    FadingProcess(const ChannelProfile& profile, int n_rx, std::uint64_t seed);

    /// Tap gains at time t: n_rx x n_taps, scaled by sqrt(tap power).
    Eigen::MatrixXcd taps_at(double t) const;

    /// Unit-power gain of one (rx, tap) pair at time t.
    std::complex<double> gain(int rx, int tap, double t) const;

    int n_rx() const { return n_rx_; }
    int n_taps() const { return static_cast<int>(amp_.size()); }

private:
    int n_rx_;
    double doppler_hz_;
    std::vector<double> amp_;
    // Per (rx, tap): kSinusoids Doppler frequencies and phases.
    Eigen::MatrixXd freq_;
    Eigen::MatrixXd phase_;
};

/// Exponential correlation matrix R_ij = a^|i-j|, a = correlation_alpha(level).
Eigen::MatrixXd rx_correlation_matrix(RxCorrelation level, int n_rx);

/// Colors the Rx dimension of an (rx, symbol, subcarrier) tensor with R(level).
/// Throws ConfigError if R is not positive definite.
Eigen::VectorXcd apply_rx_correlation(const Eigen::VectorXcd& h_uncorrelated, RxCorrelation level,
                                      int n_rx);

/// Frequency-domain channel of one slot. Deterministic in (profile, cfg, slot, seed).
/// The fading process is seeded from (seed, profile.seed_domain) and sampled at
/// t = slot * slot_duration + symbol * symbol_duration.
ChannelRealization realize_channel(const ChannelProfile& profile, const SimConfig& cfg,
                                   std::int64_t slot_index, std::uint64_t seed);

} // namespace wct
