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

#include "wctlab/channel.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <regex>
#include <sstream>

#include "wctlab/error.hpp"
#include "wctlab/random.hpp"

namespace wct {

namespace {

constexpr double kPi = std::numbers::pi;

// Extended Pedestrian A / Vehicular A / Typical Urban tapped-delay lines,
// 3GPP TS 36.101 Annex B.2.1 (excess tap delay in ns, relative power in dB).
const std::vector<double> kEpaDelaysNs = {0, 30, 70, 90, 110, 190, 410};
const std::vector<double> kEpaPowersDb = {0.0, -1.0, -2.0, -3.0, -8.0, -17.2, -20.8};

const std::vector<double> kEvaDelaysNs = {0, 30, 150, 310, 370, 710, 1090, 1730, 2510};
const std::vector<double> kEvaPowersDb = {0.0, -1.5, -1.4, -3.6, -0.6, -9.1, -7.0, -12.0, -16.9};

const std::vector<double> kEtuDelaysNs = {0, 50, 120, 200, 230, 500, 1600, 2300, 5000};
const std::vector<double> kEtuPowersDb = {-1.0, -1.0, -1.0, 0.0, 0.0, 0.0, -3.0, -5.0, -7.0};

enum Family : std::uint32_t { kAwgn = 0, kEpa = 1, kEva = 2, kEtu = 3 };

std::uint32_t seed_domain_for(Family family, RxCorrelation corr) {
    return family * 4 + static_cast<std::uint32_t>(corr);
}

std::string correlation_suffix(RxCorrelation corr) {
    return corr == RxCorrelation::kNone ? "" : " " + to_string(corr) + " correlation";
}

std::string doppler_label(double doppler_hz) {
    std::ostringstream os;
    os << doppler_hz;
    return os.str();
}

} // namespace

std::string to_string(RxCorrelation c) {
    switch (c) {
        case RxCorrelation::kNone: return "none";
        case RxCorrelation::kLow: return "low";
        case RxCorrelation::kHigh: return "high";
    }
    return "?";
}

RxCorrelation rx_correlation_from_string(const std::string& s) {
    if (s == "none") return RxCorrelation::kNone;
    if (s == "low") return RxCorrelation::kLow;
    if (s == "high") return RxCorrelation::kHigh;
    throw ConfigError("unknown rx correlation level '" + s + "' (expected none|low|high)");
}

double correlation_alpha(RxCorrelation level) {
    return level == RxCorrelation::kHigh ? 0.9 : 0.0;
}

double ChannelProfile::rms_delay_spread_s() const {
    double p = 0.0, m1 = 0.0, m2 = 0.0;
    for (const auto& t : taps) {
        p += t.power;
        m1 += t.power * t.delay_s;
        m2 += t.power * t.delay_s * t.delay_s;
    }
    if (p <= 0.0) return 0.0;
    m1 /= p;
    m2 /= p;
    return std::sqrt(std::max(0.0, m2 - m1 * m1));
}

void ChannelProfile::validate() const {
    if (taps.empty()) throw ConfigError("profile '" + name + "': no taps");
    if (taps.front().delay_s != 0.0) throw ConfigError("profile '" + name + "': first tap delay must be 0");
    double total = 0.0;
    for (std::size_t i = 0; i < taps.size(); ++i) {
        if (!(taps[i].power > 0.0)) throw ConfigError("profile '" + name + "': tap power must be positive");
        if (i > 0 && !(taps[i].delay_s > taps[i - 1].delay_s))
            throw ConfigError("profile '" + name + "': tap delays must be strictly increasing");
        total += taps[i].power;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("profile '" + name + "': tap powers must sum to 1");
    if (!(doppler_hz >= 0.0)) throw ConfigError("profile '" + name + "': doppler must be >= 0");
}

ChannelProfile make_profile(std::string name, const std::vector<double>& delays_ns,
                            const std::vector<double>& powers_db, double doppler_hz,
                            RxCorrelation corr, std::uint32_t seed_domain) {
    if (delays_ns.size() != powers_db.size() || delays_ns.empty())
        throw ConfigError("profile '" + name + "': delays and powers must be non-empty and equal length");
    ChannelProfile p;
    p.name = std::move(name);
    p.doppler_hz = doppler_hz;
    p.rx_correlation = corr;
    p.seed_domain = seed_domain;
    double total = 0.0;
    for (double db : powers_db) total += std::pow(10.0, db / 10.0);
    for (std::size_t i = 0; i < delays_ns.size(); ++i)
        p.taps.push_back({delays_ns[i] * 1e-9, std::pow(10.0, powers_db[i] / 10.0) / total});
    p.validate();
    return p;
}

ChannelProfile awgn_profile() {
    ChannelProfile p;
    p.name = "AWGN";
    p.taps = {{0.0, 1.0}};
    p.seed_domain = seed_domain_for(kAwgn, RxCorrelation::kNone);
    return p;
}

ChannelProfile epa_profile(double doppler_hz, RxCorrelation corr) {
    return make_profile("EPA" + doppler_label(doppler_hz) + correlation_suffix(corr), kEpaDelaysNs,
                        kEpaPowersDb, doppler_hz, corr, seed_domain_for(kEpa, corr));
}

ChannelProfile eva_profile(double doppler_hz, RxCorrelation corr) {
    return make_profile("EVA" + doppler_label(doppler_hz) + correlation_suffix(corr), kEvaDelaysNs,
                        kEvaPowersDb, doppler_hz, corr, seed_domain_for(kEva, corr));
}

ChannelProfile etu_profile(double doppler_hz, RxCorrelation corr) {
    return make_profile("ETU" + doppler_label(doppler_hz) + correlation_suffix(corr), kEtuDelaysNs,
                        kEtuPowersDb, doppler_hz, corr, seed_domain_for(kEtu, corr));
}

ChannelProfile profile_from_name(const std::string& name) {
    if (name == "AWGN") return awgn_profile();
    static const std::regex re(R"((EPA|EVA|ETU)([0-9]+(?:\.[0-9]+)?)(?: (none|low|high) correlation)?)");
    std::smatch m;
    if (!std::regex_match(name, m, re)) throw ConfigError("unknown channel type '" + name + "'");
    const double doppler = std::stod(m[2].str());
    const RxCorrelation corr = m[3].matched ? rx_correlation_from_string(m[3].str()) : RxCorrelation::kNone;
    const std::string family = m[1].str();
    if (family == "EPA") return epa_profile(doppler, corr);
    if (family == "EVA") return eva_profile(doppler, corr);
    return etu_profile(doppler, corr);
}

std::vector<ChannelProfile> make_standard_profiles() {
    return {awgn_profile(), epa_profile(5, RxCorrelation::kLow), epa_profile(5, RxCorrelation::kHigh),
            eva_profile(5, RxCorrelation::kLow), eva_profile(5, RxCorrelation::kHigh)};
}

void SimConfig::validate() const {
    if (n_rb < 1) throw ConfigError("n_rb must be >= 1");
    if (n_sym < 1) throw ConfigError("n_sym must be >= 1");
    if (n_rx < 1) throw ConfigError("n_rx must be >= 1");
    if (comb != 1 && comb != 2 && comb != 4) throw ConfigError("comb must be 1, 2 or 4");
    if ((n_rb * 12) % comb != 0) throw ConfigError("n_rb * 12 must be divisible by comb");
    if (!(subcarrier_spacing_hz > 0.0)) throw ConfigError("subcarrier_spacing_hz must be positive");
    if (!(slot_duration_s > 0.0)) throw ConfigError("slot_duration_s must be positive");
    if (n_slots_per_snr < 1) throw ConfigError("n_slots_per_snr must be >= 1");
    if (snr_grid_db.empty()) throw ConfigError("snr grid is empty");
    if (wcts.empty()) throw ConfigError("no channel types configured");
    for (std::size_t i = 0; i < wcts.size(); ++i) {
        wcts[i].validate();
        for (std::size_t j = 0; j < i; ++j)
            if (wcts[i].name == wcts[j].name) throw ConfigError("duplicate channel type '" + wcts[i].name + "'");
    }
}

SimConfig reference_config() {
    SimConfig cfg;
    for (int snr = 0; snr <= 30; ++snr) cfg.snr_grid_db.push_back(snr);
    cfg.wcts = make_standard_profiles();
    return cfg;
}

FadingProcess::FadingProcess(const ChannelProfile& profile, int n_rx, std::uint64_t seed)
    : n_rx_(n_rx), doppler_hz_(profile.doppler_hz) {
    const int n_taps = static_cast<int>(profile.taps.size());
    for (const auto& t : profile.taps) amp_.push_back(std::sqrt(t.power));
    freq_.resize(n_rx * n_taps, kSinusoids);
    phase_.resize(n_rx * n_taps, kSinusoids);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-kPi, kPi);
    // Arrival angles spread evenly around the circle with a random offset per
    // sinusoid; independent uniform phases.
    for (Eigen::Index row = 0; row < freq_.rows(); ++row) {
        for (int n = 0; n < kSinusoids; ++n) {
            const double theta = (2.0 * kPi * n + uni(rng)) / kSinusoids;
            freq_(row, n) = doppler_hz_ * std::cos(theta);
            phase_(row, n) = uni(rng);
        }
    }
}

std::complex<double> FadingProcess::gain(int rx, int tap, double t) const {
    const Eigen::Index row = static_cast<Eigen::Index>(rx) * n_taps() + tap;
    std::complex<double> acc = 0.0;
    for (int n = 0; n < kSinusoids; ++n) acc += std::polar(1.0, 2.0 * kPi * freq_(row, n) * t + phase_(row, n));
    return acc / std::sqrt(static_cast<double>(kSinusoids));
}

Eigen::MatrixXcd FadingProcess::taps_at(double t) const {
    Eigen::MatrixXcd g(n_rx_, n_taps());
    for (int rx = 0; rx < n_rx_; ++rx)
        for (int l = 0; l < n_taps(); ++l) g(rx, l) = amp_[l] * gain(rx, l, t);
    return g;
}

Eigen::MatrixXd rx_correlation_matrix(RxCorrelation level, int n_rx) {
    const double a = correlation_alpha(level);
    Eigen::MatrixXd r(n_rx, n_rx);
    for (int i = 0; i < n_rx; ++i)
        for (int j = 0; j < n_rx; ++j) r(i, j) = std::pow(a, std::abs(i - j));
    return r;
}

Eigen::VectorXcd apply_rx_correlation(const Eigen::VectorXcd& h_uncorrelated, RxCorrelation level, int n_rx) {
    if (n_rx < 1) throw ConfigError("n_rx must be >= 1");
    if (h_uncorrelated.size() % n_rx != 0) throw ConfigError("channel tensor size is not a multiple of n_rx");
    if (level == RxCorrelation::kNone || n_rx == 1) return h_uncorrelated;

    const Eigen::MatrixXd r = rx_correlation_matrix(level, n_rx);
    Eigen::LLT<Eigen::MatrixXd> llt(r);
    if (llt.info() != Eigen::Success) throw ConfigError("rx correlation matrix is not positive definite");
    const Eigen::MatrixXcd lower = llt.matrixL().toDenseMatrix().cast<std::complex<double>>();

    // Rx-major layout: column rx of this view is that antenna's (symbol, subcarrier) block.
    const Eigen::Index per_rx = h_uncorrelated.size() / n_rx;
    Eigen::Map<const Eigen::MatrixXcd> in(h_uncorrelated.data(), per_rx, n_rx);
    Eigen::VectorXcd out(h_uncorrelated.size());
    Eigen::Map<Eigen::MatrixXcd> colored(out.data(), per_rx, n_rx);
    colored.noalias() = in * lower.transpose();
    return out;
}

ChannelRealization realize_channel(const ChannelProfile& profile, const SimConfig& cfg,
                                   std::int64_t slot_index, std::uint64_t seed) {
    if (slot_index < 0) throw ConfigError("slot_index must be >= 0");
    ChannelRealization out;
    out.n_rx = cfg.n_rx;
    out.n_sym = cfg.n_sym;
    out.n_sc = cfg.n_subcarriers();
    out.profile_name = profile.name;
    out.slot_index = slot_index;
    out.rng_seed = seed;

    const Eigen::Index total = static_cast<Eigen::Index>(out.n_rx) * out.n_sym * out.n_sc;
    if (profile.is_static() && profile.taps.front().delay_s == 0.0 && profile.rx_correlation == RxCorrelation::kNone) {
        out.h = Eigen::VectorXcd::Ones(total);
        return out;
    }

    const double pilot_spacing_hz = cfg.comb * cfg.subcarrier_spacing_hz;
    if (profile.max_delay_s() * pilot_spacing_hz >= 1.0)
        throw ConfigError("profile '" + profile.name + "': max delay aliases at pilot spacing " +
                          std::to_string(pilot_spacing_hz) + " Hz");

    // steering(k, l) = exp(-j 2 pi f_k tau_l) over the active (comb-decimated) subcarriers
    const int n_taps = static_cast<int>(profile.taps.size());
    Eigen::MatrixXcd steering(out.n_sc, n_taps);
    for (int k = 0; k < out.n_sc; ++k)
        for (int l = 0; l < n_taps; ++l)
            steering(k, l) = std::polar(1.0, -2.0 * kPi * k * pilot_spacing_hz * profile.taps[l].delay_s);

    const FadingProcess process(profile, cfg.n_rx, derive_seed(seed, {profile.seed_domain}));
    Eigen::VectorXcd raw(total);
    for (int sym = 0; sym < out.n_sym; ++sym) {
        const double t = static_cast<double>(slot_index) * cfg.slot_duration_s + sym * cfg.symbol_duration_s();
        const Eigen::MatrixXcd freq = process.taps_at(t) * steering.transpose();  // n_rx x n_sc
        for (int rx = 0; rx < out.n_rx; ++rx)
            raw.segment(out.index(rx, sym, 0), out.n_sc) = freq.row(rx).transpose();
    }
    out.h = apply_rx_correlation(raw, profile.rx_correlation, cfg.n_rx);
    return out;
}

} // namespace wct
