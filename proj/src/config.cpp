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

#include "wctlab/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "wctlab/error.hpp"

namespace wct {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, _] : j.items()) {
        if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

double parse_snr(const json& v) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "+inf")) return kNoiselessSnrDb;
    throw ConfigError("snr_db entries must be numbers or \"inf\", got " + v.dump());
}

json snr_json(double snr) { return std::isinf(snr) ? json("inf") : json(snr); }

std::vector<double> parse_snr_grid(const json& j) {
    if (j.is_array()) {
        std::vector<double> grid;
        for (const auto& v : j) grid.push_back(parse_snr(v));
        return grid;
    }
    if (!j.is_object()) throw ConfigError("snr_db must be a list or {start, stop, step}");
    reject_unknown_keys(j, {"start", "stop", "step"}, "snr_db");
    const double start = j.at("start").get<double>();
    const double stop = j.at("stop").get<double>();
    const double step = get_or(j, "step", 1.0);
    if (!(step > 0.0) || stop < start) throw ConfigError("snr_db range must have step > 0 and stop >= start");
    std::vector<double> grid;
    const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    for (long i = 0; i <= n; ++i) grid.push_back(start + static_cast<double>(i) * step);
    return grid;
}

} // namespace

void to_json(json& j, const ChannelProfile& p) {
    json taps = json::array();
    for (const auto& t : p.taps) taps.push_back({{"delay_s", t.delay_s}, {"power", t.power}});
    j = json{{"name", p.name},
             {"taps", taps},
             {"doppler_hz", p.doppler_hz},
             {"rx_correlation", to_string(p.rx_correlation)},
             {"seed_domain", p.seed_domain}};
}

void from_json(const json& j, ChannelProfile& p) {
    if (j.is_string()) {
        p = profile_from_name(j.get<std::string>());
        return;
    }
    if (!j.is_object()) throw ConfigError("channel type must be a name or an object");
    reject_unknown_keys(j, {"name", "taps", "delays_ns", "powers_db", "doppler_hz", "rx_correlation", "seed_domain"},
                        "channel type");
    try {
        const auto name = j.at("name").get<std::string>();
        const double doppler = get_or(j, "doppler_hz", 0.0);
        const auto corr = rx_correlation_from_string(get_or<std::string>(j, "rx_correlation", "none"));
        const auto domain = get_or<std::uint32_t>(j, "seed_domain", 0);
        if (j.contains("taps")) {
            p = ChannelProfile{};
            p.name = name;
            for (const auto& t : j.at("taps")) p.taps.push_back({t.at("delay_s").get<double>(), t.at("power").get<double>()});
            p.doppler_hz = doppler;
            p.rx_correlation = corr;
            p.seed_domain = domain;
            p.validate();
        } else {
            p = make_profile(name, j.at("delays_ns").get<std::vector<double>>(),
                             j.at("powers_db").get<std::vector<double>>(), doppler, corr, domain);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad channel type: ") + e.what());
    }
}

void to_json(json& j, const SimConfig& c) {
    json snr_grid = json::array();
    for (double snr : c.snr_grid_db) snr_grid.push_back(snr_json(snr));
    j = json{{"n_rb", c.n_rb},
             {"n_sym", c.n_sym},
             {"n_rx", c.n_rx},
             {"comb", c.comb},
             {"subcarrier_spacing_hz", c.subcarrier_spacing_hz},
             {"slot_duration_s", c.slot_duration_s},
             {"snr_db", snr_grid},
             {"n_slots_per_snr", c.n_slots_per_snr},
             {"wcts", c.wcts},
             {"independent_slots", c.independent_slots}};
}

void from_json(const json& j, SimConfig& c) {
    c = SimConfig{};
    c.n_rb = get_or(j, "n_rb", c.n_rb);
    c.n_sym = get_or(j, "n_sym", c.n_sym);
    c.n_rx = get_or(j, "n_rx", c.n_rx);
    c.comb = get_or(j, "comb", c.comb);
    c.subcarrier_spacing_hz = get_or(j, "subcarrier_spacing_hz", c.subcarrier_spacing_hz);
    c.slot_duration_s = get_or(j, "slot_duration_s", c.slot_duration_s);
    c.n_slots_per_snr = get_or(j, "n_slots_per_snr", c.n_slots_per_snr);
    c.independent_slots = get_or(j, "independent_slots", c.independent_slots);
    if (!j.contains("snr_db")) throw ConfigError("missing key 'snr_db'");
    c.snr_grid_db = parse_snr_grid(j.at("snr_db"));
    if (!j.contains("wcts")) throw ConfigError("missing key 'wcts'");
    for (const auto& w : j.at("wcts")) c.wcts.push_back(w.get<ChannelProfile>());
    c.validate();
}

void to_json(json& j, const TaskLayout& l) {
    j = json::array();
    for (const auto& t : l.tasks) j.push_back({{"feature", t.feature}, {"classes", t.classes}, {"keys", t.keys}});
}

void from_json(const json& j, TaskLayout& l) {
    l.tasks.clear();
    for (const auto& t : j) {
        Task task{t.at("feature").get<std::string>(), t.at("classes").get<std::vector<std::string>>(), {}};
        // JSON has no infinity; a null key stands for it.
        for (const auto& k : t.at("keys"))
            task.keys.push_back(k.is_null() ? std::numeric_limits<double>::infinity() : k.get<double>());
        if (task.keys.size() != task.classes.size()) throw FormatError("task '" + task.feature + "': keys and classes differ in length");
        l.tasks.push_back(std::move(task));
    }
}

LabConfig parse_lab_config(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown_keys(j,
                        {"n_rb", "n_sym", "n_rx", "comb", "subcarrier_spacing_hz", "slot_duration_s", "snr_db",
                         "n_slots_per_snr", "wcts", "independent_slots", "alpha", "shuffle", "mode", "scheme",
                         "feature_convention", "zc_root", "seed", "comment"},
                        "config");
    LabConfig c;
    try {
        c.sim = j.get<SimConfig>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    c.alpha = get_or(j, "alpha", c.alpha);
    if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ConfigError("alpha must lie strictly between 0 and 1");
    c.shuffle = get_or(j, "shuffle", c.shuffle);
    c.mode = vectorization_mode_from_string(get_or<std::string>(j, "mode", to_string(c.mode)));
    c.scheme = label_scheme_from_string(get_or<std::string>(j, "scheme", to_string(c.scheme)));
    c.convention = feature_convention_from_string(get_or<std::string>(j, "feature_convention", to_string(c.convention)));
    c.zc_root = get_or(j, "zc_root", c.zc_root);
    c.seed = get_or(j, "seed", c.seed);
    return c;
}

LabConfig load_lab_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::exception& e) {
        throw ConfigError("config " + path + " is not valid JSON: " + e.what());
    }
    return parse_lab_config(j);
}

} // namespace wct
