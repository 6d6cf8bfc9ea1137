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

#include "wctlab/config.hpp"
#include "wctlab/error.hpp"

#ifndef WCTLAB_SOURCE_DIR
#error "WCTLAB_SOURCE_DIR must be defined"
#endif

using namespace wct;
using nlohmann::json;

TEST_CASE("bundled configurations load") {
    const LabConfig ref = load_lab_config(std::string(WCTLAB_SOURCE_DIR) + "/configs/reference.json");
    CHECK(ref.sim.n_slots_per_snr == 500);
    CHECK(ref.sim.snr_grid_db.size() == 31);
    CHECK(ref.sim.snr_grid_db.front() == 0.0);
    CHECK(ref.sim.snr_grid_db.back() == 30.0);
    CHECK(ref.sim.wcts.size() == 5);
    CHECK(ref.sim.n_des() == 384);
    CHECK(ref.alpha == 0.9);
    const LabConfig desk = load_lab_config(std::string(WCTLAB_SOURCE_DIR) + "/configs/desk.json");
    CHECK(desk.sim.n_slots_per_snr == 100);
}

TEST_CASE("SNR grid forms") {
    const json base = json::parse(R"({"wcts": ["AWGN"], "snr_db": [0, 5, "inf"]})");
    const LabConfig c = parse_lab_config(base);
    CHECK(c.sim.snr_grid_db.size() == 3);
    CHECK(std::isinf(c.sim.snr_grid_db[2]));
    json range = base;
    range["snr_db"] = {{"start", -4}, {"stop", 4}, {"step", 2}};
    CHECK(parse_lab_config(range).sim.snr_grid_db == std::vector<double>{-4, -2, 0, 2, 4});
}

TEST_CASE("custom channel types") {
    const json j = json::parse(R"({
        "snr_db": [0],
        "wcts": [{"name": "two-ray", "delays_ns": [0, 100], "powers_db": [0, -3], "doppler_hz": 10,
                  "rx_correlation": "high", "seed_domain": 9}]})");
    const LabConfig c = parse_lab_config(j);
    REQUIRE(c.sim.wcts.size() == 1);
    const auto& p = c.sim.wcts[0];
    CHECK(p.taps.size() == 2);
    CHECK(p.taps[0].power + p.taps[1].power == doctest::Approx(1.0));
    CHECK(p.taps[1].power / p.taps[0].power == doctest::Approx(std::pow(10.0, -0.3)));
    CHECK(p.rx_correlation == RxCorrelation::kHigh);

    // profile JSON round trip
    const json pj = p;
    const ChannelProfile back = pj.get<ChannelProfile>();
    CHECK(back.taps.size() == 2);
    CHECK(back.taps[1].delay_s == p.taps[1].delay_s);
    CHECK(back.seed_domain == 9);
}

TEST_CASE("configuration errors") {
    CHECK_THROWS_AS(parse_lab_config(json::parse(R"({"wcts": ["AWGN"], "snr_db": [0], "n_rbs": 3})")), ConfigError);
    CHECK_THROWS_AS(parse_lab_config(json::parse(R"({"wcts": ["AWGN"], "snr_db": [0], "alpha": 1.5})")), ConfigError);
    CHECK_THROWS_AS(parse_lab_config(json::parse(R"({"wcts": ["QQQ"], "snr_db": [0]})")), ConfigError);
    CHECK_THROWS_AS(parse_lab_config(json::parse(R"({"wcts": ["AWGN"], "snr_db": [0], "mode": "polar"})")), ConfigError);
    CHECK_THROWS_AS(parse_lab_config(json::parse(R"({"wcts": ["AWGN", "AWGN"], "snr_db": [0]})")), ConfigError);
    CHECK_THROWS_AS(load_lab_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("simulation config JSON round trip") {
    SimConfig cfg = reference_config();
    cfg.n_slots_per_snr = 7;
    const json j = cfg;
    const SimConfig back = j.get<SimConfig>();
    CHECK(back.n_slots_per_snr == 7);
    CHECK(back.snr_grid_db == cfg.snr_grid_db);
    CHECK(back.wcts.size() == cfg.wcts.size());
    for (std::size_t i = 0; i < cfg.wcts.size(); ++i) {
        CHECK(back.wcts[i].name == cfg.wcts[i].name);
        CHECK(back.wcts[i].rms_delay_spread_s() == cfg.wcts[i].rms_delay_spread_s());
    }
}
