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

#include <json.hpp>

#include "wctlab/channel.hpp"
#include "wctlab/dataset.hpp"
#include "wctlab/labeling.hpp"

namespace wct {

void to_json(nlohmann::json& j, const ChannelProfile& p);
void from_json(const nlohmann::json& j, ChannelProfile& p);
void to_json(nlohmann::json& j, const SimConfig& c);
void from_json(const nlohmann::json& j, SimConfig& c);
void to_json(nlohmann::json& j, const TaskLayout& l);
void from_json(const nlohmann::json& j, TaskLayout& l);

/// Contents of a lab config file: simulation settings plus dataset options.
struct LabConfig {
    SimConfig sim;
    double alpha = 0.9;
    bool shuffle = true;
    VectorizationMode mode = VectorizationMode::kRealImag;
    LabelScheme scheme = LabelScheme::kSingleTask;
    FeatureConvention convention = FeatureConvention::kDistinctNone;
    int zc_root = kDefaultZcRoot;
    std::uint64_t seed = 1;
};

/// Throws ConfigError on unknown keys, bad values or violated invariants.
LabConfig parse_lab_config(const nlohmann::json& j);
LabConfig load_lab_config(const std::string& path);

} // namespace wct
