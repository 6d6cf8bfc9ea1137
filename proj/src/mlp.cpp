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

#include "wctlab/mlp.hpp"

#include <fstream>

#include <json.hpp>

#include "wctlab/config.hpp"
#include "wctlab/io.hpp"

namespace wct {

using nlohmann::json;

namespace {

const std::string kCheckpointMagic = "WCTMLP01";

json train_config_json(const TrainConfig& c) {
    return json{{"epochs", c.epochs},
                {"batch_size", c.batch_size},
                {"learning_rate", c.learning_rate},
                {"optimizer", to_string(c.optimizer)},
                {"beta1", c.beta1},
                {"beta2", c.beta2},
                {"epsilon", c.epsilon},
                {"init_seed", c.init_seed},
                {"hidden", c.hidden},
                {"metrics_every", c.metrics_every},
                {"activation", to_string(c.activation)},
                {"standardize", c.standardize}};
}

TrainConfig train_config_from(const json& j) {
    TrainConfig c;
    c.epochs = j.at("epochs").get<int>();
    c.batch_size = j.at("batch_size").get<int>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.optimizer = optimizer_from_string(j.at("optimizer").get<std::string>());
    c.beta1 = j.at("beta1").get<double>();
    c.beta2 = j.at("beta2").get<double>();
    c.epsilon = j.at("epsilon").get<double>();
    c.init_seed = j.at("init_seed").get<std::uint64_t>();
    c.hidden = j.at("hidden").get<std::array<int, 3>>();
    c.metrics_every = j.at("metrics_every").get<int>();
    c.activation = activation_from_string(j.at("activation").get<std::string>());
    c.standardize = j.at("standardize").get<bool>();
    return c;
}

Eigen::MatrixXf as_column(const Eigen::VectorXf& v) { return v; }

} // namespace

std::string to_string(Activation a) { return a == Activation::kRelu ? "relu" : "tanh"; }

Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::kRelu;
    if (s == "tanh") return Activation::kTanh;
    throw ConfigError("unknown activation '" + s + "' (expected relu|tanh)");
}

std::string to_string(OptimizerKind o) { return o == OptimizerKind::kAdam ? "adam" : "sgd"; }

OptimizerKind optimizer_from_string(const std::string& s) {
    if (s == "adam") return OptimizerKind::kAdam;
    if (s == "sgd") return OptimizerKind::kSgd;
    throw ConfigError("unknown optimizer '" + s + "' (expected adam|sgd)");
}

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (metrics_every < 1) throw ConfigError("metrics_every must be >= 1");
    for (int h : hidden)
        if (h < 1) throw ConfigError("hidden layer sizes must be >= 1");
    if (optimizer == OptimizerKind::kAdam && !(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && epsilon > 0.0))
        throw ConfigError("Adam needs 0 <= beta < 1 and epsilon > 0");
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    const auto& m = ckpt.model;
    m.validate();
    const bool standardized = m.input_mean.size() != 0;
    const json header{{"version", 1},
                      {"layer_dims", m.layer_dims},
                      {"scheme", to_string(m.scheme)},
                      {"head", m.head},
                      {"activation", to_string(m.activation)},
                      {"train_config", train_config_json(ckpt.train)},
                      {"seed", ckpt.train.init_seed},
                      {"standardized", standardized},
                      {"mode", to_string(ckpt.mode)},
                      {"feature_convention", to_string(ckpt.convention)},
                      {"profiles", ckpt.profiles},
                      {"payload_order", "per layer: weight (out x in, row-major), bias; then input mean, input scale"}};
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open " + path + " for writing");
    io::write_header(out, kCheckpointMagic, header);
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        io::write_f32_rowmajor(out, m.weights[l]);
        io::write_f32_rowmajor(out, as_column(m.biases[l]));
    }
    if (standardized) {
        io::write_f32_rowmajor(out, as_column(m.input_mean));
        io::write_f32_rowmajor(out, as_column(m.input_scale));
    }
    out.flush();
    if (!out) throw FormatError("write to " + path + " failed");
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open checkpoint " + path);
    const json header = io::read_header(in, kCheckpointMagic);
    Checkpoint ck;
    bool standardized = false;
    try {
        if (header.at("version").get<int>() != 1) throw FormatError("unsupported checkpoint version");
        ck.model.layer_dims = header.at("layer_dims").get<std::vector<int>>();
        ck.model.scheme = label_scheme_from_string(header.at("scheme").get<std::string>());
        ck.model.head = header.at("head").get<TaskLayout>();
        ck.model.activation = activation_from_string(header.at("activation").get<std::string>());
        ck.train = train_config_from(header.at("train_config"));
        standardized = header.at("standardized").get<bool>();
        ck.mode = vectorization_mode_from_string(header.at("mode").get<std::string>());
        ck.convention = feature_convention_from_string(header.at("feature_convention").get<std::string>());
        ck.profiles = header.at("profiles").get<std::vector<ChannelProfile>>();
    } catch (const json::exception& e) {
        throw FormatError(std::string("checkpoint header: ") + e.what());
    } catch (const ConfigError& e) {
        throw FormatError(std::string("checkpoint header: ") + e.what());
    }
    const auto& dims = ck.model.layer_dims;
    if (dims.size() != Mlp<float>::kLayers) throw FormatError("checkpoint layer_dims must have 5 entries");
    for (int d : dims)
        if (d < 1) throw FormatError("checkpoint layer_dims entries must be positive");
    for (int l = 0; l + 1 < Mlp<float>::kLayers; ++l) {
        ck.model.weights.push_back(io::read_f32_rowmajor(in, dims[l + 1], dims[l], "weights"));
        ck.model.biases.push_back(io::read_f32_rowmajor(in, dims[l + 1], 1, "biases"));
    }
    if (standardized) {
        ck.model.input_mean = io::read_f32_rowmajor(in, dims[0], 1, "input mean");
        ck.model.input_scale = io::read_f32_rowmajor(in, dims[0], 1, "input scale");
    }
    if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes after checkpoint payload");
    try {
        ck.model.validate();
    } catch (const ConfigError& e) {
        throw FormatError(std::string("checkpoint: ") + e.what());
    }
    return ck;
}

} // namespace wct
