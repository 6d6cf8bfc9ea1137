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
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace wct::io {

// Container layout shared by dataset and checkpoint files:
//   8-byte magic | u64 LE header length | UTF-8 JSON header | LE payloads.

void write_header(std::ostream& os, const std::string& magic, const nlohmann::json& header);

/// Reads magic and header; throws FormatError naming the failing field.
nlohmann::json read_header(std::istream& is, const std::string& magic);

void write_u64(std::ostream& os, std::uint64_t v);
std::uint64_t read_u64(std::istream& is, const char* field);

/// Writes a float matrix row-major as little-endian f32.
void write_f32_rowmajor(std::ostream& os, const Eigen::MatrixXf& m);
Eigen::MatrixXf read_f32_rowmajor(std::istream& is, Eigen::Index rows, Eigen::Index cols, const char* field);

void write_u32s(std::ostream& os, std::span<const std::uint32_t> v);
std::vector<std::uint32_t> read_u32s(std::istream& is, std::size_t n, const char* field);

/// FNV-1a 64-bit of a file's bytes, hex-encoded.
std::string file_checksum(const std::string& path);

} // namespace wct::io
