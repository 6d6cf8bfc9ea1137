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

#include "wctlab/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "wctlab/error.hpp"

namespace wct::io {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::big) {
        auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
        std::reverse(bytes.begin(), bytes.end());
        return std::bit_cast<T>(bytes);
    }
    return v;
}

void read_exact(std::istream& is, void* dst, std::size_t n, const char* field) {
    is.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is.gcount()) != n) throw FormatError(std::string("truncated file while reading ") + field);
}

// Payload I/O goes through a bounded buffer to avoid one syscall per value.
constexpr std::size_t kChunk = 1 << 16;

} // namespace

void write_u64(std::ostream& os, std::uint64_t v) {
    v = to_little(v);
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint64_t read_u64(std::istream& is, const char* field) {
    std::uint64_t v = 0;
    read_exact(is, &v, sizeof v, field);
    return to_little(v);
}

void write_header(std::ostream& os, const std::string& magic, const nlohmann::json& header) {
    os.write(magic.data(), static_cast<std::streamsize>(magic.size()));
    const std::string text = header.dump();
    write_u64(os, text.size());
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
}

nlohmann::json read_header(std::istream& is, const std::string& magic) {
    std::string got(magic.size(), '\0');
    read_exact(is, got.data(), got.size(), "magic");
    if (got != magic) throw FormatError("bad magic: expected " + magic);
    const std::uint64_t len = read_u64(is, "header length");
    if (len > (1u << 30)) throw FormatError("header length implausibly large");
    std::string text(len, '\0');
    read_exact(is, text.data(), text.size(), "header");
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("header is not valid JSON: ") + e.what());
    }
}

void write_f32_rowmajor(std::ostream& os, const Eigen::MatrixXf& m) {
    std::vector<float> buf;
    buf.reserve(kChunk);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            buf.push_back(to_little(m(r, c)));
            if (buf.size() == kChunk) {
                os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
                buf.clear();
            }
        }
    }
    os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
}

Eigen::MatrixXf read_f32_rowmajor(std::istream& is, Eigen::Index rows, Eigen::Index cols, const char* field) {
    if (rows < 0 || cols < 0) throw FormatError(std::string("negative dimensions for ") + field);
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m(rows, cols);
    read_exact(is, m.data(), static_cast<std::size_t>(m.size()) * sizeof(float), field);
    if constexpr (std::endian::native == std::endian::big) {
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = to_little(m.data()[i]);
    }
    return m;
}

void write_u32s(std::ostream& os, std::span<const std::uint32_t> v) {
    for (auto x : v) {
        x = to_little(x);
        os.write(reinterpret_cast<const char*>(&x), sizeof x);
    }
}

std::vector<std::uint32_t> read_u32s(std::istream& is, std::size_t n, const char* field) {
    std::vector<std::uint32_t> v(n);
    read_exact(is, v.data(), n * sizeof(std::uint32_t), field);
    for (auto& x : v) x = to_little(x);
    return v;
}

std::string file_checksum(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    std::vector<char> buf(kChunk);
    while (in) {
        in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[static_cast<std::size_t>(i)]);
            h *= 0x100000001b3ULL;
        }
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

} // namespace wct::io
