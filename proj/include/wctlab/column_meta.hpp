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
#include <vector>

namespace wct {

/// Provenance of one sample column: (WCT, slot, SNR) loop indices.
struct ColumnMeta {
    std::uint32_t wct = 0;
    std::uint32_t slot = 0;
    std::uint32_t snr = 0;

    friend bool operator==(const ColumnMeta&, const ColumnMeta&) = default;
};

/// Column c of the WCT-major, then slot, then SNR ordering.
constexpr ColumnMeta column_meta_for(std::uint64_t c, std::uint32_t n_slot, std::uint32_t n_snr) {
    return {static_cast<std::uint32_t>(c / (static_cast<std::uint64_t>(n_slot) * n_snr)),
            static_cast<std::uint32_t>((c / n_snr) % n_slot), static_cast<std::uint32_t>(c % n_snr)};
}

constexpr std::uint64_t column_index_for(const ColumnMeta& m, std::uint32_t n_slot, std::uint32_t n_snr) {
    return (static_cast<std::uint64_t>(m.wct) * n_slot + m.slot) * n_snr + m.snr;
}

using ColumnMetaList = std::vector<ColumnMeta>;

} // namespace wct
