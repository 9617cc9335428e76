/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/

#pragma once

#include <cstdint>
#include <string>

namespace meshflow {

/// Identifies one directed channel between two operator instances.
/// Packs into a 32-bit tag as sourceRank<<24 | sourceOp<<16 | targetRank<<8 | targetOp.
struct ChannelTag {
    std::uint8_t source_rank = 0;
    std::uint8_t source_op = 0;
    std::uint8_t target_rank = 0;
    std::uint8_t target_op = 0;

    /// Throws std::out_of_range if any field is outside [0, 255].
    static ChannelTag make(int source_rank, int source_op, int target_rank, int target_op);

    std::string to_string() const;

    friend bool operator==(const ChannelTag&, const ChannelTag&) = default;
};

constexpr std::uint32_t encode_tag(ChannelTag c) noexcept {
    return (std::uint32_t{c.source_rank} << 24) | (std::uint32_t{c.source_op} << 16) |
           (std::uint32_t{c.target_rank} << 8) | std::uint32_t{c.target_op};
}

constexpr ChannelTag decode_tag(std::uint32_t t) noexcept {
    return ChannelTag{static_cast<std::uint8_t>(t >> 24), static_cast<std::uint8_t>(t >> 16),
                      static_cast<std::uint8_t>(t >> 8), static_cast<std::uint8_t>(t)};
}

struct ChannelTagHash {
    std::size_t operator()(ChannelTag c) const noexcept { return encode_tag(c); }
};

}  // namespace meshflow
