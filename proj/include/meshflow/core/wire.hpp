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

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "meshflow/core/message.hpp"

namespace meshflow {

/// Frame layout (little-endian):
///   [0,4)   tag (u32)
///   [4]     kind (u8)
///   [5,13)  window_id (u64), zero unless kind is WINDOW_MARKER
///   [13,17) event_count (u32)
///   then per event: key u64 | value u64 | event_time u64 | payload_len u32 | payload
inline constexpr std::size_t kFrameHeaderBytes = 17;

class WireError : public std::runtime_error {
  public:
    WireError(const std::string& what, std::size_t offset);
    std::size_t offset() const noexcept { return offset_; }

  private:
    std::size_t offset_;
};

std::size_t serialized_size(const Message& m) noexcept;

std::vector<std::uint8_t> serialize_message(const Message& m);

/// Appends the frame for `m` to `out`.
void serialize_message_into(const Message& m, std::vector<std::uint8_t>& out);

/// Parses exactly one complete frame. Throws WireError (with the failing byte offset) on
/// truncated input, trailing bytes, an unknown kind, or control frames carrying events.
Message deserialize_message(std::span<const std::uint8_t> bytes);

}  // namespace meshflow
