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
#include <vector>

namespace meshflow {

/// Bytes of the fixed event header on the wire: key, value, event_time (u64 each) + payload_len (u32).
inline constexpr std::size_t kEventHeaderBytes = 28;

/// A timestamped key/value record. `event_time` is set once at ingestion (ms since the run epoch)
/// and carried unchanged by every stateless operator.
struct Event {
    std::uint64_t key = 0;
    std::uint64_t value = 0;
    std::uint64_t event_time = 0;
    std::vector<std::uint8_t> payload;

    std::size_t wire_size() const noexcept { return kEventHeaderBytes + payload.size(); }

    friend bool operator==(const Event&, const Event&) = default;
};

}  // namespace meshflow
