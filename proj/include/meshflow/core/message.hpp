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
#include <string_view>
#include <utility>
#include <vector>

#include "meshflow/core/channel_tag.hpp"
#include "meshflow/core/event.hpp"

namespace meshflow {

enum class MessageKind : std::uint8_t {
    kData = 0,
    kWindowMarker = 1,
    kTerminate = 2,
};

std::string_view to_string(MessageKind kind) noexcept;

/// The unit of channel communication: a batch of events, or an in-band control signal.
///
/// A WINDOW_MARKER(w) on a channel promises that no further event of any window <= w follows
/// on that channel. TERMINATE promises that nothing at all follows.
struct Message {
    ChannelTag tag;
    MessageKind kind = MessageKind::kData;
    std::uint64_t window_id = 0;
    std::vector<Event> events;

    static Message data(ChannelTag tag, std::vector<Event> events) {
        return Message{tag, MessageKind::kData, 0, std::move(events)};
    }
    static Message marker(ChannelTag tag, std::uint64_t window_id) {
        return Message{tag, MessageKind::kWindowMarker, window_id, {}};
    }
    static Message terminate(ChannelTag tag) { return Message{tag, MessageKind::kTerminate, 0, {}}; }

    bool is_data() const noexcept { return kind == MessageKind::kData; }

    friend bool operator==(const Message&, const Message&) = default;
};

}  // namespace meshflow
