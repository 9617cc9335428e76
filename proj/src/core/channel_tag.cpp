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

#include "meshflow/core/channel_tag.hpp"

#include <fmt/format.h>

#include <stdexcept>

namespace meshflow {

namespace {

std::uint8_t checked_field(int v, const char* name) {
    if (v < 0 || v > 255) {
        throw std::out_of_range(fmt::format("channel tag field {}={} outside [0, 255]", name, v));
    }
    return static_cast<std::uint8_t>(v);
}

}  // namespace

ChannelTag ChannelTag::make(int source_rank, int source_op, int target_rank, int target_op) {
    return ChannelTag{checked_field(source_rank, "source_rank"), checked_field(source_op, "source_op"),
                      checked_field(target_rank, "target_rank"), checked_field(target_op, "target_op")};
}

std::string ChannelTag::to_string() const {
    return fmt::format("{}:{}->{}:{}", source_rank, source_op, target_rank, target_op);
}

}  // namespace meshflow
