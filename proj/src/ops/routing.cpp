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

#include "meshflow/ops/routing.hpp"

#include <fmt/format.h>

#include <stdexcept>

namespace meshflow::ops {

std::string_view to_string(RoutingKind kind) noexcept {
    switch (kind) {
        case RoutingKind::kShardByValue: return "value";
        case RoutingKind::kShardByKey: return "key";
        case RoutingKind::kShardByWindow: return "window";
        case RoutingKind::kLocalOnly: return "local";
    }
    return "unknown";
}

RoutingKind parse_routing(std::string_view name) {
    if (name == "value") return RoutingKind::kShardByValue;
    if (name == "key") return RoutingKind::kShardByKey;
    if (name == "window") return RoutingKind::kShardByWindow;
    if (name == "local") return RoutingKind::kLocalOnly;
    throw std::invalid_argument(fmt::format("unknown routing '{}'", name));
}

Router::Router(RoutingKind kind, const OperatorContext& ctx, std::uint64_t window_ms)
    : kind_(ctx.pipelined ? RoutingKind::kLocalOnly : kind),
      world_size_(static_cast<std::uint64_t>(ctx.world_size)),
      rank_(static_cast<std::uint64_t>(ctx.rank)),
      window_ms_(window_ms) {
    if (kind_ == RoutingKind::kShardByWindow && window_ms_ == 0) {
        throw std::invalid_argument("window routing needs a window length");
    }
}

std::size_t Router::target_rank(const Event& e) const noexcept {
    switch (kind_) {
        case RoutingKind::kShardByValue: return e.value % world_size_;
        case RoutingKind::kShardByKey: return e.key % world_size_;
        case RoutingKind::kShardByWindow: return (e.event_time / window_ms_) % world_size_;
        case RoutingKind::kLocalOnly: return rank_;
    }
    return rank_;
}

std::size_t Router::slot(const Event& e, std::size_t branch) const noexcept {
    return branch * world_size_ + target_rank(e);
}

}  // namespace meshflow::ops
