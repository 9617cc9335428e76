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
#include <string_view>

#include "meshflow/core/event.hpp"
#include "meshflow/core/window.hpp"
#include "meshflow/runtime/operator.hpp"

namespace meshflow::ops {

enum class RoutingKind {
    kShardByValue,
    kShardByKey,
    kShardByWindow,
    kLocalOnly,
};

std::string_view to_string(RoutingKind kind) noexcept;
/// Accepts "value", "key", "window", "local". Throws std::invalid_argument.
RoutingKind parse_routing(std::string_view name);

/// Maps an outgoing event to its slot: branch * world_size + target rank.
class Router {
  public:
    /// A pipelined operator always routes to its own rank.
    Router(RoutingKind kind, const OperatorContext& ctx, std::uint64_t window_ms = 0);

    RoutingKind kind() const noexcept { return kind_; }
    std::size_t slot(const Event& e, std::size_t branch = 0) const noexcept;
    std::size_t target_rank(const Event& e) const noexcept;

  private:
    RoutingKind kind_;
    std::uint64_t world_size_;
    std::uint64_t rank_;
    std::uint64_t window_ms_;
};

}  // namespace meshflow::ops
