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

#include <nlohmann/json.hpp>

#include <string>
#include <utility>
#include <vector>

#include "meshflow/runtime/topology.hpp"

namespace meshflow::ops {

/// Incremental construction of a Topology; op ids are assigned in insertion order.
class TopologyBuilder {
  public:
    int add(OperatorKind kind, std::string name, nlohmann::json params = nlohmann::json::object(),
            bool pipelined = false);
    void connect(int from, int to);

    /// Expands one logical windowed aggregation into a pre-aggregator (partials per window and
    /// key, routed by window id) followed by a global aggregator that merges them. `params`
    /// carries `function`, `window_ms` and optionally `group`. Returns {pre, global}, already
    /// connected. Throws TopologyError if the function cannot merge partial results.
    std::pair<int, int> preaggregate_then_global(const std::string& name, const nlohmann::json& params);

    OperatorDescriptor& descriptor(int op_id);
    std::size_t size() const noexcept { return ops_.size(); }

    /// Validates and returns the topology (throws TopologyError).
    Topology build() const;

  private:
    std::vector<OperatorDescriptor> ops_;
};

}  // namespace meshflow::ops
