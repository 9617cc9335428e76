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

#include "meshflow/ops/builder.hpp"

#include <fmt/format.h>

#include "meshflow/ops/window_store.hpp"

namespace meshflow::ops {

int TopologyBuilder::add(OperatorKind kind, std::string name, nlohmann::json params, bool pipelined) {
    OperatorDescriptor d;
    d.op_id = static_cast<int>(ops_.size());
    d.kind = kind;
    d.name = std::move(name);
    d.params = std::move(params);
    d.pipelined = pipelined;
    ops_.push_back(std::move(d));
    return ops_.back().op_id;
}

void TopologyBuilder::connect(int from, int to) {
    descriptor(from).successors.push_back(to);
    descriptor(to).predecessors.push_back(from);
}

std::pair<int, int> TopologyBuilder::preaggregate_then_global(const std::string& name, const nlohmann::json& params) {
    const auto fn_name = params.value("function", std::string("count"));
    AggregateFunction fn = AggregateFunction::parse(fn_name);
    if (!fn.mergeable()) {
        throw TopologyError(
            fmt::format("aggregation '{}': function '{}' cannot be pre-aggregated; build it as a single stage", name,
                        fn_name));
    }
    auto pre_params = params;
    pre_params["stage"] = "pre";
    auto global_params = params;
    global_params["stage"] = "global";
    // Partials are already grouped; the global stage keeps their keys.
    global_params["group"] = "key";
    const int pre = add(OperatorKind::kAggregation, name + "_pre", pre_params);
    const int global = add(OperatorKind::kAggregation, name + "_global", global_params);
    connect(pre, global);
    return {pre, global};
}

OperatorDescriptor& TopologyBuilder::descriptor(int op_id) {
    if (op_id < 0 || static_cast<std::size_t>(op_id) >= ops_.size()) {
        throw std::out_of_range(fmt::format("no operator {} in builder", op_id));
    }
    return ops_[static_cast<std::size_t>(op_id)];
}

Topology TopologyBuilder::build() const { return Topology(ops_); }

}  // namespace meshflow::ops
