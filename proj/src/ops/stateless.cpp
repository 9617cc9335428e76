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

#include "meshflow/ops/stateless.hpp"

namespace meshflow::ops {

MapOperator::MapOperator(const OperatorContext& ctx, ValueFunction fn, RoutingKind routing)
    : fn_(fn), router_(routing, ctx) {}

void MapOperator::on_data(std::vector<Event>&& events, const InputInfo&, OutputSlots& out) {
    for (auto& e : events) {
        try {
            e.value = fn_(e.value);
        } catch (const std::exception&) {
            counters_.errors.fetch_add(1, std::memory_order_relaxed);
            continue;
        }
        const auto slot = router_.slot(e);
        out[slot].push_back(std::move(e));
    }
}

FilterOperator::FilterOperator(const OperatorContext& ctx, Predicate pred, RoutingKind routing)
    : pred_(pred), router_(routing, ctx) {}

void FilterOperator::on_data(std::vector<Event>&& events, const InputInfo&, OutputSlots& out) {
    for (auto& e : events) {
        if (!pred_(e)) continue;
        const auto slot = router_.slot(e);
        out[slot].push_back(std::move(e));
    }
}

SplitOperator::SplitOperator(const OperatorContext& ctx, std::vector<Predicate> conditions, RoutingKind routing)
    : conditions_(std::move(conditions)), router_(routing, ctx) {}

void SplitOperator::on_data(std::vector<Event>&& events, const InputInfo&, OutputSlots& out) {
    for (auto& e : events) {
        std::size_t branch = conditions_.size();
        for (std::size_t i = 0; i < conditions_.size(); ++i) {
            if (!conditions_[i](e)) continue;
            if (branch == conditions_.size()) {
                branch = i;
            } else {
                ambiguous_.fetch_add(1, std::memory_order_relaxed);
                break;
            }
        }
        if (branch == conditions_.size()) {
            counters_.dropped.fetch_add(1, std::memory_order_relaxed);
            continue;
        }
        const auto slot = router_.slot(e, branch);
        out[slot].push_back(std::move(e));
    }
}

StaticJoinOperator::StaticJoinOperator(const OperatorContext& ctx, StaticTable table, RoutingKind routing)
    : table_(std::move(table)), router_(routing, ctx) {}

void StaticJoinOperator::on_data(std::vector<Event>&& events, const InputInfo&, OutputSlots& out) {
    for (auto& e : events) {
        auto joined = table_.lookup(e.key);
        if (!joined) {
            counters_.dropped.fetch_add(1, std::memory_order_relaxed);
            continue;
        }
        e.key = *joined;
        const auto slot = router_.slot(e);
        out[slot].push_back(std::move(e));
    }
}

}  // namespace meshflow::ops
