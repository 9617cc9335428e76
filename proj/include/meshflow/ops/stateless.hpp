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

#include <atomic>
#include <vector>

#include "meshflow/ops/expression.hpp"
#include "meshflow/ops/routing.hpp"
#include "meshflow/ops/static_table.hpp"
#include "meshflow/runtime/operator.hpp"

namespace meshflow::ops {

// Stateless operators keep no mutable state besides counters, so on_data runs freely in
// parallel across incoming endpoints. Timestamps pass through untouched.

class MapOperator final : public Operator {
  public:
    MapOperator(const OperatorContext& ctx, ValueFunction fn, RoutingKind routing);
    void on_data(std::vector<Event>&& events, const InputInfo& input, OutputSlots& out) override;

  private:
    ValueFunction fn_;
    Router router_;
};

class FilterOperator final : public Operator {
  public:
    FilterOperator(const OperatorContext& ctx, Predicate pred, RoutingKind routing);
    void on_data(std::vector<Event>&& events, const InputInfo& input, OutputSlots& out) override;

  private:
    Predicate pred_;
    Router router_;
};

/// Sends each event down the branch of the first condition it satisfies. Events matching none are
/// dropped; events matching more than one are counted as ambiguous.
class SplitOperator final : public Operator {
  public:
    SplitOperator(const OperatorContext& ctx, std::vector<Predicate> conditions, RoutingKind routing);
    void on_data(std::vector<Event>&& events, const InputInfo& input, OutputSlots& out) override;

    std::uint64_t ambiguous() const noexcept { return ambiguous_.load(); }

  private:
    std::vector<Predicate> conditions_;
    Router router_;
    std::atomic<std::uint64_t> ambiguous_{0};
};

/// Replaces each event's key with its table entry; keys missing from the table are dropped.
class StaticJoinOperator final : public Operator {
  public:
    StaticJoinOperator(const OperatorContext& ctx, StaticTable table, RoutingKind routing);
    void on_data(std::vector<Event>&& events, const InputInfo& input, OutputSlots& out) override;

  private:
    StaticTable table_;
    Router router_;
};

}  // namespace meshflow::ops
