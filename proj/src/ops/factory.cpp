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

#include "meshflow/ops/factory.hpp"

#include <fmt/format.h>

#include <stdexcept>

#include "meshflow/ops/stateful.hpp"
#include "meshflow/ops/stateless.hpp"

namespace meshflow::ops {

namespace {

RoutingKind routing_param(const nlohmann::json& p, const char* fallback) {
    return parse_routing(p.value("routing", std::string(fallback)));
}

std::unique_ptr<Operator> make(const OperatorDescriptor& desc, const OperatorContext& ctx) {
    const auto& p = desc.params;
    switch (desc.kind) {
        case OperatorKind::kMap:
            return std::make_unique<MapOperator>(ctx, ValueFunction::from_json(p.value("fn", nlohmann::json{{"fn", "identity"}})),
                                                 routing_param(p, "value"));
        case OperatorKind::kFilter:
            return std::make_unique<FilterOperator>(ctx, Predicate::from_json(p.at("predicate")), routing_param(p, "value"));
        case OperatorKind::kSplit: {
            std::vector<Predicate> conditions;
            for (const auto& c : p.at("conditions")) conditions.push_back(Predicate::from_json(c));
            if (conditions.size() != desc.outdegree()) {
                throw std::invalid_argument(fmt::format("split has {} conditions for {} successors", conditions.size(),
                                                        desc.outdegree()));
            }
            return std::make_unique<SplitOperator>(ctx, std::move(conditions), routing_param(p, "value"));
        }
        case OperatorKind::kStaticJoin: {
            StaticTable table = p.contains("table_csv") ? StaticTable::load_csv(p.at("table_csv").get<std::string>())
                                                        : StaticTable::from_json(p.at("table"));
            return std::make_unique<StaticJoinOperator>(ctx, std::move(table), routing_param(p, "value"));
        }
        case OperatorKind::kReduce:
        case OperatorKind::kAggregation: {
            WindowAggregateOperator::Config cfg;
            cfg.function = AggregateFunction::parse(p.value("function", std::string("count")));
            cfg.stage = parse_stage(p.value("stage", std::string("single")));
            const auto group = p.value("group", std::string(desc.kind == OperatorKind::kReduce ? "all" : "key"));
            if (group != "key" && group != "all") throw std::invalid_argument(fmt::format("unknown group '{}'", group));
            cfg.grouping = group == "all" ? Grouping::kAll : Grouping::kByKey;
            cfg.window_ms = p.value("window_ms", std::uint64_t{10'000});
            return std::make_unique<WindowAggregateOperator>(ctx, cfg);
        }
        case OperatorKind::kWindowJoin: {
            WindowJoinOperator::Config cfg;
            cfg.combine = parse_join_combine(p.value("combine", std::string("ratio_micro")));
            cfg.window_ms = p.value("window_ms", std::uint64_t{10'000});
            return std::make_unique<WindowJoinOperator>(ctx, cfg);
        }
        case OperatorKind::kGenerator:
        case OperatorKind::kSink:
            return nullptr;
    }
    return nullptr;
}

}  // namespace

std::unique_ptr<Operator> make_standard_operator(const OperatorDescriptor& desc, const OperatorContext& ctx) {
    try {
        return make(desc, ctx);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(fmt::format("op {} ({}): bad params: {}", desc.op_id, desc.name, e.what()));
    }
}

}  // namespace meshflow::ops
