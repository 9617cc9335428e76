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

#include "meshflow/bench/workload.hpp"

#include <fmt/format.h>

#include <memory>
#include <stdexcept>

#include "meshflow/ops/builder.hpp"
#include "meshflow/ops/factory.hpp"

namespace meshflow::bench {

std::string_view to_string(Workload w) noexcept {
    switch (w) {
        case Workload::kSwa: return "swa";
        case Workload::kYsb: return "ysb";
        case Workload::kYsbStar: return "ysb-star";
    }
    return "unknown";
}

Workload parse_workload(std::string_view s) {
    if (s == "swa") return Workload::kSwa;
    if (s == "ysb") return Workload::kYsb;
    if (s == "ysb-star") return Workload::kYsbStar;
    throw std::invalid_argument(fmt::format("unknown workload '{}' (swa, ysb, ysb-star)", s));
}

namespace {

nlohmann::json count_params(std::uint64_t window_ms, const char* group) {
    return {{"function", "count"}, {"window_ms", window_ms}, {"group", group}};
}

nlohmann::json type_is(EventType t) {
    return {{"field", "value"}, {"cmp", "eq"}, {"arg", static_cast<std::uint64_t>(t)}};
}

}  // namespace

Topology build_swa_topology(std::uint64_t window_ms, bool pipelining) {
    ops::TopologyBuilder b;
    const int gen = b.add(OperatorKind::kGenerator, "generator", {{"routing", "key"}}, pipelining);
    const auto [pre, global] = b.preaggregate_then_global("count", count_params(window_ms, "all"));
    const int sink = b.add(OperatorKind::kSink, "sink", {{"window_ms", window_ms}});
    b.connect(gen, pre);
    b.connect(global, sink);
    return b.build();
}

Topology build_ysb_topology(const GeneratorConfig& gen_cfg, bool pipelining) {
    const auto catalogue = make_ad_catalogue(gen_cfg);
    ops::TopologyBuilder b;
    const int gen = b.add(OperatorKind::kGenerator, "generator", {{"routing", "key"}}, pipelining);
    const int filter = b.add(OperatorKind::kFilter, "filter_view",
                             {{"predicate", type_is(EventType::kView)}, {"routing", "key"}}, pipelining);
    const int join = b.add(OperatorKind::kStaticJoin, "join_campaign",
                           {{"table", catalogue.ad_to_campaign.to_json()}, {"routing", "key"}}, pipelining);
    const auto [pre, global] = b.preaggregate_then_global("count", count_params(gen_cfg.window_ms, "key"));
    const int sink = b.add(OperatorKind::kSink, "sink", {{"window_ms", gen_cfg.window_ms}});
    b.connect(gen, filter);
    b.connect(filter, join);
    b.connect(join, pre);
    b.connect(global, sink);
    return b.build();
}

Topology build_ysb_star_topology(const GeneratorConfig& gen_cfg, bool pipelining) {
    const auto catalogue = make_ad_catalogue(gen_cfg);
    const auto table = catalogue.ad_to_campaign.to_json();
    ops::TopologyBuilder b;
    const int gen = b.add(OperatorKind::kGenerator, "generator", {{"routing", "key"}}, pipelining);
    const int split = b.add(OperatorKind::kSplit, "split_click_view",
                            {{"conditions", {type_is(EventType::kClick), type_is(EventType::kView)}},
                             {"routing", "key"}},
                            pipelining);
    const int join_click =
        b.add(OperatorKind::kStaticJoin, "join_click", {{"table", table}, {"routing", "key"}}, pipelining);
    const int join_view =
        b.add(OperatorKind::kStaticJoin, "join_view", {{"table", table}, {"routing", "key"}}, pipelining);
    const auto [pre_click, global_click] =
        b.preaggregate_then_global("count_click", count_params(gen_cfg.window_ms, "key"));
    const auto [pre_view, global_view] =
        b.preaggregate_then_global("count_view", count_params(gen_cfg.window_ms, "key"));
    const int ratio = b.add(OperatorKind::kWindowJoin, "ratio",
                            {{"combine", "ratio_micro"}, {"window_ms", gen_cfg.window_ms}});
    const int sink = b.add(OperatorKind::kSink, "sink", {{"window_ms", gen_cfg.window_ms}});
    b.connect(gen, split);
    b.connect(split, join_click);  // branch 0: clicks
    b.connect(split, join_view);   // branch 1: views
    b.connect(join_click, pre_click);
    b.connect(join_view, pre_view);
    b.connect(global_click, ratio);  // left
    b.connect(global_view, ratio);   // right
    b.connect(ratio, sink);
    return b.build();
}

Topology build_workload_topology(Workload w, const GeneratorConfig& gen, bool pipelining) {
    switch (w) {
        case Workload::kSwa: return build_swa_topology(gen.window_ms, pipelining);
        case Workload::kYsb: return build_ysb_topology(gen, pipelining);
        case Workload::kYsbStar: return build_ysb_star_topology(gen, pipelining);
    }
    throw std::invalid_argument("unknown workload");
}

std::size_t operator_count_without_sink(const Topology& t) {
    std::size_t n = 0;
    for (const auto& d : t.operators()) n += d.kind == OperatorKind::kSink ? 0 : 1;
    return n;
}

OperatorFactory make_workload_factory(const GeneratorConfig& gen, EventLog* log, SinkCollector& collector) {
    auto catalogue = std::make_shared<const AdCatalogue>(make_ad_catalogue(gen));
    return [gen, log, &collector, catalogue](const OperatorDescriptor& desc,
                                            const OperatorContext& ctx) -> std::unique_ptr<Operator> {
        switch (desc.kind) {
            case OperatorKind::kGenerator:
                return std::make_unique<GeneratorOperator>(
                    ctx, gen, *catalogue, ops::parse_routing(desc.params.value("routing", std::string("key"))), log);
            case OperatorKind::kSink:
                return std::make_unique<SinkOperator>(ctx, desc.params.value("window_ms", gen.window_ms), collector);
            default:
                return ops::make_standard_operator(desc, ctx);
        }
    };
}

}  // namespace meshflow::bench
