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

#include <string_view>

#include "meshflow/bench/generator.hpp"
#include "meshflow/bench/sink.hpp"
#include "meshflow/runtime/dataflow.hpp"
#include "meshflow/runtime/topology.hpp"

namespace meshflow::bench {

enum class Workload { kSwa, kYsb, kYsbStar };

std::string_view to_string(Workload w) noexcept;
/// "swa", "ysb", "ysb-star".
Workload parse_workload(std::string_view s);

/// SWA:  generator -> count(all) [pre, global] -> sink
/// YSB:  generator -> filter(view) -> join(ad -> campaign) -> count(campaign) [pre, global] -> sink
/// YSB*: generator -> split(click | view) -> per branch join + count [pre, global]
///       -> window join (click/view ratio in millionths) -> sink
/// Stateless operators are pipelined when `pipelining` is set.
Topology build_swa_topology(std::uint64_t window_ms, bool pipelining);
Topology build_ysb_topology(const GeneratorConfig& gen, bool pipelining);
Topology build_ysb_star_topology(const GeneratorConfig& gen, bool pipelining);
Topology build_workload_topology(Workload w, const GeneratorConfig& gen, bool pipelining);

/// Operators excluding sinks.
std::size_t operator_count_without_sink(const Topology& t);

/// Generators and sinks for `gen`; everything else from ops::make_standard_operator.
/// `log` may be null. `collector` must outlive the dataflow.
OperatorFactory make_workload_factory(const GeneratorConfig& gen, EventLog* log, SinkCollector& collector);

}  // namespace meshflow::bench
