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

#include "meshflow/runtime/topology.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <deque>
#include <set>
#include <stdexcept>

namespace meshflow {

namespace {

struct KindName {
    OperatorKind kind;
    std::string_view name;
};

constexpr std::array<KindName, 9> kKindNames{{
    {OperatorKind::kGenerator, "generator"},
    {OperatorKind::kMap, "map"},
    {OperatorKind::kFilter, "filter"},
    {OperatorKind::kSplit, "split"},
    {OperatorKind::kStaticJoin, "static_join"},
    {OperatorKind::kReduce, "reduce"},
    {OperatorKind::kAggregation, "aggregation"},
    {OperatorKind::kWindowJoin, "window_join"},
    {OperatorKind::kSink, "sink"},
}};

std::string describe(const OperatorDescriptor& d) {
    return d.name.empty() ? fmt::format("op {}", d.op_id) : fmt::format("op {} ({})", d.op_id, d.name);
}

}  // namespace

std::string_view to_string(OperatorKind kind) noexcept {
    for (const auto& k : kKindNames) {
        if (k.kind == kind) return k.name;
    }
    return "unknown";
}

OperatorKind parse_operator_kind(std::string_view name) {
    for (const auto& k : kKindNames) {
        if (k.name == name) return k.kind;
    }
    throw std::invalid_argument(fmt::format("unknown operator kind '{}'", name));
}

bool is_stateless(OperatorKind kind) noexcept {
    switch (kind) {
        case OperatorKind::kGenerator:
        case OperatorKind::kMap:
        case OperatorKind::kFilter:
        case OperatorKind::kSplit:
        case OperatorKind::kStaticJoin:
            return true;
        default:
            return false;
    }
}

bool is_windowed(OperatorKind kind) noexcept {
    return kind == OperatorKind::kReduce || kind == OperatorKind::kAggregation || kind == OperatorKind::kWindowJoin;
}

int OperatorDescriptor::predecessor_index(int op) const noexcept {
    auto it = std::find(predecessors.begin(), predecessors.end(), op);
    return it == predecessors.end() ? -1 : static_cast<int>(it - predecessors.begin());
}

int OperatorDescriptor::successor_index(int op) const noexcept {
    auto it = std::find(successors.begin(), successors.end(), op);
    return it == successors.end() ? -1 : static_cast<int>(it - successors.begin());
}

Topology::Topology(std::vector<OperatorDescriptor> operators)
    : operators_(std::move(operators)), index_of_(kMaxOperators, -1) {
    if (operators_.empty()) throw TopologyError("topology has no operators");
    if (operators_.size() > static_cast<std::size_t>(kMaxOperators)) {
        throw TopologyError(fmt::format("topology has {} operators, at most {} allowed", operators_.size(),
                                        kMaxOperators));
    }
    for (std::size_t i = 0; i < operators_.size(); ++i) {
        const auto& d = operators_[i];
        if (d.op_id < 0 || d.op_id >= kMaxOperators) {
            throw TopologyError(fmt::format("{}: op_id outside [0, {}]", describe(d), kMaxOperators - 1));
        }
        if (index_of_[d.op_id] != -1) throw TopologyError(fmt::format("duplicate op_id {}", d.op_id));
        index_of_[d.op_id] = static_cast<int>(i);
    }

    auto known = [&](int id) { return id >= 0 && id < kMaxOperators && index_of_[id] != -1; };
    for (const auto& d : operators_) {
        std::set<int> seen;
        for (int s : d.successors) {
            if (!known(s)) throw TopologyError(fmt::format("dangling edge {} -> {}", d.op_id, s));
            if (!seen.insert(s).second) throw TopologyError(fmt::format("repeated edge {} -> {}", d.op_id, s));
            if (op(s).predecessor_index(d.op_id) < 0) {
                throw TopologyError(fmt::format("edge {} -> {} missing from predecessors of {}", d.op_id, s, s));
            }
        }
        seen.clear();
        for (int p : d.predecessors) {
            if (!known(p)) throw TopologyError(fmt::format("dangling edge {} -> {}", p, d.op_id));
            if (!seen.insert(p).second) throw TopologyError(fmt::format("repeated edge {} -> {}", p, d.op_id));
            if (op(p).successor_index(d.op_id) < 0) {
                throw TopologyError(fmt::format("edge {} -> {} missing from successors of {}", p, d.op_id, p));
            }
        }
    }

    // Kahn's algorithm; whatever remains afterwards lies on or behind a cycle.
    std::vector<std::size_t> indeg(kMaxOperators, 0);
    std::deque<int> ready;
    for (const auto& d : operators_) {
        indeg[d.op_id] = d.indegree();
        if (d.indegree() == 0) ready.push_back(d.op_id);
    }
    while (!ready.empty()) {
        int id = ready.front();
        ready.pop_front();
        order_.push_back(id);
        for (int s : op(id).successors) {
            if (--indeg[s] == 0) ready.push_back(s);
        }
    }
    if (order_.size() != operators_.size()) {
        for (const auto& d : operators_) {
            if (indeg[d.op_id] == 0) continue;
            for (int p : d.predecessors) {
                if (indeg[p] != 0) throw TopologyError(fmt::format("cycle through edge {} -> {}", p, d.op_id));
            }
        }
        throw TopologyError("topology contains a cycle");
    }

    for (const auto& d : operators_) {
        const bool source = d.indegree() == 0;
        const bool sink = d.outdegree() == 0;
        if (source != (d.kind == OperatorKind::kGenerator)) {
            throw TopologyError(fmt::format("{}: only generators may (and must) have no predecessors", describe(d)));
        }
        if (sink != (d.kind == OperatorKind::kSink)) {
            throw TopologyError(fmt::format("{}: only sinks may (and must) have no successors", describe(d)));
        }
        if (d.kind == OperatorKind::kWindowJoin && d.indegree() != 2) {
            throw TopologyError(fmt::format("{}: window join needs exactly 2 predecessors", describe(d)));
        }
        if (d.kind == OperatorKind::kSplit && d.outdegree() < 2) {
            throw TopologyError(fmt::format("{}: split needs at least 2 successors", describe(d)));
        }
        if (d.pipelined && !is_stateless(d.kind)) {
            throw TopologyError(fmt::format("{}: {} operators cannot be pipelined", describe(d), to_string(d.kind)));
        }
    }
}

const OperatorDescriptor& Topology::op(int op_id) const {
    if (op_id < 0 || op_id >= kMaxOperators || index_of_[op_id] == -1) {
        throw std::out_of_range(fmt::format("no operator with id {}", op_id));
    }
    return operators_[index_of_[op_id]];
}

std::vector<int> Topology::sources() const {
    std::vector<int> out;
    for (const auto& d : operators_) {
        if (d.indegree() == 0) out.push_back(d.op_id);
    }
    return out;
}

std::vector<int> Topology::sinks() const {
    std::vector<int> out;
    for (const auto& d : operators_) {
        if (d.outdegree() == 0) out.push_back(d.op_id);
    }
    return out;
}

nlohmann::json Topology::to_json() const {
    nlohmann::json ops = nlohmann::json::array();
    for (const auto& d : operators_) {
        ops.push_back({{"op_id", d.op_id},
                       {"kind", std::string(to_string(d.kind))},
                       {"name", d.name},
                       {"predecessors", d.predecessors},
                       {"successors", d.successors},
                       {"pipelined", d.pipelined},
                       {"params", d.params}});
    }
    return {{"operators", ops}};
}

Topology Topology::from_json(const nlohmann::json& j) {
    std::vector<OperatorDescriptor> ops;
    try {
        for (const auto& o : j.at("operators")) {
            OperatorDescriptor d;
            d.op_id = o.at("op_id").get<int>();
            d.kind = parse_operator_kind(o.at("kind").get<std::string>());
            d.name = o.value("name", std::string{});
            d.predecessors = o.value("predecessors", std::vector<int>{});
            d.successors = o.value("successors", std::vector<int>{});
            d.pipelined = o.value("pipelined", false);
            d.params = o.value("params", nlohmann::json::object());
            ops.push_back(std::move(d));
        }
    } catch (const nlohmann::json::exception& e) {
        throw TopologyError(fmt::format("malformed topology: {}", e.what()));
    } catch (const std::invalid_argument& e) {
        throw TopologyError(fmt::format("malformed topology: {}", e.what()));
    }
    return Topology(std::move(ops));
}

}  // namespace meshflow
