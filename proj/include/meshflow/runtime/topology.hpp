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

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace meshflow {

inline constexpr int kMaxOperators = 256;

enum class OperatorKind {
    kGenerator,
    kMap,
    kFilter,
    kSplit,
    kStaticJoin,
    kReduce,
    kAggregation,
    kWindowJoin,
    kSink,
};

std::string_view to_string(OperatorKind kind) noexcept;
/// Throws std::invalid_argument for unknown names.
OperatorKind parse_operator_kind(std::string_view name);

/// One-to-one operators (sources included) that may bypass the transport when pipelined.
bool is_stateless(OperatorKind kind) noexcept;
bool is_windowed(OperatorKind kind) noexcept;

struct OperatorDescriptor {
    int op_id = 0;
    OperatorKind kind = OperatorKind::kMap;
    std::string name;
    std::vector<int> predecessors;
    std::vector<int> successors;
    bool pipelined = false;
    nlohmann::json params = nlohmann::json::object();

    std::size_t indegree() const noexcept { return predecessors.size(); }
    std::size_t outdegree() const noexcept { return successors.size(); }

    /// Position of `op` among the predecessors, or -1.
    int predecessor_index(int op) const noexcept;
    int successor_index(int op) const noexcept;
};

class TopologyError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// A validated multi-rooted DAG of operators. Construction throws TopologyError naming the
/// offending operator or edge when ids are duplicated or out of range, edges are one-sided or
/// dangling, a cycle exists, sources/sinks have the wrong kind, or a windowed operator is marked
/// pipelined.
class Topology {
  public:
    explicit Topology(std::vector<OperatorDescriptor> operators);

    const std::vector<OperatorDescriptor>& operators() const noexcept { return operators_; }
    const OperatorDescriptor& op(int op_id) const;
    std::size_t size() const noexcept { return operators_.size(); }

    std::vector<int> sources() const;
    std::vector<int> sinks() const;
    const std::vector<int>& topological_order() const noexcept { return order_; }

    nlohmann::json to_json() const;
    static Topology from_json(const nlohmann::json& j);

  private:
    std::vector<OperatorDescriptor> operators_;
    std::vector<int> index_of_;  // op_id -> position in operators_, -1 if absent
    std::vector<int> order_;
};

}  // namespace meshflow
