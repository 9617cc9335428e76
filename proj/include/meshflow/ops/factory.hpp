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

#include <memory>

#include "meshflow/runtime/operator.hpp"
#include "meshflow/runtime/topology.hpp"

namespace meshflow::ops {

/// Builds Map, Filter, Split, StaticJoin, Reduce, Aggregation and WindowJoin operators from their
/// descriptor params. Returns nullptr for generator and sink kinds, which workloads provide.
/// Throws std::invalid_argument on malformed params.
///
/// Recognized params:
///   routing      "value" | "key" | "window" | "local" (stateless default "value")
///   fn           Map value function, see ValueFunction
///   predicate    Filter predicate; conditions: Split predicates, one per successor
///   table        StaticJoin entries [[k, v], ...]; or table_csv: path
///   function     count | sum | max | min | last
///   stage        single | pre | global; group: key | all
///   window_ms    window length in milliseconds
///   combine      WindowJoin combination: ratio_micro | sum
std::unique_ptr<Operator> make_standard_operator(const OperatorDescriptor& desc, const OperatorContext& ctx);

}  // namespace meshflow::ops
