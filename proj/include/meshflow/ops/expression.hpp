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

#include <cstdint>

#include "meshflow/core/event.hpp"

namespace meshflow::ops {

enum class Field { kKey, kValue, kEventTime };

/// `{"field": "value", "cmp": "eq", "arg": 0}`; cmp is one of eq, ne, lt, le, gt, ge, true, false.
class Predicate {
  public:
    enum class Cmp { kEq, kNe, kLt, kLe, kGt, kGe, kTrue, kFalse };

    Predicate() = default;
    Predicate(Field field, Cmp cmp, std::uint64_t arg) : field_(field), cmp_(cmp), arg_(arg) {}

    static Predicate always() { return Predicate(Field::kValue, Cmp::kTrue, 0); }
    static Predicate never() { return Predicate(Field::kValue, Cmp::kFalse, 0); }
    /// Throws std::invalid_argument on unknown fields or comparators.
    static Predicate from_json(const nlohmann::json& j);

    bool operator()(const Event& e) const noexcept;
    nlohmann::json to_json() const;

  private:
    Field field_ = Field::kValue;
    Cmp cmp_ = Cmp::kTrue;
    std::uint64_t arg_ = 0;
};

/// Value transformation for Map: `{"fn": "mul", "arg": 2}` with fn one of identity, add, mul, mod.
/// Arithmetic wraps modulo 2^64; mod by zero throws at evaluation.
class ValueFunction {
  public:
    enum class Fn { kIdentity, kAdd, kMul, kMod };

    ValueFunction() = default;
    ValueFunction(Fn fn, std::uint64_t arg) : fn_(fn), arg_(arg) {}

    static ValueFunction from_json(const nlohmann::json& j);

    std::uint64_t operator()(std::uint64_t v) const;
    nlohmann::json to_json() const;

  private:
    Fn fn_ = Fn::kIdentity;
    std::uint64_t arg_ = 0;
};

}  // namespace meshflow::ops
