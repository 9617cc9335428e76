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

#include "meshflow/ops/expression.hpp"

#include <fmt/format.h>

#include <stdexcept>
#include <string>

namespace meshflow::ops {

namespace {

Field parse_field(const std::string& s) {
    if (s == "key") return Field::kKey;
    if (s == "value") return Field::kValue;
    if (s == "event_time") return Field::kEventTime;
    throw std::invalid_argument(fmt::format("unknown event field '{}'", s));
}

const char* field_name(Field f) {
    switch (f) {
        case Field::kKey: return "key";
        case Field::kValue: return "value";
        case Field::kEventTime: return "event_time";
    }
    return "value";
}

constexpr const char* kCmpNames[] = {"eq", "ne", "lt", "le", "gt", "ge", "true", "false"};
constexpr const char* kFnNames[] = {"identity", "add", "mul", "mod"};

}  // namespace

Predicate Predicate::from_json(const nlohmann::json& j) {
    try {
        const auto cmp = j.at("cmp").get<std::string>();
        for (int i = 0; i < 8; ++i) {
            if (cmp == kCmpNames[i]) {
                return Predicate(parse_field(j.value("field", std::string("value"))), static_cast<Cmp>(i),
                                 j.value("arg", std::uint64_t{0}));
            }
        }
        throw std::invalid_argument(fmt::format("unknown comparator '{}'", cmp));
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(fmt::format("malformed predicate {}: {}", j.dump(), e.what()));
    }
}

bool Predicate::operator()(const Event& e) const noexcept {
    const std::uint64_t x = field_ == Field::kKey ? e.key : field_ == Field::kValue ? e.value : e.event_time;
    switch (cmp_) {
        case Cmp::kEq: return x == arg_;
        case Cmp::kNe: return x != arg_;
        case Cmp::kLt: return x < arg_;
        case Cmp::kLe: return x <= arg_;
        case Cmp::kGt: return x > arg_;
        case Cmp::kGe: return x >= arg_;
        case Cmp::kTrue: return true;
        case Cmp::kFalse: return false;
    }
    return false;
}

nlohmann::json Predicate::to_json() const {
    return {{"field", field_name(field_)}, {"cmp", kCmpNames[static_cast<int>(cmp_)]}, {"arg", arg_}};
}

ValueFunction ValueFunction::from_json(const nlohmann::json& j) {
    try {
        const auto fn = j.at("fn").get<std::string>();
        for (int i = 0; i < 4; ++i) {
            if (fn == kFnNames[i]) return ValueFunction(static_cast<Fn>(i), j.value("arg", std::uint64_t{0}));
        }
        throw std::invalid_argument(fmt::format("unknown map function '{}'", fn));
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(fmt::format("malformed map function {}: {}", j.dump(), e.what()));
    }
}

std::uint64_t ValueFunction::operator()(std::uint64_t v) const {
    switch (fn_) {
        case Fn::kIdentity: return v;
        case Fn::kAdd: return v + arg_;
        case Fn::kMul: return v * arg_;
        case Fn::kMod:
            if (arg_ == 0) throw std::domain_error("map: modulo by zero");
            return v % arg_;
    }
    return v;
}

nlohmann::json ValueFunction::to_json() const {
    return {{"fn", kFnNames[static_cast<int>(fn_)]}, {"arg", arg_}};
}

}  // namespace meshflow::ops
