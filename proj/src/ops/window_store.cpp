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

#include "meshflow/ops/window_store.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace meshflow::ops {

AggregateFunction AggregateFunction::parse(std::string_view name) {
    if (name == "count") return AggregateFunction(Kind::kCount);
    if (name == "sum") return AggregateFunction(Kind::kSum);
    if (name == "max") return AggregateFunction(Kind::kMax);
    if (name == "min") return AggregateFunction(Kind::kMin);
    if (name == "last") return AggregateFunction(Kind::kLast);
    throw std::invalid_argument(fmt::format("unknown aggregate function '{}'", name));
}

std::string_view AggregateFunction::name() const noexcept {
    switch (kind_) {
        case Kind::kCount: return "count";
        case Kind::kSum: return "sum";
        case Kind::kMax: return "max";
        case Kind::kMin: return "min";
        case Kind::kLast: return "last";
    }
    return "unknown";
}

std::uint64_t AggregateFunction::init() const noexcept {
    return kind_ == Kind::kMin ? std::numeric_limits<std::uint64_t>::max() : 0;
}

std::uint64_t AggregateFunction::combine(std::uint64_t state, std::uint64_t value) const noexcept {
    switch (kind_) {
        case Kind::kCount: return state + 1;
        case Kind::kSum: return state + value;
        case Kind::kMax: return std::max(state, value);
        case Kind::kMin: return std::min(state, value);
        case Kind::kLast: return value;
    }
    return state;
}

std::uint64_t AggregateFunction::merge(std::uint64_t a, std::uint64_t b) const {
    switch (kind_) {
        case Kind::kCount:
        case Kind::kSum: return a + b;
        case Kind::kMax: return std::max(a, b);
        case Kind::kMin: return std::min(a, b);
        case Kind::kLast: break;
    }
    throw std::logic_error(fmt::format("aggregate '{}' cannot merge partial results", name()));
}

std::vector<std::pair<std::uint64_t, KeyTable>> WindowStore::release_through(std::uint64_t through) {
    std::vector<std::pair<std::uint64_t, KeyTable>> out;
    auto end = windows_.upper_bound(through);
    for (auto it = windows_.begin(); it != end; ++it) out.emplace_back(it->first, std::move(it->second));
    windows_.erase(windows_.begin(), end);
    if (!released_ || through > *released_) released_ = through;
    return out;
}

std::size_t WindowStore::cell_count() const noexcept {
    std::size_t n = 0;
    for (const auto& [w, keys] : windows_) n += keys.size();
    return n;
}

}  // namespace meshflow::ops
