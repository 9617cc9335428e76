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

#include "meshflow/ops/stateful.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <limits>
#include <map>
#include <stdexcept>

namespace meshflow::ops {

std::string_view to_string(AggregateStage s) noexcept {
    switch (s) {
        case AggregateStage::kSingle: return "single";
        case AggregateStage::kPre: return "pre";
        case AggregateStage::kGlobal: return "global";
    }
    return "unknown";
}

AggregateStage parse_stage(std::string_view name) {
    if (name == "single") return AggregateStage::kSingle;
    if (name == "pre") return AggregateStage::kPre;
    if (name == "global") return AggregateStage::kGlobal;
    throw std::invalid_argument(fmt::format("unknown aggregation stage '{}'", name));
}

WindowJoinOperator::Combine parse_join_combine(std::string_view name) {
    if (name == "ratio_micro") return WindowJoinOperator::Combine::kRatioMicro;
    if (name == "sum") return WindowJoinOperator::Combine::kSum;
    throw std::invalid_argument(fmt::format("unknown join combination '{}'", name));
}

std::optional<std::uint64_t> ratio_micro(std::uint64_t num, std::uint64_t den) noexcept {
    __extension__ using u128 = unsigned __int128;
    if (den == 0) return std::nullopt;
    const u128 q = static_cast<u128>(num) * 1'000'000u / den;
    if (q > std::numeric_limits<std::uint64_t>::max()) return std::nullopt;
    return static_cast<std::uint64_t>(q);
}

namespace {

RoutingKind output_routing(AggregateStage stage) {
    return stage == AggregateStage::kPre ? RoutingKind::kShardByWindow : RoutingKind::kShardByKey;
}

}  // namespace

WindowAggregateOperator::WindowAggregateOperator(const OperatorContext& ctx, Config config)
    : config_(config), spec_(config.window_ms), router_(output_routing(config.stage), ctx, config.window_ms) {
    if (config_.stage != AggregateStage::kSingle && !config_.function.mergeable()) {
        throw std::invalid_argument(
            fmt::format("aggregate '{}' is not mergeable; use a single-stage aggregation", config_.function.name()));
    }
}

void WindowAggregateOperator::on_data(std::vector<Event>&& events, const InputInfo&, OutputSlots&) {
    const auto& f = config_.function;
    const bool merging = config_.stage == AggregateStage::kGlobal;
    std::uint64_t late = 0;
    {
        std::lock_guard lock(mutex_);
        for (const auto& e : events) {
            const std::uint64_t key = config_.grouping == Grouping::kAll ? 0 : e.key;
            const bool ok = merging ? store_.add(window_id(e.event_time, spec_), key, e.value, e.event_time, f.init(),
                                                 [&f](std::uint64_t s, std::uint64_t v) { return f.merge(s, v); })
                                    : store_.add(window_id(e.event_time, spec_), key, e.value, e.event_time, f.init(),
                                                 [&f](std::uint64_t s, std::uint64_t v) { return f.combine(s, v); });
            if (!ok) ++late;
        }
    }
    if (late != 0) counters_.late.fetch_add(late, std::memory_order_relaxed);
}

void WindowAggregateOperator::on_watermark(std::uint64_t through, OutputSlots& out) {
    std::lock_guard lock(mutex_);
    for (auto& [w, keys] : store_.release_through(through)) {
        if (keys.empty()) continue;
        counters_.windows_released.fetch_add(1, std::memory_order_relaxed);
        for (const auto& [key, cell] : keys) {
            const std::uint64_t value =
                config_.stage == AggregateStage::kPre ? cell.state : config_.function.finalize(cell.state);
            Event e{key, value, cell.max_event_time, {}};
            out[router_.slot(e)].push_back(std::move(e));
        }
    }
}

std::size_t WindowAggregateOperator::open_windows() const {
    std::lock_guard lock(mutex_);
    return store_.open_windows();
}

WindowJoinOperator::WindowJoinOperator(const OperatorContext& ctx, Config config)
    : config_(config), spec_(config.window_ms), router_(RoutingKind::kShardByKey, ctx) {
    if (ctx.indegree != 2) throw std::invalid_argument("window join needs exactly two inputs");
}

void WindowJoinOperator::on_data(std::vector<Event>&& events, const InputInfo& input, OutputSlots&) {
    auto& store = sides_[input.predecessor_index == 0 ? 0 : 1];
    std::uint64_t late = 0;
    {
        std::lock_guard lock(mutex_);
        for (const auto& e : events) {
            if (!store.add(window_id(e.event_time, spec_), e.key, e.value, e.event_time, 0,
                           [](std::uint64_t s, std::uint64_t v) { return s + v; })) {
                ++late;
            }
        }
    }
    if (late != 0) counters_.late.fetch_add(late, std::memory_order_relaxed);
}

void WindowJoinOperator::on_watermark(std::uint64_t through, OutputSlots& out) {
    std::lock_guard lock(mutex_);
    auto left = sides_[0].release_through(through);
    auto right = sides_[1].release_through(through);

    std::map<std::uint64_t, std::pair<KeyTable*, KeyTable*>> windows;
    for (auto& [w, keys] : left) windows[w].first = &keys;
    for (auto& [w, keys] : right) windows[w].second = &keys;

    for (auto& [w, sides] : windows) {
        auto* l = sides.first;
        auto* r = sides.second;
        bool emitted = false;
        if (l != nullptr) {
            for (const auto& [key, lc] : *l) {
                const WindowCell* rc = nullptr;
                if (r != nullptr) {
                    auto it = r->find(key);
                    if (it != r->end()) rc = &it->second;
                }
                if (rc == nullptr) {
                    unmatched_.fetch_add(1, std::memory_order_relaxed);
                    continue;
                }
                std::optional<std::uint64_t> value;
                if (config_.combine == Combine::kRatioMicro) {
                    value = ratio_micro(lc.state, rc->state);
                } else {
                    value = lc.state + rc->state;
                }
                if (!value) {
                    counters_.dropped.fetch_add(1, std::memory_order_relaxed);
                    continue;
                }
                Event e{key, *value, std::max(lc.max_event_time, rc->max_event_time), {}};
                out[router_.slot(e)].push_back(std::move(e));
                emitted = true;
            }
        }
        if (r != nullptr) {
            for (const auto& [key, rc] : *r) {
                if (l == nullptr || l->find(key) == l->end()) unmatched_.fetch_add(1, std::memory_order_relaxed);
            }
        }
        if (emitted) counters_.windows_released.fetch_add(1, std::memory_order_relaxed);
    }
}

}  // namespace meshflow::ops
