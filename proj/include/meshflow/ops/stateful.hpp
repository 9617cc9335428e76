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

#include <atomic>
#include <mutex>
#include <optional>
#include <string_view>
#include <vector>

#include "meshflow/core/window.hpp"
#include "meshflow/ops/routing.hpp"
#include "meshflow/ops/window_store.hpp"
#include "meshflow/runtime/operator.hpp"

namespace meshflow::ops {

enum class AggregateStage {
    kSingle,  // raw events in, final values out
    kPre,     // raw events in, per-(window, key) partials out, routed by window id
    kGlobal,  // partials in (merged), final values out
};

std::string_view to_string(AggregateStage s) noexcept;
AggregateStage parse_stage(std::string_view name);

enum class Grouping { kByKey, kAll };

/// Windowed aggregation, also used for Reduce (grouping kAll, emitted under key 0).
///
/// Results for window w leave when the vertex watermark reaches w. Every emitted event carries
/// the largest event time among its contributors.
class WindowAggregateOperator final : public Operator {
  public:
    struct Config {
        AggregateFunction function;
        AggregateStage stage = AggregateStage::kSingle;
        Grouping grouping = Grouping::kByKey;
        std::uint64_t window_ms = 10'000;
    };

    /// Throws std::invalid_argument for a global stage over a non-mergeable function.
    WindowAggregateOperator(const OperatorContext& ctx, Config config);

    void on_data(std::vector<Event>&& events, const InputInfo& input, OutputSlots& out) override;
    void on_watermark(std::uint64_t through, OutputSlots& out) override;

    const Config& config() const noexcept { return config_; }
    std::size_t open_windows() const;

  private:
    Config config_;
    WindowSpec spec_;
    Router router_;
    mutable std::mutex mutex_;
    WindowStore store_;
};

/// Inner equi-join of two windowed streams on key. Predecessor 0 is the left side.
class WindowJoinOperator final : public Operator {
  public:
    enum class Combine {
        kRatioMicro,  // floor(1e6 * left / right), right == 0 dropped
        kSum,
    };

    struct Config {
        Combine combine = Combine::kRatioMicro;
        std::uint64_t window_ms = 10'000;
    };

    WindowJoinOperator(const OperatorContext& ctx, Config config);

    void on_data(std::vector<Event>&& events, const InputInfo& input, OutputSlots& out) override;
    void on_watermark(std::uint64_t through, OutputSlots& out) override;

    /// Keys seen on one side only when their window closed.
    std::uint64_t unmatched() const noexcept { return unmatched_.load(); }

  private:
    Config config_;
    WindowSpec spec_;
    Router router_;
    std::mutex mutex_;
    WindowStore sides_[2];
    std::atomic<std::uint64_t> unmatched_{0};
};

/// floor(1e6 * num / den) without overflow; nullopt when den == 0 or the result exceeds 64 bits.
std::optional<std::uint64_t> ratio_micro(std::uint64_t num, std::uint64_t den) noexcept;

WindowJoinOperator::Combine parse_join_combine(std::string_view name);

}  // namespace meshflow::ops
