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

#include <atomic>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "meshflow/core/clock.hpp"
#include "meshflow/core/event.hpp"
#include "meshflow/ops/routing.hpp"
#include "meshflow/ops/static_table.hpp"
#include "meshflow/runtime/operator.hpp"

namespace meshflow::bench {

/// Event type carried in Event::value.
enum class EventType : std::uint64_t { kView = 0, kClick = 1, kPurchase = 2 };
inline constexpr std::uint64_t kEventTypeCount = 3;

enum class TimeMode {
    kWall,       // token-bucket pacing, event time = emission time
    kScheduled,  // event i is stamped start + i / rate and emitted no earlier than that
};

std::string_view to_string(TimeMode m) noexcept;
TimeMode parse_time_mode(std::string_view s);

struct GeneratorConfig {
    double target_rate = 10'000;  // events/s summed over all generator instances
    std::uint32_t avg_event_bytes = 136;
    std::uint32_t num_campaigns = 100;
    std::uint32_t ads_per_campaign = 10;
    double duration_s = 60;
    std::uint64_t seed = 42;
    std::uint64_t window_ms = 10'000;
    TimeMode time_mode = TimeMode::kWall;
    std::uint32_t batch_size = 256;
    std::uint32_t linger_ms = 5;

    /// Throws std::invalid_argument.
    void validate() const;
    double per_instance_rate(int instances) const { return target_rate / instances; }

    nlohmann::json to_json() const;
    static GeneratorConfig from_json(const nlohmann::json& j);
    friend bool operator==(const GeneratorConfig&, const GeneratorConfig&) = default;
};

/// The ad catalogue: num_campaigns * ads_per_campaign distinct ad ids, each owned by one campaign
/// (campaign ids 1..num_campaigns). Derived from the seed only, so every rank agrees.
struct AdCatalogue {
    std::vector<std::uint64_t> ad_ids;
    ops::StaticTable ad_to_campaign;
};

AdCatalogue make_ad_catalogue(const GeneratorConfig& config);

/// The deterministic event sequence of one generator instance; timestamps are supplied by caller.
class EventSynth {
  public:
    EventSynth(const GeneratorConfig& config, const AdCatalogue& catalogue, int rank);

    Event next(std::uint64_t event_time_ms);
    std::uint32_t max_payload_bytes() const noexcept { return max_payload_; }

  private:
    std::vector<std::uint64_t> ads_;
    std::mt19937_64 rng_;
    std::uniform_int_distribution<std::size_t> ad_dist_;
    std::uniform_int_distribution<std::uint64_t> type_dist_;
    std::uniform_int_distribution<std::uint32_t> payload_dist_;
    std::uint32_t max_payload_;
};

/// Classic token bucket. Tokens beyond `burst` are discarded and counted as starvation: time the
/// consumer could not keep up with the configured rate.
class TokenBucket {
  public:
    TokenBucket(double rate_per_s, double burst, std::uint64_t now_us);

    /// Refills to `now_us` and takes up to `max` whole tokens.
    std::uint64_t take(std::uint64_t now_us, std::uint64_t max);
    /// Microseconds from `now_us` until one whole token is available (0 if already).
    std::uint64_t wait_us(std::uint64_t now_us) const;
    double starved() const noexcept { return starved_; }

  private:
    void refill(std::uint64_t now_us);

    double rate_;
    double burst_;
    double tokens_ = 0;
    double starved_ = 0;
    std::uint64_t last_us_;
};

struct LoggedEvent {
    std::uint64_t event_time = 0;
    std::uint64_t key = 0;
    std::uint64_t value = 0;
};

/// Every event each generator instance emitted, per rank. Each rank writes only its own list; read
/// after the run has been joined.
class EventLog {
  public:
    explicit EventLog(int world_size) : per_rank_(static_cast<std::size_t>(world_size)) {}

    std::vector<LoggedEvent>& rank(int r) { return per_rank_.at(static_cast<std::size_t>(r)); }
    const std::vector<LoggedEvent>& rank(int r) const { return per_rank_.at(static_cast<std::size_t>(r)); }
    int world_size() const noexcept { return static_cast<int>(per_rank_.size()); }
    std::vector<LoggedEvent> all() const;
    std::size_t size() const noexcept;

  private:
    std::vector<std::vector<LoggedEvent>> per_rank_;
};

class GeneratorOperator final : public SourceOperator {
  public:
    /// `log` may be null.
    GeneratorOperator(const OperatorContext& ctx, GeneratorConfig config, const AdCatalogue& catalogue,
                      ops::RoutingKind routing, EventLog* log);

    void run(SourceEmitter& emitter) override;

    std::uint64_t generated() const noexcept { return generated_.load(); }
    std::uint64_t starved() const noexcept { return starved_.load(); }

  private:
    OperatorContext ctx_;
    GeneratorConfig config_;
    EventSynth synth_;
    ops::Router router_;
    EventLog* log_;
    std::atomic<std::uint64_t> generated_{0};
    std::atomic<std::uint64_t> starved_{0};
};

}  // namespace meshflow::bench
