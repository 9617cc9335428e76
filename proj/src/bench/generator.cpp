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

#include "meshflow/bench/generator.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <thread>
#include <unordered_set>

namespace meshflow::bench {

std::string_view to_string(TimeMode m) noexcept { return m == TimeMode::kWall ? "wall" : "scheduled"; }

TimeMode parse_time_mode(std::string_view s) {
    if (s == "wall") return TimeMode::kWall;
    if (s == "scheduled") return TimeMode::kScheduled;
    throw std::invalid_argument(fmt::format("unknown time mode '{}'", s));
}

void GeneratorConfig::validate() const {
    if (!(target_rate > 0)) throw std::invalid_argument("rate must be positive");
    if (!(duration_s > 0)) throw std::invalid_argument("duration must be positive");
    if (avg_event_bytes < kEventHeaderBytes) {
        throw std::invalid_argument(fmt::format("average event size must be at least {} bytes", kEventHeaderBytes));
    }
    if (num_campaigns == 0 || ads_per_campaign == 0) throw std::invalid_argument("campaign table is empty");
    if (window_ms == 0) throw std::invalid_argument("window length must be positive");
    if (batch_size == 0) throw std::invalid_argument("batch size must be positive");
}

nlohmann::json GeneratorConfig::to_json() const {
    return {{"target_rate", target_rate},
            {"avg_event_bytes", avg_event_bytes},
            {"num_campaigns", num_campaigns},
            {"ads_per_campaign", ads_per_campaign},
            {"duration_s", duration_s},
            {"seed", seed},
            {"window_ms", window_ms},
            {"time_mode", std::string(to_string(time_mode))},
            {"batch_size", batch_size},
            {"linger_ms", linger_ms}};
}

GeneratorConfig GeneratorConfig::from_json(const nlohmann::json& j) {
    GeneratorConfig c;
    c.target_rate = j.value("target_rate", c.target_rate);
    c.avg_event_bytes = j.value("avg_event_bytes", c.avg_event_bytes);
    c.num_campaigns = j.value("num_campaigns", c.num_campaigns);
    c.ads_per_campaign = j.value("ads_per_campaign", c.ads_per_campaign);
    c.duration_s = j.value("duration_s", c.duration_s);
    c.seed = j.value("seed", c.seed);
    c.window_ms = j.value("window_ms", c.window_ms);
    c.time_mode = parse_time_mode(j.value("time_mode", std::string(to_string(c.time_mode))));
    c.batch_size = j.value("batch_size", c.batch_size);
    c.linger_ms = j.value("linger_ms", c.linger_ms);
    return c;
}

AdCatalogue make_ad_catalogue(const GeneratorConfig& config) {
    const std::size_t total = std::size_t{config.num_campaigns} * config.ads_per_campaign;
    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_int_distribution<std::uint64_t> id_dist(1, 1'000'000'000);
    AdCatalogue cat;
    std::unordered_set<std::uint64_t> seen;
    std::unordered_map<std::uint64_t, std::uint64_t> table;
    while (cat.ad_ids.size() < total) {
        const auto id = id_dist(rng);
        if (!seen.insert(id).second) continue;
        table[id] = cat.ad_ids.size() / config.ads_per_campaign + 1;
        cat.ad_ids.push_back(id);
    }
    cat.ad_to_campaign = ops::StaticTable(std::move(table));
    return cat;
}

namespace {

std::mt19937_64 instance_rng(std::uint64_t seed, int rank) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(rank)};
    return std::mt19937_64(seq);
}

}  // namespace

EventSynth::EventSynth(const GeneratorConfig& config, const AdCatalogue& catalogue, int rank)
    : ads_(catalogue.ad_ids),
      rng_(instance_rng(config.seed, rank)),
      ad_dist_(0, catalogue.ad_ids.size() - 1),
      type_dist_(0, kEventTypeCount - 1),
      payload_dist_(0, 2 * (config.avg_event_bytes - static_cast<std::uint32_t>(kEventHeaderBytes))),
      max_payload_(2 * (config.avg_event_bytes - static_cast<std::uint32_t>(kEventHeaderBytes))) {
    if (catalogue.ad_ids.empty()) throw std::invalid_argument("empty ad catalogue");
}

Event EventSynth::next(std::uint64_t event_time_ms) {
    Event e;
    e.key = ads_[ad_dist_(rng_)];
    e.value = type_dist_(rng_);
    e.event_time = event_time_ms;
    const auto len = payload_dist_(rng_);
    e.payload.resize(len);
    for (std::uint32_t i = 0; i < len; ++i) e.payload[i] = static_cast<std::uint8_t>(e.key + i);
    return e;
}

TokenBucket::TokenBucket(double rate_per_s, double burst, std::uint64_t now_us)
    : rate_(rate_per_s), burst_(std::max(1.0, burst)), last_us_(now_us) {}

void TokenBucket::refill(std::uint64_t now_us) {
    if (now_us <= last_us_) return;
    tokens_ += static_cast<double>(now_us - last_us_) * rate_ / 1e6;
    last_us_ = now_us;
    if (tokens_ > burst_) {
        starved_ += tokens_ - burst_;
        tokens_ = burst_;
    }
}

std::uint64_t TokenBucket::take(std::uint64_t now_us, std::uint64_t max) {
    refill(now_us);
    const auto n = std::min<std::uint64_t>(max, static_cast<std::uint64_t>(tokens_));
    tokens_ -= static_cast<double>(n);
    return n;
}

std::uint64_t TokenBucket::wait_us(std::uint64_t now_us) const {
    double tokens = tokens_;
    if (now_us > last_us_) tokens += static_cast<double>(now_us - last_us_) * rate_ / 1e6;
    if (tokens >= 1.0) return 0;
    return static_cast<std::uint64_t>(std::ceil((1.0 - tokens) * 1e6 / rate_));
}

std::vector<LoggedEvent> EventLog::all() const {
    std::vector<LoggedEvent> out;
    out.reserve(size());
    for (const auto& r : per_rank_) out.insert(out.end(), r.begin(), r.end());
    return out;
}

std::size_t EventLog::size() const noexcept {
    std::size_t n = 0;
    for (const auto& r : per_rank_) n += r.size();
    return n;
}

GeneratorOperator::GeneratorOperator(const OperatorContext& ctx, GeneratorConfig config,
                                     const AdCatalogue& catalogue, ops::RoutingKind routing, EventLog* log)
    : ctx_(ctx), config_(config), synth_(config, catalogue, ctx.rank), router_(routing, ctx), log_(log) {
    config_.validate();
    if (ctx.clock == nullptr) throw std::invalid_argument("generator needs a clock");
}

void GeneratorOperator::run(SourceEmitter& emitter) {
    const Clock& clock = *ctx_.clock;
    const double rate = config_.per_instance_rate(ctx_.world_size);
    const std::uint64_t linger_us = std::uint64_t{config_.linger_ms} * 1000;
    std::vector<LoggedEvent>* log = log_ != nullptr ? &log_->rank(ctx_.rank) : nullptr;

    OutputSlots slots(ctx_.slot_count());
    std::size_t buffered = 0;
    std::uint64_t first_buffered_us = 0;
    std::optional<std::uint64_t> window;

    auto flush = [&] {
        if (buffered == 0) return;
        emitter.emit(slots);
        buffered = 0;
    };
    auto flush_if_stale = [&](std::uint64_t at_us) {
        if (buffered != 0 && at_us >= first_buffered_us + linger_us) flush();
    };
    auto produce = [&](std::uint64_t t_ms, std::uint64_t now_us) {
        const std::uint64_t w = t_ms / config_.window_ms;
        if (window && w > *window) {
            flush();
            emitter.emit_watermark(w - 1);
        }
        if (!window || w > *window) window = w;
        Event e = synth_.next(t_ms);
        if (log != nullptr) log->push_back(LoggedEvent{e.event_time, e.key, e.value});
        const auto slot = router_.slot(e);
        if (buffered == 0) first_buffered_us = now_us;
        slots[slot].push_back(std::move(e));
        ++buffered;
        generated_.fetch_add(1, std::memory_order_relaxed);
        if (slots[slot].size() >= config_.batch_size) flush();
    };

    if (config_.time_mode == TimeMode::kScheduled) {
        const auto total = static_cast<std::uint64_t>(std::floor(rate * config_.duration_s));
        if (log != nullptr) log->reserve(total);
        for (std::uint64_t i = 0; i < total && !emitter.stop_requested(); ++i) {
            const auto t_us = static_cast<std::uint64_t>(static_cast<long double>(i) * 1e6L / rate);
            std::uint64_t now = clock.now_us();
            if (t_us > now) {
                flush_if_stale(t_us);
                std::this_thread::sleep_until(clock.at_us(t_us));
                now = t_us;
            } else {
                flush_if_stale(now);
            }
            produce(t_us / 1000, now);
        }
    } else {
        const std::uint64_t start = clock.now_us();
        const auto end = start + static_cast<std::uint64_t>(config_.duration_s * 1e6);
        TokenBucket bucket(rate, rate * static_cast<double>(config_.linger_ms) / 1000.0, start);
        while (!emitter.stop_requested()) {
            const std::uint64_t now = clock.now_us();
            if (now >= end) break;
            const auto n = bucket.take(now, config_.batch_size);
            if (n == 0) {
                const auto wake = std::min(end, now + std::max<std::uint64_t>(1, bucket.wait_us(now)));
                flush_if_stale(wake);
                std::this_thread::sleep_until(clock.at_us(wake));
                continue;
            }
            for (std::uint64_t k = 0; k < n; ++k) produce(now / 1000, now);
            flush_if_stale(now);
        }
        starved_.store(static_cast<std::uint64_t>(bucket.starved()));
    }
    flush();
    if (window) emitter.emit_watermark(*window);
}

}  // namespace meshflow::bench
