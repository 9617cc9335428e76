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

#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

#include "meshflow/runtime/operator.hpp"

namespace meshflow::bench {

struct WindowResultRecord {
    std::uint64_t window_id = 0;
    std::uint64_t key = 0;
    std::uint64_t value = 0;
    std::uint64_t event_time_ms = 0;
    std::uint64_t release_ms = 0;
    std::int64_t latency_ms = 0;

    friend bool operator==(const WindowResultRecord&, const WindowResultRecord&) = default;
};

/// Orders by (window_id, key, value, event_time_ms).
bool result_less(const WindowResultRecord& a, const WindowResultRecord& b) noexcept;

/// Thread-safe accumulator for sink output.
class SinkCollector {
  public:
    void add(std::vector<WindowResultRecord> records);
    /// Sorted snapshot.
    std::vector<WindowResultRecord> records() const;
    std::size_t size() const;

  private:
    mutable std::mutex mutex_;
    std::vector<WindowResultRecord> records_;
};

/// Stamps each arriving windowed event with its release time and hands it to the collector.
class SinkOperator final : public Operator {
  public:
    SinkOperator(const OperatorContext& ctx, std::uint64_t window_ms, SinkCollector& collector);

    void on_data(std::vector<Event>&& events, const InputInfo& input, OutputSlots& out) override;

  private:
    const Clock* clock_;
    std::uint64_t window_ms_;
    SinkCollector& collector_;
};

/// Header: window_id,key,value,event_time_ms,release_ms,latency_ms
void write_sink_csv(const std::string& path, const std::vector<WindowResultRecord>& records);
std::vector<WindowResultRecord> read_sink_csv(const std::string& path);

}  // namespace meshflow::bench
