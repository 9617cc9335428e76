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

#include "meshflow/bench/sink.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace meshflow::bench {

bool result_less(const WindowResultRecord& a, const WindowResultRecord& b) noexcept {
    return std::tie(a.window_id, a.key, a.value, a.event_time_ms) <
           std::tie(b.window_id, b.key, b.value, b.event_time_ms);
}

void SinkCollector::add(std::vector<WindowResultRecord> records) {
    std::lock_guard lock(mutex_);
    records_.insert(records_.end(), records.begin(), records.end());
}

std::vector<WindowResultRecord> SinkCollector::records() const {
    std::vector<WindowResultRecord> out;
    {
        std::lock_guard lock(mutex_);
        out = records_;
    }
    std::sort(out.begin(), out.end(), result_less);
    return out;
}

std::size_t SinkCollector::size() const {
    std::lock_guard lock(mutex_);
    return records_.size();
}

SinkOperator::SinkOperator(const OperatorContext& ctx, std::uint64_t window_ms, SinkCollector& collector)
    : clock_(ctx.clock), window_ms_(window_ms), collector_(collector) {
    if (clock_ == nullptr) throw std::invalid_argument("sink needs a clock");
    if (window_ms_ == 0) throw std::invalid_argument("sink window length must be positive");
}

void SinkOperator::on_data(std::vector<Event>&& events, const InputInfo&, OutputSlots&) {
    const std::uint64_t release = clock_->now_ms();
    std::vector<WindowResultRecord> records;
    records.reserve(events.size());
    for (const auto& e : events) {
        records.push_back(WindowResultRecord{e.event_time / window_ms_, e.key, e.value, e.event_time, release,
                                             static_cast<std::int64_t>(release) -
                                                 static_cast<std::int64_t>(e.event_time)});
    }
    collector_.add(std::move(records));
}

void write_sink_csv(const std::string& path, const std::vector<WindowResultRecord>& records) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", path));
    out << "window_id,key,value,event_time_ms,release_ms,latency_ms\n";
    for (const auto& r : records) {
        out << fmt::format("{},{},{},{},{},{}\n", r.window_id, r.key, r.value, r.event_time_ms, r.release_ms,
                           r.latency_ms);
    }
    if (!out) throw std::runtime_error(fmt::format("error writing {}", path));
}

std::vector<WindowResultRecord> read_sink_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(fmt::format("cannot open {}", path));
    std::vector<WindowResultRecord> out;
    std::string line;
    std::getline(in, line);
    for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        WindowResultRecord r;
        char c1, c2, c3, c4, c5;
        if (!(ss >> r.window_id >> c1 >> r.key >> c2 >> r.value >> c3 >> r.event_time_ms >> c4 >> r.release_ms >> c5 >>
              r.latency_ms)) {
            throw std::runtime_error(fmt::format("{}:{}: malformed sink record", path, lineno));
        }
        out.push_back(r);
    }
    return out;
}

}  // namespace meshflow::bench
