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
#include <cstddef>
#include <cstdint>
#include <vector>

#include "meshflow/core/clock.hpp"
#include "meshflow/core/event.hpp"
#include "meshflow/core/window.hpp"

namespace meshflow {

struct OperatorContext {
    int rank = 0;
    int world_size = 1;
    int indegree = 0;
    int outdegree = 0;
    bool pipelined = false;
    const Clock* clock = nullptr;

    std::size_t slot_count() const noexcept {
        return static_cast<std::size_t>(outdegree) * static_cast<std::size_t>(world_size);
    }
};

struct CounterSnapshot {
    std::uint64_t events_in = 0;
    std::uint64_t events_out = 0;
    std::uint64_t dropped = 0;
    std::uint64_t late = 0;
    std::uint64_t errors = 0;
    std::uint64_t protocol_errors = 0;
    std::uint64_t windows_released = 0;

    CounterSnapshot& operator+=(const CounterSnapshot& o) noexcept;
};

struct OperatorCounters {
    std::atomic<std::uint64_t> events_in{0};
    std::atomic<std::uint64_t> events_out{0};
    std::atomic<std::uint64_t> dropped{0};
    std::atomic<std::uint64_t> late{0};
    std::atomic<std::uint64_t> errors{0};
    std::atomic<std::uint64_t> protocol_errors{0};
    std::atomic<std::uint64_t> windows_released{0};

    CounterSnapshot snapshot() const noexcept;
};

/// One event vector per outgoing endpoint. Slot i*world_size + r feeds successor i at rank r.
class OutputSlots {
  public:
    explicit OutputSlots(std::size_t n) : slots_(n) {}

    std::vector<Event>& operator[](std::size_t i) { return slots_.at(i); }
    const std::vector<Event>& operator[](std::size_t i) const { return slots_.at(i); }
    std::size_t size() const noexcept { return slots_.size(); }
    std::size_t event_count() const noexcept;
    bool empty() const noexcept { return event_count() == 0; }
    void clear() noexcept;

  private:
    std::vector<std::vector<Event>> slots_;
};

/// Which incoming endpoint a batch arrived on.
struct InputInfo {
    std::size_t endpoint = 0;
    int predecessor_index = 0;
    int source_rank = 0;
};

/// The per-vertex processing logic. The runtime owns threading, queues and marker alignment.
///
/// on_data may run concurrently on several processing threads (one per incoming endpoint);
/// stateful operators guard their own state. on_watermark is serialized by the runtime and is
/// called each time the low watermark over all incoming endpoints advances; `through` is the last
/// complete window id, or kAllWindows once every input has terminated.
class Operator {
  public:
    virtual ~Operator() = default;

    virtual void on_data(std::vector<Event>&& events, const InputInfo& input, OutputSlots& out) = 0;
    virtual void on_watermark(std::uint64_t /*through*/, OutputSlots& /*out*/) {}

    OperatorCounters& counters() noexcept { return counters_; }
    const OperatorCounters& counters() const noexcept { return counters_; }

  protected:
    OperatorCounters counters_;
};

class SourceEmitter {
  public:
    virtual ~SourceEmitter() = default;
    /// Pushes every non-empty slot downstream as one DATA message.
    virtual void emit(OutputSlots& slots) = 0;
    /// Broadcasts WINDOW_MARKER(through) on every outgoing endpoint.
    virtual void emit_watermark(std::uint64_t through) = 0;
    virtual bool stop_requested() const = 0;
};

/// An operator with no inputs, driven by its own ingestion thread. The runtime sends TERMINATE on
/// every outgoing endpoint after run() returns.
class SourceOperator : public Operator {
  public:
    void on_data(std::vector<Event>&&, const InputInfo&, OutputSlots&) final;
    virtual void run(SourceEmitter& emitter) = 0;
};

}  // namespace meshflow
