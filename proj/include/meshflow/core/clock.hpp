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

#include <chrono>
#include <cstdint>

namespace meshflow {

/// Monotonic clock measured from a fixed epoch. All ranks of a run must share the epoch so
/// that event times and release times are comparable.
class Clock {
  public:
    using steady = std::chrono::steady_clock;

    /// Epoch = the instant of construction.
    static Clock starting_now() { return Clock(steady::now()); }
    /// Epoch = the steady clock's own zero (CLOCK_MONOTONIC on Linux), which every process on a
    /// host shares.
    static Clock host_monotonic() { return Clock(steady::time_point{}); }

    explicit Clock(steady::time_point epoch) : epoch_(epoch) {}

    std::uint64_t now_us() const {
        return static_cast<std::uint64_t>(
            std::chrono::duration_cast<std::chrono::microseconds>(steady::now() - epoch_).count());
    }
    std::uint64_t now_ms() const { return now_us() / 1000; }

    steady::time_point epoch() const noexcept { return epoch_; }
    steady::time_point at_us(std::uint64_t us) const { return epoch_ + std::chrono::microseconds(us); }

  private:
    steady::time_point epoch_;
};

}  // namespace meshflow
