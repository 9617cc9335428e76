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
#include <limits>

namespace meshflow {

/// Watermark value meaning "every window is complete" (all inputs terminated).
inline constexpr std::uint64_t kAllWindows = std::numeric_limits<std::uint64_t>::max();

/// Tumbling, half-open event-time windows: window i covers [i*size, (i+1)*size).
class WindowSpec {
  public:
    /// Throws std::invalid_argument for a zero size.
    explicit WindowSpec(std::uint64_t window_size_ms);

    constexpr std::uint64_t size_ms() const noexcept { return size_ms_; }
    std::uint64_t start_of(std::uint64_t window_id) const noexcept { return window_id * size_ms_; }
    std::uint64_t end_of(std::uint64_t window_id) const noexcept { return (window_id + 1) * size_ms_; }

    friend bool operator==(const WindowSpec&, const WindowSpec&) = default;

  private:
    std::uint64_t size_ms_;
};

inline std::uint64_t window_id(std::uint64_t event_time_ms, const WindowSpec& spec) noexcept {
    return event_time_ms / spec.size_ms();
}

}  // namespace meshflow
