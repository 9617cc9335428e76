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
#include <map>
#include <optional>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace meshflow::ops {

/// Per-key window aggregate. `merge` combines two partial states and exists only for
/// commutative, associative functions.
class AggregateFunction {
  public:
    enum class Kind { kCount, kSum, kMax, kMin, kLast };

    explicit AggregateFunction(Kind kind = Kind::kCount) : kind_(kind) {}
    /// "count", "sum", "max", "min", "last". Throws std::invalid_argument.
    static AggregateFunction parse(std::string_view name);

    Kind kind() const noexcept { return kind_; }
    std::string_view name() const noexcept;
    bool mergeable() const noexcept { return kind_ != Kind::kLast; }

    std::uint64_t init() const noexcept;
    std::uint64_t combine(std::uint64_t state, std::uint64_t value) const noexcept;
    /// Throws std::logic_error for non-mergeable functions.
    std::uint64_t merge(std::uint64_t a, std::uint64_t b) const;
    std::uint64_t finalize(std::uint64_t state) const noexcept { return state; }

  private:
    Kind kind_;
};

struct WindowCell {
    std::uint64_t state = 0;
    std::uint64_t max_event_time = 0;
};

using KeyTable = std::unordered_map<std::uint64_t, WindowCell>;

/// Two-level map window id -> key -> cell. Not synchronized; the owning operator locks.
class WindowStore {
  public:
    /// Folds `value` into (window, key) with `fold(state, value)`, starting from `init` for a new
    /// cell. Returns false, leaving the store unchanged, if the window was already released.
    template <typename Fold>
    bool add(std::uint64_t window, std::uint64_t key, std::uint64_t value, std::uint64_t event_time,
             std::uint64_t init, Fold&& fold) {
        if (is_released(window)) return false;
        auto [it, fresh] = windows_[window].try_emplace(key, WindowCell{init, event_time});
        WindowCell& cell = it->second;
        cell.state = fold(cell.state, value);
        if (!fresh && event_time > cell.max_event_time) cell.max_event_time = event_time;
        return true;
    }

    bool is_released(std::uint64_t window) const noexcept { return released_ && window <= *released_; }
    std::optional<std::uint64_t> released_through() const noexcept { return released_; }

    /// Removes and returns every window <= `through`, in ascending window order.
    std::vector<std::pair<std::uint64_t, KeyTable>> release_through(std::uint64_t through);

    std::size_t open_windows() const noexcept { return windows_.size(); }
    std::size_t cell_count() const noexcept;

  private:
    std::map<std::uint64_t, KeyTable> windows_;
    std::optional<std::uint64_t> released_;
};

}  // namespace meshflow::ops
