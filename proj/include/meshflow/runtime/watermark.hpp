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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "meshflow/core/window.hpp"

namespace meshflow {

/// Aligns window markers across the incoming endpoints of one vertex.
///
/// Endpoint e is marked through window w once MARKER(w) arrived on it; a terminated endpoint
/// counts as marked through every window. The vertex low watermark is the minimum over endpoints
/// and exists only once every endpoint has reported at least once.
class WatermarkTracker {
  public:
    enum class Result { kAdvanced, kUnchanged, kDuplicate };

    explicit WatermarkTracker(std::size_t endpoints);

    Result mark(std::size_t endpoint, std::uint64_t window_id);
    Result terminate(std::size_t endpoint);

    /// Low watermark over all endpoints, kAllWindows once all are terminated.
    std::optional<std::uint64_t> low() const noexcept { return low_; }
    std::optional<std::uint64_t> endpoint_mark(std::size_t endpoint) const { return marks_.at(endpoint); }
    bool all_terminated() const noexcept { return terminated_count_ == marks_.size(); }
    std::size_t endpoints() const noexcept { return marks_.size(); }

  private:
    Result recompute();

    std::vector<std::optional<std::uint64_t>> marks_;
    std::vector<bool> terminated_;
    std::size_t terminated_count_ = 0;
    std::optional<std::uint64_t> low_;
};

}  // namespace meshflow
