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

#include "meshflow/runtime/watermark.hpp"

#include <algorithm>

namespace meshflow {

WatermarkTracker::WatermarkTracker(std::size_t endpoints) : marks_(endpoints), terminated_(endpoints, false) {}

WatermarkTracker::Result WatermarkTracker::mark(std::size_t endpoint, std::uint64_t window_id) {
    auto& m = marks_.at(endpoint);
    if (terminated_[endpoint] || (m && window_id <= *m)) return Result::kDuplicate;
    m = window_id;
    return recompute();
}

WatermarkTracker::Result WatermarkTracker::terminate(std::size_t endpoint) {
    if (terminated_.at(endpoint)) return Result::kDuplicate;
    terminated_[endpoint] = true;
    ++terminated_count_;
    marks_[endpoint] = kAllWindows;
    return recompute();
}

WatermarkTracker::Result WatermarkTracker::recompute() {
    std::uint64_t lowest = kAllWindows;
    for (const auto& m : marks_) {
        if (!m) return Result::kUnchanged;
        lowest = std::min(lowest, *m);
    }
    if (low_ && lowest <= *low_) return Result::kUnchanged;
    low_ = lowest;
    return Result::kAdvanced;
}

}  // namespace meshflow
