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

#include "meshflow/runtime/operator.hpp"

#include <stdexcept>

namespace meshflow {

CounterSnapshot& CounterSnapshot::operator+=(const CounterSnapshot& o) noexcept {
    events_in += o.events_in;
    events_out += o.events_out;
    dropped += o.dropped;
    late += o.late;
    errors += o.errors;
    protocol_errors += o.protocol_errors;
    windows_released += o.windows_released;
    return *this;
}

CounterSnapshot OperatorCounters::snapshot() const noexcept {
    CounterSnapshot s;
    s.events_in = events_in.load();
    s.events_out = events_out.load();
    s.dropped = dropped.load();
    s.late = late.load();
    s.errors = errors.load();
    s.protocol_errors = protocol_errors.load();
    s.windows_released = windows_released.load();
    return s;
}

std::size_t OutputSlots::event_count() const noexcept {
    std::size_t n = 0;
    for (const auto& s : slots_) n += s.size();
    return n;
}

void OutputSlots::clear() noexcept {
    for (auto& s : slots_) s.clear();
}

void SourceOperator::on_data(std::vector<Event>&&, const InputInfo&, OutputSlots&) {
    throw std::logic_error("source operators take no input");
}

}  // namespace meshflow
