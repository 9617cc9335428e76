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

#include "meshflow/transport/transport.hpp"

#include <fmt/format.h>

#include <set>

namespace meshflow {

std::string_view to_string(Backend b) noexcept {
    return b == Backend::kInProcess ? "in-process" : "socket";
}

Backend parse_backend(std::string_view s) {
    if (s == "in-process" || s == "inprocess" || s == "in_process") return Backend::kInProcess;
    if (s == "socket") return Backend::kSocket;
    throw std::invalid_argument(fmt::format("unknown backend '{}'", s));
}

void TransportConfig::validate() const {
    if (world_size < 1 || world_size > kMaxWorldSize) {
        throw std::invalid_argument(fmt::format("world_size {} outside [1, {}]", world_size, kMaxWorldSize));
    }
    if (send_queue_capacity == 0) {
        throw std::invalid_argument("send_queue_capacity must be positive");
    }
    if (backend == Backend::kSocket) {
        if (addresses.size() != static_cast<std::size_t>(world_size)) {
            throw std::invalid_argument(fmt::format("socket backend needs {} addresses, got {}", world_size,
                                                    addresses.size()));
        }
        std::set<int> ranks;
        for (const auto& a : addresses) {
            if (a.rank < 0 || a.rank >= world_size || !ranks.insert(a.rank).second) {
                throw std::invalid_argument(fmt::format("invalid or duplicate rank {} in addresses", a.rank));
            }
        }
    }
}

TransportStats Transport::stats() const {
    TransportStats s;
    s.messages_sent = messages_sent_.load();
    s.events_sent = events_sent_.load();
    for (std::size_t i = 0; i < by_source_op_.size(); ++i) {
        s.messages_by_source_op[i] = by_source_op_[i].load();
    }
    return s;
}

void Transport::check_send(int dest, ChannelTag tag) const {
    if (dest < 0 || dest >= world_size()) {
        throw TransportError(fmt::format("destination rank {} outside world of {}", dest, world_size()));
    }
    if (tag.target_rank != dest) {
        throw TransportError(fmt::format("tag {} does not target rank {}", tag.to_string(), dest));
    }
    if (tag.source_rank != rank()) {
        throw TransportError(fmt::format("tag {} does not originate at rank {}", tag.to_string(), rank()));
    }
}

void Transport::count_send(ChannelTag tag, std::size_t events) noexcept {
    messages_sent_.fetch_add(1, std::memory_order_relaxed);
    events_sent_.fetch_add(events, std::memory_order_relaxed);
    by_source_op_[tag.source_op].fetch_add(1, std::memory_order_relaxed);
}

}  // namespace meshflow
