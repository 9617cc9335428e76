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

#include "meshflow/transport/in_process_transport.hpp"

#include <fmt/format.h>

namespace meshflow {

std::shared_ptr<LocalFabric> LocalFabric::create(int world_size, std::size_t mailbox_capacity) {
    if (world_size < 1 || world_size > kMaxWorldSize) {
        throw std::invalid_argument(fmt::format("world_size {} outside [1, {}]", world_size, kMaxWorldSize));
    }
    return std::shared_ptr<LocalFabric>(new LocalFabric(world_size, mailbox_capacity));
}

LocalFabric::LocalFabric(int world_size, std::size_t capacity) : world_size_(world_size), capacity_(capacity) {}

std::unique_ptr<Transport> LocalFabric::endpoint(int rank) {
    if (rank < 0 || rank >= world_size_) {
        throw std::invalid_argument(fmt::format("rank {} outside world of {}", rank, world_size_));
    }
    return std::make_unique<InProcessTransport>(shared_from_this(), rank);
}

std::shared_ptr<LocalFabric::Mailbox> LocalFabric::mailbox(std::uint32_t tag) {
    std::lock_guard lock(mutex_);
    auto& slot = mailboxes_[tag];
    if (!slot) {
        slot = std::make_shared<Mailbox>(capacity_);
        if (shut_down_) slot->close();
    }
    return slot;
}

void LocalFabric::claim(std::uint32_t tag) {
    std::lock_guard lock(mutex_);
    if (!claimed_.insert(tag).second) {
        throw TransportError(fmt::format("tag {} already has a receiver", decode_tag(tag).to_string()));
    }
}

void LocalFabric::shutdown() {
    std::lock_guard lock(mutex_);
    shut_down_ = true;
    for (auto& [tag, box] : mailboxes_) box->close();
}

bool LocalFabric::is_shut_down() const {
    std::lock_guard lock(mutex_);
    return shut_down_;
}

std::size_t LocalFabric::pending_messages() const {
    std::lock_guard lock(mutex_);
    std::size_t n = 0;
    for (const auto& [tag, box] : mailboxes_) n += box->size();
    return n;
}

InProcessTransport::InProcessTransport(std::shared_ptr<LocalFabric> fabric, int rank)
    : fabric_(std::move(fabric)), rank_(rank) {}

void InProcessTransport::send(int dest, ChannelTag tag, Message msg) {
    check_send(dest, tag);
    msg.tag = tag;
    const std::size_t events = msg.events.size();
    auto box = fabric_->mailbox(encode_tag(tag));
    if (!box->push(std::move(msg))) {
        throw TransportError(fmt::format("transport shut down while sending on {}", tag.to_string()));
    }
    count_send(tag, events);
}

std::optional<Message> InProcessTransport::recv(ChannelTag tag) {
    return fabric_->mailbox(encode_tag(tag))->pop();
}

void InProcessTransport::register_receiver(ChannelTag tag) {
    if (tag.target_rank != rank_) {
        throw TransportError(fmt::format("tag {} does not target rank {}", tag.to_string(), rank_));
    }
    fabric_->claim(encode_tag(tag));
}

void InProcessTransport::shutdown() { fabric_->shutdown(); }

}  // namespace meshflow
