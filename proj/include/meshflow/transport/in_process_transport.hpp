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
#include <memory>
#include <mutex>
#include <unordered_map>
#include <unordered_set>

#include "meshflow/transport/bounded_queue.hpp"
#include "meshflow/transport/transport.hpp"

namespace meshflow {

/// Shared per-tag mailboxes for ranks that live as threads of one process. Each rank talks to the
/// fabric through its own InProcessTransport obtained from endpoint().
class LocalFabric : public std::enable_shared_from_this<LocalFabric> {
  public:
    static std::shared_ptr<LocalFabric> create(int world_size,
                                               std::size_t mailbox_capacity = kDefaultSendQueueCapacity);

    std::unique_ptr<Transport> endpoint(int rank);

    int world_size() const noexcept { return world_size_; }
    void shutdown();
    bool is_shut_down() const;

    /// Messages currently parked in mailboxes (not yet received).
    std::size_t pending_messages() const;

  private:
    friend class InProcessTransport;
    using Mailbox = BoundedQueue<Message>;

    LocalFabric(int world_size, std::size_t capacity);

    std::shared_ptr<Mailbox> mailbox(std::uint32_t tag);
    void claim(std::uint32_t tag);

    const int world_size_;
    const std::size_t capacity_;
    mutable std::mutex mutex_;
    std::unordered_map<std::uint32_t, std::shared_ptr<Mailbox>> mailboxes_;
    std::unordered_set<std::uint32_t> claimed_;
    bool shut_down_ = false;
};

class InProcessTransport final : public Transport {
  public:
    InProcessTransport(std::shared_ptr<LocalFabric> fabric, int rank);

    int rank() const override { return rank_; }
    int world_size() const override { return fabric_->world_size(); }
    void send(int dest, ChannelTag tag, Message msg) override;
    std::optional<Message> recv(ChannelTag tag) override;
    void register_receiver(ChannelTag tag) override;
    void shutdown() override;

  private:
    std::shared_ptr<LocalFabric> fabric_;
    int rank_;
};

}  // namespace meshflow
