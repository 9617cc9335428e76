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

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "meshflow/core/channel_tag.hpp"
#include "meshflow/core/message.hpp"

namespace meshflow {

inline constexpr int kMaxWorldSize = 256;
inline constexpr std::size_t kMaxFrameBytes = 64u << 20;
inline constexpr std::size_t kDefaultSendQueueCapacity = 1024;

enum class Backend { kInProcess, kSocket };

std::string_view to_string(Backend b) noexcept;
/// Accepts "in-process" / "socket". Throws std::invalid_argument otherwise.
Backend parse_backend(std::string_view s);

struct RankAddress {
    int rank = 0;
    /// host:port for SOCKET, informational for IN_PROCESS.
    std::string endpoint;

    friend bool operator==(const RankAddress&, const RankAddress&) = default;
};

struct TransportConfig {
    int world_size = 1;
    Backend backend = Backend::kInProcess;
    std::vector<RankAddress> addresses;
    int connect_timeout_ms = 10000;
    std::size_t send_queue_capacity = kDefaultSendQueueCapacity;

    /// Throws std::invalid_argument when inconsistent.
    void validate() const;
};

class TransportError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct TransportStats {
    std::uint64_t messages_sent = 0;
    std::uint64_t events_sent = 0;
    std::array<std::uint64_t, 256> messages_by_source_op{};
};

/// Blocking, tag-matched point-to-point delivery between ranks.
///
/// send() may be called from any number of threads. Each tag has exactly one receiving thread,
/// which must call register_receiver() before its first recv(). Messages on one tag arrive in
/// send order and never on another tag.
class Transport {
  public:
    virtual ~Transport() = default;

    virtual int rank() const = 0;
    virtual int world_size() const = 0;

    /// Blocks until `msg` is accepted for delivery. `tag.target_rank` must equal `dest`; the
    /// message is re-stamped with `tag`. Throws TransportError when the peer is unreachable or
    /// the transport is shut down.
    virtual void send(int dest, ChannelTag tag, Message msg) = 0;

    /// Blocks until a message with exactly `tag` arrives. Returns nullopt once the transport is
    /// shut down.
    virtual std::optional<Message> recv(ChannelTag tag) = 0;

    /// Claims `tag` for the calling receiver. Throws TransportError when already claimed or when
    /// the tag does not target this rank.
    virtual void register_receiver(ChannelTag tag) = 0;

    /// Idempotent. Unblocks every pending recv().
    virtual void shutdown() = 0;

    TransportStats stats() const;

  protected:
    void check_send(int dest, ChannelTag tag) const;
    void count_send(ChannelTag tag, std::size_t events) noexcept;

  private:
    std::atomic<std::uint64_t> messages_sent_{0};
    std::atomic<std::uint64_t> events_sent_{0};
    std::array<std::atomic<std::uint64_t>, 256> by_source_op_{};
};

}  // namespace meshflow
