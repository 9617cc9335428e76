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
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "meshflow/transport/bounded_queue.hpp"
#include "meshflow/transport/transport.hpp"

namespace meshflow {

inline constexpr std::uint8_t kSocketProtocolVersion = 0x01;

/// "host:port" -> (host, port). Throws std::invalid_argument.
std::pair<std::string, std::uint16_t> split_endpoint(const std::string& endpoint);

/// TCP transport: one stream connection per ordered rank pair (including a rank to itself).
/// Each connection opens with a 2-byte handshake [version, sender rank]; every frame after that is
/// a 4-byte little-endian length followed by one wire frame. One demultiplexer thread per incoming
/// connection routes frames into per-tag mailboxes.
class SocketTransport final : public Transport {
  public:
    /// Binds and listens on `bind_endpoint` (port 0 picks an ephemeral port).
    SocketTransport(int rank, int world_size, const std::string& bind_endpoint);
    ~SocketTransport() override;

    std::uint16_t port() const noexcept { return port_; }

    /// Opens outgoing connections to every peer (retrying until `timeout`) and waits until every
    /// peer has connected back. Throws TransportError on timeout or handshake failure.
    void connect(const std::vector<RankAddress>& peers, std::chrono::milliseconds timeout);

    int rank() const override { return rank_; }
    int world_size() const override { return world_size_; }
    void send(int dest, ChannelTag tag, Message msg) override;
    std::optional<Message> recv(ChannelTag tag) override;
    void register_receiver(ChannelTag tag) override;
    void shutdown() override;

  private:
    using Mailbox = BoundedQueue<Message>;

    struct Outgoing {
        int fd = -1;
        std::mutex mutex;
        std::vector<std::uint8_t> buffer;
    };

    std::shared_ptr<Mailbox> mailbox(std::uint32_t tag);
    void accept_loop(std::chrono::steady_clock::time_point deadline);
    void demux_loop(int fd, int peer);
    void close_mailboxes();

    const int rank_;
    const int world_size_;
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;

    std::vector<std::unique_ptr<Outgoing>> outgoing_;

    std::mutex mutex_;
    std::condition_variable demux_cv_;
    std::unordered_map<std::uint32_t, std::shared_ptr<Mailbox>> mailboxes_;
    std::unordered_set<std::uint32_t> claimed_;
    std::vector<int> incoming_fds_;
    std::vector<std::thread> demux_threads_;
    int live_demux_ = 0;
    bool shut_down_ = false;
};

/// Creates the transport for `rank` as described by `config` (for SOCKET this binds and connects).
/// IN_PROCESS requires a fabric; use LocalFabric::endpoint directly instead.
std::unique_ptr<Transport> make_socket_transport(const TransportConfig& config, int rank);

}  // namespace meshflow
