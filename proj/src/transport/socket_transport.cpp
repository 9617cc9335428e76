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

#include "meshflow/transport/socket_transport.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <fmt/format.h>

#include <algorithm>
#include <cerrno>
#include <cstring>

#include "meshflow/core/log.hpp"
#include "meshflow/core/wire.hpp"

namespace meshflow {

namespace {

constexpr std::chrono::milliseconds kShutdownGrace{2000};

std::string errno_text() { return std::strerror(errno); }

bool write_all(int fd, const std::uint8_t* data, std::size_t n) {
    while (n > 0) {
        const ssize_t w = ::send(fd, data, n, MSG_NOSIGNAL);
        if (w < 0) {
            if (errno == EINTR) continue;
            return false;
        }
        data += w;
        n -= static_cast<std::size_t>(w);
    }
    return true;
}

enum class ReadStatus { kOk, kEof, kError };

ReadStatus read_exact(int fd, std::uint8_t* data, std::size_t n) {
    std::size_t got = 0;
    while (got < n) {
        const ssize_t r = ::recv(fd, data + got, n - got, 0);
        if (r == 0) return got == 0 ? ReadStatus::kEof : ReadStatus::kError;
        if (r < 0) {
            if (errno == EINTR) continue;
            return ReadStatus::kError;
        }
        got += static_cast<std::size_t>(r);
    }
    return ReadStatus::kOk;
}

bool wait_readable(int fd, std::chrono::steady_clock::time_point deadline) {
    for (;;) {
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
            deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) return false;
        pollfd p{fd, POLLIN, 0};
        const int rc = ::poll(&p, 1, static_cast<int>(left.count()));
        if (rc > 0) return true;
        if (rc < 0 && errno != EINTR) return false;
    }
}

addrinfo* resolve(const std::string& host, std::uint16_t port, bool passive) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    if (passive) hints.ai_flags = AI_PASSIVE;
    addrinfo* res = nullptr;
    const std::string service = std::to_string(port);
    const char* node = (passive && (host.empty() || host == "*" || host == "0.0.0.0")) ? nullptr : host.c_str();
    const int rc = ::getaddrinfo(node, service.c_str(), &hints, &res);
    if (rc != 0) {
        throw TransportError(fmt::format("cannot resolve {}:{}: {}", host, port, ::gai_strerror(rc)));
    }
    return res;
}

void set_nodelay(int fd) {
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

}  // namespace

std::pair<std::string, std::uint16_t> split_endpoint(const std::string& endpoint) {
    const auto colon = endpoint.rfind(':');
    if (colon == std::string::npos || colon + 1 == endpoint.size()) {
        throw std::invalid_argument(fmt::format("endpoint '{}' is not host:port", endpoint));
    }
    const std::string port_text = endpoint.substr(colon + 1);
    unsigned long port = 0;
    try {
        std::size_t used = 0;
        port = std::stoul(port_text, &used);
        if (used != port_text.size()) throw std::invalid_argument("junk");
    } catch (const std::exception&) {
        throw std::invalid_argument(fmt::format("endpoint '{}' has a bad port", endpoint));
    }
    if (port > 65535) throw std::invalid_argument(fmt::format("endpoint '{}' has a bad port", endpoint));
    return {endpoint.substr(0, colon), static_cast<std::uint16_t>(port)};
}

SocketTransport::SocketTransport(int rank, int world_size, const std::string& bind_endpoint)
    : rank_(rank), world_size_(world_size) {
    if (world_size < 1 || world_size > kMaxWorldSize || rank < 0 || rank >= world_size) {
        throw std::invalid_argument(fmt::format("rank {} / world_size {} invalid", rank, world_size));
    }
    const auto [host, port] = split_endpoint(bind_endpoint);
    addrinfo* res = resolve(host, port, true);
    listen_fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (listen_fd_ < 0) {
        ::freeaddrinfo(res);
        throw TransportError("socket(): " + errno_text());
    }
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(listen_fd_, res->ai_addr, res->ai_addrlen) != 0 || ::listen(listen_fd_, 256) != 0) {
        const std::string why = errno_text();
        ::freeaddrinfo(res);
        ::close(listen_fd_);
        throw TransportError(fmt::format("cannot listen on {}: {}", bind_endpoint, why));
    }
    ::freeaddrinfo(res);

    sockaddr_in bound{};
    socklen_t len = sizeof(bound);
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = ntohs(bound.sin_port);

    outgoing_.reserve(static_cast<std::size_t>(world_size));
    for (int i = 0; i < world_size; ++i) outgoing_.push_back(std::make_unique<Outgoing>());
}

SocketTransport::~SocketTransport() {
    shutdown();
}

void SocketTransport::connect(const std::vector<RankAddress>& peers, std::chrono::milliseconds timeout) {
    if (peers.size() != static_cast<std::size_t>(world_size_)) {
        throw TransportError(fmt::format("expected {} peers, got {}", world_size_, peers.size()));
    }
    const auto deadline = std::chrono::steady_clock::now() + timeout;

    std::exception_ptr accept_error;
    std::thread acceptor([&] {
        try {
            accept_loop(deadline);
        } catch (...) {
            accept_error = std::current_exception();
        }
    });

    std::exception_ptr connect_error;
    try {
        for (const auto& peer : peers) {
            const auto [host, port] = split_endpoint(peer.endpoint);
            int fd = -1;
            for (;;) {
                addrinfo* res = resolve(host, port, false);
                fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
                const int rc = fd < 0 ? -1 : ::connect(fd, res->ai_addr, res->ai_addrlen);
                ::freeaddrinfo(res);
                if (rc == 0) break;
                if (fd >= 0) ::close(fd);
                fd = -1;
                if (std::chrono::steady_clock::now() >= deadline) {
                    throw TransportError(
                        fmt::format("rank {}: cannot connect to rank {} at {}", rank_, peer.rank, peer.endpoint));
                }
                std::this_thread::sleep_for(std::chrono::milliseconds(20));
            }
            set_nodelay(fd);
            const std::uint8_t hello[2] = {kSocketProtocolVersion, static_cast<std::uint8_t>(rank_)};
            if (!write_all(fd, hello, sizeof(hello))) {
                ::close(fd);
                throw TransportError(fmt::format("handshake to rank {} failed: {}", peer.rank, errno_text()));
            }
            outgoing_[static_cast<std::size_t>(peer.rank)]->fd = fd;
        }
    } catch (...) {
        connect_error = std::current_exception();
    }
    acceptor.join();
    if (connect_error) std::rethrow_exception(connect_error);
    if (accept_error) std::rethrow_exception(accept_error);
}

void SocketTransport::accept_loop(std::chrono::steady_clock::time_point deadline) {
    std::vector<bool> seen(static_cast<std::size_t>(world_size_), false);
    int accepted = 0;
    while (accepted < world_size_) {
        if (!wait_readable(listen_fd_, deadline)) {
            throw TransportError(fmt::format("rank {}: only {} of {} peers connected before timeout", rank_,
                                             accepted, world_size_));
        }
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            if (errno == EINTR) continue;
            throw TransportError("accept(): " + errno_text());
        }
        set_nodelay(fd);
        std::uint8_t hello[2];
        if (!wait_readable(fd, deadline) || read_exact(fd, hello, 2) != ReadStatus::kOk) {
            ::close(fd);
            throw TransportError(fmt::format("rank {}: handshake read failed", rank_));
        }
        if (hello[0] != kSocketProtocolVersion) {
            ::close(fd);
            throw TransportError(fmt::format("rank {}: peer speaks protocol version {}", rank_, hello[0]));
        }
        const int peer = hello[1];
        if (peer >= world_size_ || seen[static_cast<std::size_t>(peer)]) {
            ::close(fd);
            throw TransportError(fmt::format("rank {}: unexpected or duplicate peer rank {}", rank_, peer));
        }
        seen[static_cast<std::size_t>(peer)] = true;
        ++accepted;
        std::lock_guard lock(mutex_);
        incoming_fds_.push_back(fd);
        ++live_demux_;
        demux_threads_.emplace_back([this, fd, peer] { demux_loop(fd, peer); });
    }
}

void SocketTransport::demux_loop(int fd, int peer) {
    std::vector<std::uint8_t> frame;
    for (;;) {
        std::uint8_t len_bytes[4];
        const auto st = read_exact(fd, len_bytes, 4);
        if (st == ReadStatus::kEof) break;
        if (st == ReadStatus::kError) {
            bool quiet;
            {
                std::lock_guard lock(mutex_);
                quiet = shut_down_;
            }
            if (!quiet) log::warn("transport", "rank {}: read from rank {} failed: {}", rank_, peer, errno_text());
            break;
        }
        const std::uint32_t len = std::uint32_t{len_bytes[0]} | (std::uint32_t{len_bytes[1]} << 8) |
                                  (std::uint32_t{len_bytes[2]} << 16) | (std::uint32_t{len_bytes[3]} << 24);
        if (len > kMaxFrameBytes) {
            log::error("transport", "rank {}: frame of {} bytes from rank {} exceeds limit", rank_, len, peer);
            break;
        }
        frame.resize(len);
        if (read_exact(fd, frame.data(), len) != ReadStatus::kOk) {
            log::error("transport", "rank {}: truncated frame from rank {}", rank_, peer);
            break;
        }
        Message msg;
        try {
            msg = deserialize_message(frame);
        } catch (const WireError& e) {
            log::error("transport", "rank {}: bad frame from rank {}: {}", rank_, peer, e.what());
            break;
        }
        if (msg.tag.target_rank != rank_ || msg.tag.source_rank != peer) {
            log::error("transport", "rank {}: frame tag {} does not match connection from rank {}", rank_,
                       msg.tag.to_string(), peer);
            continue;
        }
        mailbox(encode_tag(msg.tag))->push(std::move(msg));
    }
    std::lock_guard lock(mutex_);
    --live_demux_;
    demux_cv_.notify_all();
}

std::shared_ptr<SocketTransport::Mailbox> SocketTransport::mailbox(std::uint32_t tag) {
    std::lock_guard lock(mutex_);
    auto& slot = mailboxes_[tag];
    if (!slot) {
        // Unbounded: a full per-tag queue must never stall the shared connection.
        slot = std::make_shared<Mailbox>(0);
        if (shut_down_) slot->close();
    }
    return slot;
}

void SocketTransport::send(int dest, ChannelTag tag, Message msg) {
    check_send(dest, tag);
    msg.tag = tag;
    auto& out = *outgoing_[static_cast<std::size_t>(dest)];
    std::lock_guard lock(out.mutex);
    if (out.fd < 0) {
        throw TransportError(fmt::format("rank {}: no connection to rank {}", rank_, dest));
    }
    out.buffer.assign(4, 0);
    serialize_message_into(msg, out.buffer);
    const std::size_t len = out.buffer.size() - 4;
    if (len > kMaxFrameBytes) {
        throw TransportError(fmt::format("frame of {} bytes exceeds the {} byte limit", len, kMaxFrameBytes));
    }
    for (int i = 0; i < 4; ++i) out.buffer[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(len >> (8 * i));
    if (!write_all(out.fd, out.buffer.data(), out.buffer.size())) {
        throw TransportError(fmt::format("rank {}: send to rank {} failed: {}", rank_, dest, errno_text()));
    }
    count_send(tag, msg.events.size());
}

std::optional<Message> SocketTransport::recv(ChannelTag tag) { return mailbox(encode_tag(tag))->pop(); }

void SocketTransport::register_receiver(ChannelTag tag) {
    if (tag.target_rank != rank_) {
        throw TransportError(fmt::format("tag {} does not target rank {}", tag.to_string(), rank_));
    }
    std::lock_guard lock(mutex_);
    if (!claimed_.insert(encode_tag(tag)).second) {
        throw TransportError(fmt::format("tag {} already has a receiver", tag.to_string()));
    }
}

void SocketTransport::close_mailboxes() {
    std::lock_guard lock(mutex_);
    for (auto& [tag, box] : mailboxes_) box->close();
}

void SocketTransport::shutdown() {
    {
        std::lock_guard lock(mutex_);
        if (shut_down_) return;
        shut_down_ = true;
    }
    // Half-close our side so peers drain everything we wrote, then wait for them to do the same.
    for (auto& out : outgoing_) {
        std::lock_guard lock(out->mutex);
        if (out->fd >= 0) ::shutdown(out->fd, SHUT_WR);
    }
    {
        std::unique_lock lock(mutex_);
        if (!demux_cv_.wait_for(lock, kShutdownGrace, [&] { return live_demux_ == 0; })) {
            for (int fd : incoming_fds_) ::shutdown(fd, SHUT_RDWR);
        }
    }
    std::vector<std::thread> threads;
    {
        std::lock_guard lock(mutex_);
        threads.swap(demux_threads_);
    }
    for (auto& t : threads) t.join();
    for (int fd : incoming_fds_) ::close(fd);
    incoming_fds_.clear();
    for (auto& out : outgoing_) {
        std::lock_guard lock(out->mutex);
        if (out->fd >= 0) ::close(out->fd);
        out->fd = -1;
    }
    if (listen_fd_ >= 0) ::close(listen_fd_);
    listen_fd_ = -1;
    close_mailboxes();
}

std::unique_ptr<Transport> make_socket_transport(const TransportConfig& config, int rank) {
    config.validate();
    if (config.backend != Backend::kSocket) {
        throw std::invalid_argument("make_socket_transport requires the socket backend");
    }
    auto self = std::find_if(config.addresses.begin(), config.addresses.end(),
                             [&](const RankAddress& a) { return a.rank == rank; });
    if (self == config.addresses.end()) {
        throw std::invalid_argument(fmt::format("no address for rank {}", rank));
    }
    auto t = std::make_unique<SocketTransport>(rank, config.world_size, self->endpoint);
    t->connect(config.addresses, std::chrono::milliseconds(config.connect_timeout_ms));
    return t;
}

}  // namespace meshflow
