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

#include "meshflow/core/wire.hpp"

#include <fmt/format.h>

namespace meshflow {

namespace {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

class Reader {
  public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    template <typename T>
    T get(const char* field) {
        require(sizeof(T), field);
        T v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            v |= static_cast<T>(static_cast<T>(bytes_[pos_ + i]) << (8 * i));
        }
        pos_ += sizeof(T);
        return v;
    }

    std::vector<std::uint8_t> take(std::size_t n, const char* field) {
        require(n, field);
        std::vector<std::uint8_t> out(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                      bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
        pos_ += n;
        return out;
    }

    void require(std::size_t n, const char* field) const {
        if (remaining() < n) {
            throw WireError(fmt::format("truncated frame reading {} ({} of {} bytes available)", field,
                                        remaining(), n),
                            pos_);
        }
    }

    std::size_t pos() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

  private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

WireError::WireError(const std::string& what, std::size_t offset)
    : std::runtime_error(fmt::format("{} at byte {}", what, offset)), offset_(offset) {}

std::size_t serialized_size(const Message& m) noexcept {
    std::size_t n = kFrameHeaderBytes;
    for (const auto& e : m.events) {
        n += e.wire_size();
    }
    return n;
}

void serialize_message_into(const Message& m, std::vector<std::uint8_t>& out) {
    out.reserve(out.size() + serialized_size(m));
    put_le<std::uint32_t>(out, encode_tag(m.tag));
    out.push_back(static_cast<std::uint8_t>(m.kind));
    put_le<std::uint64_t>(out, m.kind == MessageKind::kWindowMarker ? m.window_id : 0);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.events.size()));
    for (const auto& e : m.events) {
        put_le<std::uint64_t>(out, e.key);
        put_le<std::uint64_t>(out, e.value);
        put_le<std::uint64_t>(out, e.event_time);
        put_le<std::uint32_t>(out, static_cast<std::uint32_t>(e.payload.size()));
        out.insert(out.end(), e.payload.begin(), e.payload.end());
    }
}

std::vector<std::uint8_t> serialize_message(const Message& m) {
    std::vector<std::uint8_t> out;
    serialize_message_into(m, out);
    return out;
}

Message deserialize_message(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    Message m;
    m.tag = decode_tag(r.get<std::uint32_t>("tag"));

    const std::size_t kind_at = r.pos();
    const auto kind = r.get<std::uint8_t>("kind");
    if (kind > static_cast<std::uint8_t>(MessageKind::kTerminate)) {
        throw WireError(fmt::format("unknown message kind {}", kind), kind_at);
    }
    m.kind = static_cast<MessageKind>(kind);

    const std::size_t window_at = r.pos();
    m.window_id = r.get<std::uint64_t>("window_id");
    if (m.kind != MessageKind::kWindowMarker && m.window_id != 0) {
        throw WireError("non-marker frame carries a window id", window_at);
    }

    const std::size_t count_at = r.pos();
    const auto count = r.get<std::uint32_t>("event_count");
    if (m.kind != MessageKind::kData && count != 0) {
        throw WireError("control frame carries events", count_at);
    }
    if (static_cast<std::uint64_t>(count) * kEventHeaderBytes > r.remaining()) {
        throw WireError(fmt::format("event_count {} exceeds frame size", count), count_at);
    }

    m.events.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        Event e;
        e.key = r.get<std::uint64_t>("event.key");
        e.value = r.get<std::uint64_t>("event.value");
        e.event_time = r.get<std::uint64_t>("event.event_time");
        const auto len = r.get<std::uint32_t>("event.payload_len");
        e.payload = r.take(len, "event.payload");
        m.events.push_back(std::move(e));
    }
    if (r.remaining() != 0) {
        throw WireError(fmt::format("{} trailing bytes after frame", r.remaining()), r.pos());
    }
    return m;
}

}  // namespace meshflow
