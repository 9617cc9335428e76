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

#include <atomic>
#include <chrono>
#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "meshflow/core/channel_tag.hpp"
#include "meshflow/core/clock.hpp"
#include "meshflow/core/message.hpp"
#include "meshflow/runtime/operator.hpp"
#include "meshflow/runtime/topology.hpp"
#include "meshflow/runtime/watermark.hpp"
#include "meshflow/transport/bounded_queue.hpp"
#include "meshflow/transport/transport.hpp"

namespace meshflow {

using OperatorFactory =
    std::function<std::unique_ptr<Operator>(const OperatorDescriptor&, const OperatorContext&)>;

struct RuntimeOptions {
    std::size_t queue_capacity = kDefaultSendQueueCapacity;
    const Clock* clock = nullptr;
    /// Upper bound on threads stream_process may start (0 = no bound). Exceeding it is reported
    /// exactly like an operating-system spawn failure.
    std::size_t max_threads = 0;
};

struct InEndpoint {
    InEndpoint(ChannelTag t, int pred_index, int src_rank, std::size_t capacity)
        : tag(t), predecessor_index(pred_index), source_rank(src_rank), queue(capacity) {}

    ChannelTag tag;
    int predecessor_index;
    int source_rank;
    /// Fed directly by a pipelined predecessor on this rank; has no listening thread.
    bool linked = false;
    BoundedQueue<Message> queue;
};

struct OutEndpoint {
    OutEndpoint(ChannelTag t, int succ_index, int dst_rank, std::size_t capacity)
        : tag(t), successor_index(succ_index), target_rank(dst_rank), queue(capacity) {}

    ChannelTag tag;
    int successor_index;
    int target_rank;
    /// Set when pipelined: pushes land in the successor's incoming queue and no sending thread runs.
    InEndpoint* link = nullptr;
    BoundedQueue<Message> queue;
};

struct VertexMetrics {
    int op_id = 0;
    std::string name;
    OperatorKind kind = OperatorKind::kMap;
    int rank = 0;
    CounterSnapshot counters;
};

/// One operator instance at one rank, with indegree*world_size incoming and
/// outdegree*world_size outgoing endpoints.
class Vertex {
  public:
    Vertex(const OperatorDescriptor& desc, std::unique_ptr<Operator> op, int rank, int world_size,
           std::size_t queue_capacity);

    const OperatorDescriptor& descriptor() const noexcept { return desc_; }
    Operator& op() noexcept { return *op_; }
    const Operator& op() const noexcept { return *op_; }
    bool is_source() const noexcept { return desc_.indegree() == 0; }

    std::vector<std::unique_ptr<InEndpoint>>& inputs() noexcept { return in_; }
    std::vector<std::unique_ptr<OutEndpoint>>& outputs() noexcept { return out_; }
    const std::vector<std::unique_ptr<InEndpoint>>& inputs() const noexcept { return in_; }
    const std::vector<std::unique_ptr<OutEndpoint>>& outputs() const noexcept { return out_; }

    /// Pushes each non-empty slot to its endpoint as a DATA message (or straight into the linked
    /// successor queue). Returns false if a queue was closed.
    bool deliver(OutputSlots& slots);
    /// Sends a control message on every outgoing endpoint.
    bool broadcast(MessageKind kind, std::uint64_t window_id);

    enum class HandleResult { kContinue, kDone, kBroken };

    /// Runs one incoming message through the operator. kDone once this endpoint has delivered its
    /// TERMINATE; kBroken if a downstream queue was closed.
    HandleResult handle(Message msg, std::size_t endpoint);

    void close_queues();

  private:
    bool push_out(OutEndpoint& out, Message msg);

    const OperatorDescriptor& desc_;
    std::unique_ptr<Operator> op_;
    int rank_;
    int world_size_;
    std::vector<std::unique_ptr<InEndpoint>> in_;
    std::vector<std::unique_ptr<OutEndpoint>> out_;

    std::mutex control_mutex_;
    WatermarkTracker tracker_;
};

/// All operators of a topology instantiated at one rank.
class DataflowInstance {
  public:
    DataflowInstance(const Topology& topology, int world_size, int rank, Transport& transport,
                     const OperatorFactory& factory, RuntimeOptions options);

    DataflowInstance(const DataflowInstance&) = delete;
    DataflowInstance& operator=(const DataflowInstance&) = delete;

    int rank() const noexcept { return rank_; }
    int world_size() const noexcept { return world_size_; }
    const Topology& topology() const noexcept { return topology_; }
    Transport& transport() noexcept { return transport_; }
    const RuntimeOptions& options() const noexcept { return options_; }

    std::vector<std::unique_ptr<Vertex>>& vertices() noexcept { return vertices_; }
    const std::vector<std::unique_ptr<Vertex>>& vertices() const noexcept { return vertices_; }
    Vertex& vertex(int op_id);

    /// listeners + processors + senders + ingestion threads this instance will spawn.
    std::size_t expected_thread_count() const;
    /// DATA messages still sitting in any endpoint queue.
    std::size_t residual_data_messages() const;
    std::vector<VertexMetrics> metrics() const;

    void request_stop() noexcept { stop_requested_.store(true); }
    bool stop_requested() const noexcept { return stop_requested_.load(); }

  private:
    Topology topology_;
    int world_size_;
    int rank_;
    Transport& transport_;
    std::vector<std::unique_ptr<Vertex>> vertices_;
    std::vector<int> index_of_;
    Clock fallback_clock_;
    RuntimeOptions options_;
    std::atomic<bool> stop_requested_{false};
};

/// Instantiates `topology` at `rank`: every operator, all channel endpoints and their tags, and the
/// pipelining links. Throws TopologyError / std::invalid_argument on invalid input.
std::unique_ptr<DataflowInstance> build_dataflow(const Topology& topology, int world_size, int rank,
                                                 Transport& transport, const OperatorFactory& factory,
                                                 RuntimeOptions options = {});

class StartupError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Threads spawned by stream_process. Joining is idempotent.
class RunHandle {
  public:
    RunHandle() = default;
    RunHandle(RunHandle&&) noexcept = default;
    RunHandle& operator=(RunHandle&&) noexcept = default;
    ~RunHandle();

    /// Blocks until every thread has exited.
    void join();
    /// Waits up to `timeout`; returns true (and joins) if every thread exited.
    bool join_for(std::chrono::milliseconds timeout);
    bool finished() const;
    std::size_t thread_count() const;
    /// Threads that ended because of a transport or queue failure.
    std::size_t failures() const;
    /// Closes every queue of the instance, unblocking all threads. Used on fatal errors.
    void abort();

    struct State;

  private:
    friend RunHandle stream_process(DataflowInstance& instance);
    std::shared_ptr<State> state_;
};

/// Starts, per vertex: one listening and one processing thread per incoming endpoint (no listener
/// for pipelined endpoints), one sending thread per outgoing endpoint (none for pipelined ones),
/// and one ingestion thread for each source. Throws StartupError if a thread cannot be spawned,
/// after joining the ones already running.
RunHandle stream_process(DataflowInstance& instance);

}  // namespace meshflow
