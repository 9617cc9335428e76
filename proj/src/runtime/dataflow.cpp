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

#include "meshflow/runtime/dataflow.hpp"

#include <fmt/format.h>

#include <condition_variable>
#include <system_error>
#include <thread>

#include "meshflow/core/log.hpp"

namespace meshflow {

namespace {
constexpr std::string_view kComponent = "runtime";
}

Vertex::Vertex(const OperatorDescriptor& desc, std::unique_ptr<Operator> op, int rank, int world_size,
               std::size_t queue_capacity)
    : desc_(desc), op_(std::move(op)), rank_(rank), world_size_(world_size),
      tracker_(desc.indegree() * static_cast<std::size_t>(world_size)) {
    for (std::size_t p = 0; p < desc.indegree(); ++p) {
        for (int r = 0; r < world_size; ++r) {
            in_.push_back(std::make_unique<InEndpoint>(ChannelTag::make(r, desc.predecessors[p], rank, desc.op_id),
                                                       static_cast<int>(p), r, queue_capacity));
        }
    }
    for (std::size_t s = 0; s < desc.outdegree(); ++s) {
        for (int r = 0; r < world_size; ++r) {
            out_.push_back(std::make_unique<OutEndpoint>(ChannelTag::make(rank, desc.op_id, r, desc.successors[s]),
                                                         static_cast<int>(s), r, queue_capacity));
        }
    }
}

bool Vertex::push_out(OutEndpoint& out, Message msg) {
    if (out.link != nullptr) return out.link->queue.push(std::move(msg));
    return out.queue.push(std::move(msg));
}

bool Vertex::deliver(OutputSlots& slots) {
    bool ok = true;
    for (std::size_t i = 0; i < out_.size() && i < slots.size(); ++i) {
        auto& events = slots[i];
        if (events.empty()) continue;
        const std::size_t n = events.size();
        ok = push_out(*out_[i], Message::data(out_[i]->tag, std::move(events))) && ok;
        events.clear();
        op_->counters().events_out.fetch_add(n, std::memory_order_relaxed);
    }
    return ok;
}

bool Vertex::broadcast(MessageKind kind, std::uint64_t window_id) {
    bool ok = true;
    for (auto& out : out_) {
        Message msg = kind == MessageKind::kTerminate ? Message::terminate(out->tag) : Message::marker(out->tag, window_id);
        ok = push_out(*out, std::move(msg)) && ok;
    }
    return ok;
}

Vertex::HandleResult Vertex::handle(Message msg, std::size_t endpoint) {
    const InEndpoint& in = *in_.at(endpoint);
    if (msg.kind == MessageKind::kData) {
        op_->counters().events_in.fetch_add(msg.events.size(), std::memory_order_relaxed);
        OutputSlots slots(out_.size());
        try {
            op_->on_data(std::move(msg.events), InputInfo{endpoint, in.predecessor_index, in.source_rank}, slots);
        } catch (const std::exception& e) {
            op_->counters().errors.fetch_add(1, std::memory_order_relaxed);
            log::warn(kComponent, "op {} rank {}: processing error: {}", desc_.op_id, rank_, e.what());
        }
        return deliver(slots) ? HandleResult::kContinue : HandleResult::kBroken;
    }

    std::lock_guard lock(control_mutex_);
    const bool terminate = msg.kind == MessageKind::kTerminate;
    const auto result = terminate ? tracker_.terminate(endpoint) : tracker_.mark(endpoint, msg.window_id);
    if (result == WatermarkTracker::Result::kDuplicate) {
        op_->counters().protocol_errors.fetch_add(1, std::memory_order_relaxed);
        log::warn(kComponent, "op {} rank {}: duplicate {} on {}", desc_.op_id, rank_, to_string(msg.kind),
                  in.tag.to_string());
        return terminate ? HandleResult::kDone : HandleResult::kContinue;
    }

    bool ok = true;
    if (result == WatermarkTracker::Result::kAdvanced) {
        const std::uint64_t through = *tracker_.low();
        OutputSlots slots(out_.size());
        try {
            op_->on_watermark(through, slots);
        } catch (const std::exception& e) {
            op_->counters().errors.fetch_add(1, std::memory_order_relaxed);
            log::warn(kComponent, "op {} rank {}: window release error: {}", desc_.op_id, rank_, e.what());
        }
        ok = deliver(slots);
        if (!tracker_.all_terminated()) ok = broadcast(MessageKind::kWindowMarker, through) && ok;
    }
    if (tracker_.all_terminated()) ok = broadcast(MessageKind::kTerminate, 0) && ok;
    if (!ok) return HandleResult::kBroken;
    return terminate ? HandleResult::kDone : HandleResult::kContinue;
}

void Vertex::close_queues() {
    for (auto& in : in_) in->queue.close();
    for (auto& out : out_) out->queue.close();
}

DataflowInstance::DataflowInstance(const Topology& topology, int world_size, int rank, Transport& transport,
                                   const OperatorFactory& factory, RuntimeOptions options)
    : topology_(topology), world_size_(world_size), rank_(rank), transport_(transport),
      index_of_(kMaxOperators, -1), fallback_clock_(Clock::starting_now()), options_(options) {
    if (world_size < 1 || world_size > kMaxWorldSize) {
        throw std::invalid_argument(fmt::format("world_size {} outside [1, {}]", world_size, kMaxWorldSize));
    }
    if (rank < 0 || rank >= world_size) {
        throw std::invalid_argument(fmt::format("rank {} outside world of {}", rank, world_size));
    }
    if (transport.world_size() != world_size || transport.rank() != rank) {
        throw std::invalid_argument("transport rank/world size do not match the dataflow");
    }
    const Clock* clock = options.clock != nullptr ? options.clock : &fallback_clock_;

    for (const auto& desc : topology_.operators()) {
        OperatorContext ctx;
        ctx.rank = rank;
        ctx.world_size = world_size;
        ctx.indegree = static_cast<int>(desc.indegree());
        ctx.outdegree = static_cast<int>(desc.outdegree());
        ctx.pipelined = desc.pipelined;
        ctx.clock = clock;
        auto op = factory(desc, ctx);
        if (!op) throw std::invalid_argument(fmt::format("factory returned no operator for op {}", desc.op_id));
        if (desc.indegree() == 0 && dynamic_cast<SourceOperator*>(op.get()) == nullptr) {
            throw std::invalid_argument(fmt::format("op {} has no inputs but is not a source operator", desc.op_id));
        }
        index_of_[desc.op_id] = static_cast<int>(vertices_.size());
        vertices_.push_back(std::make_unique<Vertex>(desc, std::move(op), rank, world_size, options.queue_capacity));
    }

    // Pipelining: own-rank outgoing endpoints feed the successor's incoming queue directly.
    for (auto& v : vertices_) {
        if (!v->descriptor().pipelined) continue;
        for (auto& out : v->outputs()) {
            if (out->target_rank != rank) continue;
            Vertex& succ = vertex(out->tag.target_op);
            const int p = succ.descriptor().predecessor_index(v->descriptor().op_id);
            InEndpoint& in = *succ.inputs().at(static_cast<std::size_t>(p * world_size + rank));
            out->link = &in;
            in.linked = true;
        }
    }

    for (auto& v : vertices_) {
        for (auto& in : v->inputs()) {
            if (!in->linked) transport_.register_receiver(in->tag);
        }
    }
}

Vertex& DataflowInstance::vertex(int op_id) {
    if (op_id < 0 || op_id >= kMaxOperators || index_of_[op_id] < 0) {
        throw std::out_of_range(fmt::format("no vertex for op {}", op_id));
    }
    return *vertices_[index_of_[op_id]];
}

std::size_t DataflowInstance::expected_thread_count() const {
    std::size_t n = 0;
    for (const auto& v : vertices_) {
        for (const auto& in : v->inputs()) n += in->linked ? 1 : 2;
        for (const auto& out : v->outputs()) n += out->link != nullptr ? 0 : 1;
        if (v->is_source()) ++n;
    }
    return n;
}

std::size_t DataflowInstance::residual_data_messages() const {
    std::size_t n = 0;
    auto count = [&n](const Message& m) { n += m.is_data() ? 1 : 0; };
    for (const auto& v : vertices_) {
        for (const auto& in : v->inputs()) in->queue.for_each(count);
        for (const auto& out : v->outputs()) out->queue.for_each(count);
    }
    return n;
}

std::vector<VertexMetrics> DataflowInstance::metrics() const {
    std::vector<VertexMetrics> out;
    for (const auto& v : vertices_) {
        const auto& d = v->descriptor();
        out.push_back(VertexMetrics{d.op_id, d.name, d.kind, rank_, v->op().counters().snapshot()});
    }
    return out;
}

std::unique_ptr<DataflowInstance> build_dataflow(const Topology& topology, int world_size, int rank,
                                                 Transport& transport, const OperatorFactory& factory,
                                                 RuntimeOptions options) {
    return std::make_unique<DataflowInstance>(topology, world_size, rank, transport, factory, options);
}

// ---------------------------------------------------------------------------------------------

struct RunHandle::State {
    DataflowInstance* instance = nullptr;
    std::vector<std::thread> threads;
    std::mutex mutex;
    std::condition_variable cv;
    std::size_t exited = 0;
    std::atomic<std::size_t> failures{0};
    bool joined = false;

    void exit_thread(bool failed) {
        if (failed) failures.fetch_add(1);
        {
            std::lock_guard lock(mutex);
            ++exited;
        }
        cv.notify_all();
    }
};

namespace {

class VertexEmitter final : public SourceEmitter {
  public:
    VertexEmitter(Vertex& v, DataflowInstance& inst) : vertex_(v), instance_(inst) {}

    void emit(OutputSlots& slots) override {
        if (!vertex_.deliver(slots)) broken_ = true;
    }
    void emit_watermark(std::uint64_t through) override {
        if (!vertex_.broadcast(MessageKind::kWindowMarker, through)) broken_ = true;
    }
    bool stop_requested() const override { return broken_ || instance_.stop_requested(); }
    bool broken() const noexcept { return broken_; }

  private:
    Vertex& vertex_;
    DataflowInstance& instance_;
    bool broken_ = false;
};

void listening_loop(RunHandle::State& st, Transport& transport, InEndpoint& in) {
    bool failed = false;
    try {
        for (;;) {
            auto msg = transport.recv(in.tag);
            if (!msg) {
                failed = true;
                in.queue.close();
                break;
            }
            const bool terminate = msg->kind == MessageKind::kTerminate;
            if (!in.queue.push(std::move(*msg))) {
                failed = true;
                break;
            }
            if (terminate) break;
        }
    } catch (const std::exception& e) {
        log::error(kComponent, "listener {}: {}", in.tag.to_string(), e.what());
        in.queue.close();
        failed = true;
    }
    st.exit_thread(failed);
}

void processing_loop(RunHandle::State& st, Vertex& vertex, std::size_t endpoint) {
    bool failed = false;
    InEndpoint& in = *vertex.inputs()[endpoint];
    for (;;) {
        auto msg = in.queue.pop();
        if (!msg) {
            failed = true;
            break;
        }
        const auto r = vertex.handle(std::move(*msg), endpoint);
        if (r == Vertex::HandleResult::kDone) break;
        if (r == Vertex::HandleResult::kBroken) {
            log::error(kComponent, "processor {}: downstream queue closed", in.tag.to_string());
            failed = true;
            in.queue.close();
            break;
        }
    }
    st.exit_thread(failed);
}

void sending_loop(RunHandle::State& st, Transport& transport, OutEndpoint& out) {
    bool failed = false;
    for (;;) {
        auto msg = out.queue.pop();
        if (!msg) {
            failed = true;
            break;
        }
        const bool terminate = msg->kind == MessageKind::kTerminate;
        try {
            transport.send(out.target_rank, out.tag, std::move(*msg));
        } catch (const std::exception& e) {
            log::error(kComponent, "sender {}: {}", out.tag.to_string(), e.what());
            out.queue.close();
            failed = true;
            break;
        }
        if (terminate) break;
    }
    st.exit_thread(failed);
}

void ingestion_loop(RunHandle::State& st, Vertex& vertex, DataflowInstance& instance) {
    VertexEmitter emitter(vertex, instance);
    auto& source = static_cast<SourceOperator&>(vertex.op());
    bool failed = false;
    try {
        source.run(emitter);
    } catch (const std::exception& e) {
        source.counters().errors.fetch_add(1);
        log::error(kComponent, "source op {} rank {}: {}", vertex.descriptor().op_id, instance.rank(), e.what());
    }
    if (emitter.broken() || !vertex.broadcast(MessageKind::kTerminate, 0)) failed = true;
    st.exit_thread(failed);
}

void abort_instance(DataflowInstance& instance) {
    instance.request_stop();
    for (auto& v : instance.vertices()) v->close_queues();
    instance.transport().shutdown();
}

}  // namespace

RunHandle stream_process(DataflowInstance& instance) {
    RunHandle handle;
    handle.state_ = std::make_shared<RunHandle::State>();
    auto& st = *handle.state_;
    st.instance = &instance;
    const std::size_t limit = instance.options().max_threads;

    auto spawn = [&](auto&& fn) {
        if (limit != 0 && st.threads.size() >= limit) {
            throw std::system_error(std::make_error_code(std::errc::resource_unavailable_try_again),
                                    "thread limit reached");
        }
        st.threads.emplace_back(std::forward<decltype(fn)>(fn));
    };

    try {
        auto& transport = instance.transport();
        for (auto& vp : instance.vertices()) {
            Vertex& v = *vp;
            for (auto& out : v.outputs()) {
                if (out->link == nullptr) spawn([&st, &transport, o = out.get()] { sending_loop(st, transport, *o); });
            }
            for (std::size_t e = 0; e < v.inputs().size(); ++e) {
                spawn([&st, &v, e] { processing_loop(st, v, e); });
                InEndpoint* in = v.inputs()[e].get();
                if (!in->linked) spawn([&st, &transport, in] { listening_loop(st, transport, *in); });
            }
            if (v.is_source()) spawn([&st, &v, &instance] { ingestion_loop(st, v, instance); });
        }
    } catch (const std::system_error& e) {
        abort_instance(instance);
        for (auto& t : st.threads) t.join();
        st.joined = true;
        throw StartupError(fmt::format("rank {}: could not start thread {} of {}: {}", instance.rank(),
                                       st.threads.size() + 1, instance.expected_thread_count(), e.what()));
    }
    return handle;
}

RunHandle::~RunHandle() {
    if (state_ && !state_->joined) {
        if (!finished()) abort();
        join();
    }
}

void RunHandle::join() {
    if (!state_ || state_->joined) return;
    for (auto& t : state_->threads) t.join();
    state_->joined = true;
}

bool RunHandle::join_for(std::chrono::milliseconds timeout) {
    if (!state_ || state_->joined) return true;
    {
        std::unique_lock lock(state_->mutex);
        if (!state_->cv.wait_for(lock, timeout, [&] { return state_->exited == state_->threads.size(); })) {
            return false;
        }
    }
    join();
    return true;
}

bool RunHandle::finished() const {
    if (!state_ || state_->joined) return true;
    std::lock_guard lock(state_->mutex);
    return state_->exited == state_->threads.size();
}

std::size_t RunHandle::thread_count() const { return state_ ? state_->threads.size() : 0; }

std::size_t RunHandle::failures() const { return state_ ? state_->failures.load() : 0; }

void RunHandle::abort() {
    if (state_ && state_->instance != nullptr) abort_instance(*state_->instance);
}

}  // namespace meshflow
