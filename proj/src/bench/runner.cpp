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

#include "meshflow/bench/runner.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <stdexcept>

#include "meshflow/core/log.hpp"
#include "meshflow/transport/in_process_transport.hpp"
#include "meshflow/transport/socket_transport.hpp"

namespace meshflow::bench {

namespace {

constexpr std::string_view kComponent = "runner";

RankReport report_for(DataflowInstance& inst, const RunHandle& handle, std::size_t extra_residual) {
    RankReport r;
    r.rank = inst.rank();
    r.expected_threads = inst.expected_thread_count();
    r.started_threads = handle.thread_count();
    r.failed_threads = handle.failures();
    r.residual_data = inst.residual_data_messages() + extra_residual;
    r.transport = inst.transport().stats();
    r.vertices = inst.metrics();
    return r;
}

std::uint64_t starved_events(DataflowInstance& inst) {
    std::uint64_t n = 0;
    for (auto& v : inst.vertices()) {
        if (auto* g = dynamic_cast<GeneratorOperator*>(&v->op())) n += g->starved();
    }
    return n;
}

void fill_totals(RunResult& result) {
    for (const auto& r : result.ranks) {
        for (const auto& v : r.vertices) {
            result.protocol_errors += v.counters.protocol_errors;
            result.operator_errors += v.counters.errors;
        }
    }
}

/// Waits for every handle until `deadline`; aborts and joins all of them if any is late.
bool await_all(std::vector<RunHandle>& handles, std::chrono::steady_clock::time_point deadline) {
    bool ok = true;
    for (auto& h : handles) {
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (!h.join_for(std::max(left, std::chrono::milliseconds(0)))) {
            ok = false;
            break;
        }
    }
    if (!ok) {
        log::error(kComponent, "run did not finish before its deadline; aborting");
        for (auto& h : handles) h.abort();
        for (auto& h : handles) h.join();
    }
    return ok;
}

std::chrono::steady_clock::time_point deadline_for(const RunOptions& o) {
    return std::chrono::steady_clock::now() +
           std::chrono::milliseconds(static_cast<std::int64_t>(o.generator.duration_s * 1000)) + o.drain_timeout;
}

}  // namespace

bool RunResult::clean() const {
    if (!joined) return false;
    return std::all_of(ranks.begin(), ranks.end(), [](const RankReport& r) {
        return r.failed_threads == 0 && r.residual_data == 0 && r.started_threads == r.expected_threads;
    });
}

std::uint64_t RunResult::sends_from(int op_id) const {
    std::uint64_t n = 0;
    for (const auto& r : ranks) n += r.transport.messages_by_source_op.at(static_cast<std::size_t>(op_id));
    return n;
}

RunSummary summarize(double rate, const std::vector<WindowResultRecord>& records, const std::vector<RankReport>& ranks) {
    RunSummary s;
    s.rate = rate;
    s.windows_processed = records.size();
    if (!records.empty()) {
        std::vector<std::int64_t> lat;
        lat.reserve(records.size());
        double sum = 0;
        for (const auto& r : records) {
            lat.push_back(r.latency_ms);
            sum += static_cast<double>(r.latency_ms);
        }
        s.mean_latency_ms = sum / static_cast<double>(records.size());
        std::sort(lat.begin(), lat.end());
        const auto idx = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(lat.size()))) - 1;
        s.p99_latency_ms = static_cast<double>(lat[std::min(idx, lat.size() - 1)]);
    }
    for (const auto& r : ranks) {
        for (const auto& v : r.vertices) {
            if (v.kind == OperatorKind::kGenerator) s.events_processed += v.counters.events_out;
            s.events_dropped += v.counters.dropped;
            s.events_late += v.counters.late;
        }
    }
    return s;
}

RunResult run_local(const RunOptions& options) {
    options.generator.validate();
    const int W = options.world_size;
    if (W < 1 || W > kMaxWorldSize) throw std::invalid_argument(fmt::format("world size {} out of range", W));

    const Topology topology = build_workload_topology(options.workload, options.generator, options.pipelining);
    RunResult result;
    if (options.keep_event_log) result.event_log = std::make_unique<EventLog>(W);
    SinkCollector collector;
    const auto factory = make_workload_factory(options.generator, result.event_log.get(), collector);

    std::shared_ptr<LocalFabric> fabric;
    std::vector<std::unique_ptr<Transport>> transports;
    if (options.backend == Backend::kInProcess) {
        fabric = LocalFabric::create(W);
        for (int r = 0; r < W; ++r) transports.push_back(fabric->endpoint(r));
    } else {
        std::vector<SocketTransport*> sockets;
        std::vector<RankAddress> peers;
        for (int r = 0; r < W; ++r) {
            auto t = std::make_unique<SocketTransport>(r, W, "127.0.0.1:0");
            peers.push_back(RankAddress{r, fmt::format("127.0.0.1:{}", t->port())});
            sockets.push_back(t.get());
            transports.push_back(std::move(t));
        }
        std::vector<std::future<void>> connects;
        for (auto* s : sockets) {
            connects.push_back(std::async(std::launch::async, [s, &peers] { s->connect(peers, std::chrono::seconds(10)); }));
        }
        for (auto& c : connects) c.get();
    }

    const Clock clock = Clock::starting_now();
    RuntimeOptions rt;
    rt.clock = &clock;
    std::vector<std::unique_ptr<DataflowInstance>> instances;
    for (int r = 0; r < W; ++r) instances.push_back(build_dataflow(topology, W, r, *transports[r], factory, rt));

    const auto started = std::chrono::steady_clock::now();
    std::vector<RunHandle> handles;
    try {
        for (auto& inst : instances) handles.push_back(stream_process(*inst));
    } catch (...) {
        for (auto& h : handles) h.abort();
        for (auto& h : handles) h.join();
        throw;
    }
    result.joined = await_all(handles, deadline_for(options));
    result.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    const std::size_t pending = fabric ? fabric->pending_messages() : 0;
    if (fabric) {
        fabric->shutdown();
    } else {
        for (auto& t : transports) t->shutdown();
    }

    for (int r = 0; r < W; ++r) {
        result.ranks.push_back(report_for(*instances[r], handles[r], r == 0 ? pending : 0));
        result.generator_starved += starved_events(*instances[r]);
    }
    fill_totals(result);
    result.records = collector.records();
    result.summary = summarize(options.generator.target_rate, result.records, result.ranks);
    return result;
}

RunResult run_socket_rank(const RunOptions& options, int rank, const std::vector<RankAddress>& peers,
                          std::chrono::milliseconds connect_timeout) {
    options.generator.validate();
    if (options.generator.time_mode == TimeMode::kScheduled) {
        throw std::invalid_argument("scheduled time mode needs a shared start time; use wall mode across processes");
    }
    const int W = options.world_size;
    if (static_cast<int>(peers.size()) != W) {
        throw std::invalid_argument(fmt::format("{} peer addresses for a world of {}", peers.size(), W));
    }
    std::string own;
    for (const auto& p : peers) {
        if (p.rank == rank) own = p.endpoint;
    }
    if (own.empty()) throw std::invalid_argument(fmt::format("no address for rank {}", rank));

    const Topology topology = build_workload_topology(options.workload, options.generator, options.pipelining);
    RunResult result;
    if (options.keep_event_log) result.event_log = std::make_unique<EventLog>(W);
    SinkCollector collector;
    const auto factory = make_workload_factory(options.generator, result.event_log.get(), collector);

    SocketTransport transport(rank, W, own);
    transport.connect(peers, connect_timeout);

    // Processes on one host share CLOCK_MONOTONIC, so event times and release times agree.
    const Clock clock = Clock::host_monotonic();
    RuntimeOptions rt;
    rt.clock = &clock;
    auto instance = build_dataflow(topology, W, rank, transport, factory, rt);

    const auto started = std::chrono::steady_clock::now();
    std::vector<RunHandle> handles;
    handles.push_back(stream_process(*instance));
    result.joined = await_all(handles, deadline_for(options));
    result.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    transport.shutdown();

    result.ranks.push_back(report_for(*instance, handles[0], 0));
    result.generator_starved = starved_events(*instance);
    fill_totals(result);
    result.records = collector.records();
    result.summary = summarize(options.generator.target_rate, result.records, result.ranks);
    return result;
}

void write_summary_csv(const std::string& path, const std::vector<RunSummary>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", path));
    out << "rate,mean_latency_ms,p99_latency_ms,windows_processed,events_processed,events_dropped,events_late\n";
    for (const auto& s : rows) {
        out << fmt::format("{},{:.3f},{:.3f},{},{},{},{}\n", s.rate, s.mean_latency_ms, s.p99_latency_ms,
                           s.windows_processed, s.events_processed, s.events_dropped, s.events_late);
    }
    if (!out) throw std::runtime_error(fmt::format("error writing {}", path));
}

}  // namespace meshflow::bench
