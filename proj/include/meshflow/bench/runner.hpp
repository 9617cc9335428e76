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
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "meshflow/bench/generator.hpp"
#include "meshflow/bench/sink.hpp"
#include "meshflow/bench/workload.hpp"
#include "meshflow/runtime/dataflow.hpp"
#include "meshflow/transport/transport.hpp"

namespace meshflow::bench {

struct RunOptions {
    Workload workload = Workload::kSwa;
    GeneratorConfig generator;
    int world_size = 1;
    /// kSocket here means every rank runs as threads of this process but talks over loopback TCP.
    Backend backend = Backend::kInProcess;
    bool pipelining = false;
    bool keep_event_log = false;
    /// Extra time allowed after the generators finish before the run is declared hung.
    std::chrono::milliseconds drain_timeout{30'000};
};

struct RunSummary {
    double rate = 0;
    double mean_latency_ms = 0;
    double p99_latency_ms = 0;
    std::uint64_t windows_processed = 0;
    std::uint64_t events_processed = 0;
    std::uint64_t events_dropped = 0;
    std::uint64_t events_late = 0;
};

struct RankReport {
    int rank = 0;
    std::size_t expected_threads = 0;
    std::size_t started_threads = 0;
    std::size_t failed_threads = 0;
    std::size_t residual_data = 0;
    TransportStats transport;
    std::vector<VertexMetrics> vertices;
};

struct RunResult {
    RunSummary summary;
    std::vector<WindowResultRecord> records;
    std::vector<RankReport> ranks;
    std::unique_ptr<EventLog> event_log;
    std::uint64_t generator_starved = 0;
    std::uint64_t protocol_errors = 0;
    std::uint64_t operator_errors = 0;
    bool joined = false;
    double elapsed_s = 0;

    /// Every thread joined, no failures, no DATA left in any queue.
    bool clean() const;
    /// Transport sends whose source operator is `op_id`, over all ranks.
    std::uint64_t sends_from(int op_id) const;
};

RunSummary summarize(double rate, const std::vector<WindowResultRecord>& records,
                     const std::vector<RankReport>& ranks);

/// Runs all world_size ranks inside this process and waits for them to finish.
RunResult run_local(const RunOptions& options);

/// Runs one rank of a multi-process deployment over sockets. Results cover this rank only.
RunResult run_socket_rank(const RunOptions& options, int rank, const std::vector<RankAddress>& peers,
                          std::chrono::milliseconds connect_timeout);

/// Header: rate,mean_latency_ms,p99_latency_ms,windows_processed,events_processed,events_dropped,events_late
void write_summary_csv(const std::string& path, const std::vector<RunSummary>& rows);

}  // namespace meshflow::bench
