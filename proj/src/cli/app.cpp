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

#include "meshflow/cli/app.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "meshflow/bench/runner.hpp"
#include "meshflow/cli/run_config.hpp"
#include "meshflow/core/log.hpp"

namespace meshflow::cli {

namespace {

constexpr std::string_view kComponent = "cli";

std::string env_name(const std::string& flag) {
    std::string out = "MESHFLOW_";
    for (char c : flag.substr(2)) out += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

struct Flags {
    std::string config_file;
    int world_size = 0;
    std::string backend;
    int rank = -1;
    std::string peers;
    std::string workload;
    std::string pipelining;
    double rate = 0;
    double duration = 0;
    std::uint64_t window_ms = 0;
    std::uint64_t seed = 0;
    std::string output;
    std::string time_mode;
    std::uint32_t event_bytes = 0;
    std::uint32_t campaigns = 0;
    std::uint32_t ads_per_campaign = 0;
    std::uint32_t batch_size = 0;
    std::uint32_t linger_ms = 0;
    int connect_timeout_ms = 0;
    int drain_timeout_ms = 0;
    bool st_search = false;
    double st_start = 0;
    double st_step = 0;
    double st_max = 0;
    double st_duration = 0;
    int st_baseline = 0;
    double st_factor = 0;
    std::vector<double> st_rates;
    std::string log_level;
    bool print_topology = false;
};

bool parse_on_off(const std::string& s) {
    if (s == "on" || s == "true" || s == "1") return true;
    if (s == "off" || s == "false" || s == "0") return false;
    throw UsageError(fmt::format("expected on/off, got '{}'", s));
}

log::Level parse_level(const std::string& s) {
    if (s == "debug") return log::Level::kDebug;
    if (s == "info") return log::Level::kInfo;
    if (s == "warn") return log::Level::kWarn;
    if (s == "error") return log::Level::kError;
    throw UsageError(fmt::format("unknown log level '{}'", s));
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
    out << j.dump(2) << '\n';
}

void dump_counters(const bench::RunResult& result) {
    for (const auto& r : result.ranks) {
        for (const auto& v : r.vertices) {
            log::write(log::Level::kInfo, "metrics",
                       fmt::format("rank={} op={} name={} in={} out={} dropped={} late={} errors={} protocol_errors={} "
                                   "windows={}",
                                   r.rank, v.op_id, v.name, v.counters.events_in, v.counters.events_out,
                                   v.counters.dropped, v.counters.late, v.counters.errors, v.counters.protocol_errors,
                                   v.counters.windows_released));
        }
        log::write(log::Level::kInfo, "metrics",
                   fmt::format("rank={} threads={}/{} failed_threads={} residual_data={} transport_messages={}", r.rank,
                               r.started_threads, r.expected_threads, r.failed_threads, r.residual_data,
                               r.transport.messages_sent));
    }
}

bench::RunOptions run_options(const RunConfig& c) {
    bench::RunOptions o;
    o.workload = c.workload;
    o.generator = c.generator;
    o.world_size = c.world_size;
    o.backend = c.backend;
    o.pipelining = c.pipelining;
    o.drain_timeout = std::chrono::milliseconds(c.drain_timeout_ms);
    return o;
}

void print_summary(const bench::RunSummary& s, bool clean) {
    std::cout << fmt::format(
        "rate={} windows={} events={} dropped={} late={} mean_latency_ms={:.1f} p99_latency_ms={:.1f} clean={}\n",
        s.rate, s.windows_processed, s.events_processed, s.events_dropped, s.events_late, s.mean_latency_ms,
        s.p99_latency_ms, clean ? "yes" : "no");
}

int run_st_search(const RunConfig& cfg, const std::filesystem::path& dir) {
    std::vector<bench::RunSummary> rows;
    bool all_joined = true;
    auto measure = [&](double rate) {
        auto opts = run_options(cfg);
        opts.generator.target_rate = rate;
        opts.generator.duration_s = cfg.st.run_duration_s;
        auto result = bench::run_local(opts);
        rows.push_back(result.summary);
        all_joined = all_joined && result.joined;
        const double generated = static_cast<double>(result.summary.events_processed);
        bench::STSample s;
        s.mean_latency_ms = result.summary.mean_latency_ms;
        s.saturated = !result.clean() || static_cast<double>(result.generator_starved) > 0.01 * std::max(1.0, generated);
        log::info(kComponent, "rate {} mean latency {:.1f} ms{}", rate, s.mean_latency_ms, s.saturated ? " (saturated)" : "");
        return s;
    };
    const auto st = bench::find_sustainable_throughput(cfg.st, measure);
    bench::write_st_report_csv((dir / "st_report.csv").string(), st);
    bench::write_summary_csv((dir / "summary.csv").string(), rows);
    if (st.sustainable_rate) {
        std::cout << fmt::format("sustainable_rate={} baseline_latency_ms={:.1f}{}\n", *st.sustainable_rate,
                                 st.baseline_latency_ms, st.exhausted ? " (no back-pressure observed)" : "");
    } else {
        std::cout << fmt::format("sustainable_rate=below_start start_rate={}\n", st.points.front().rate);
    }
    return all_joined ? kExitOk : kExitRuntime;
}

int execute(const RunConfig& cfg) {
    log::set_level(parse_level(cfg.log_level));
    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);

    if (cfg.backend == Backend::kSocket) {
        const int rank = *cfg.rank;
        auto peers = load_peers(cfg.peers_file);
        if (static_cast<int>(peers.size()) != cfg.world_size) {
            throw UsageError(fmt::format("peers file lists {} ranks for a world of {}", peers.size(), cfg.world_size));
        }
        for (const auto& p : peers) {
            if (p.rank < 0 || p.rank >= cfg.world_size) throw UsageError(fmt::format("peer rank {} out of range", p.rank));
        }
        write_json(dir / fmt::format("effective_config_rank{}.json", rank), cfg.to_json());
        auto result = bench::run_socket_rank(run_options(cfg), rank, peers,
                                             std::chrono::milliseconds(cfg.connect_timeout_ms));
        bench::write_sink_csv((dir / fmt::format("sink_rank{}.csv", rank)).string(), result.records);
        bench::write_summary_csv((dir / fmt::format("summary_rank{}.csv", rank)).string(), {result.summary});
        dump_counters(result);
        print_summary(result.summary, result.clean());
        return result.clean() ? kExitOk : kExitRuntime;
    }

    write_json(dir / "effective_config.json", cfg.to_json());
    if (cfg.st_search) return run_st_search(cfg, dir);

    auto result = bench::run_local(run_options(cfg));
    bench::write_sink_csv((dir / "sink.csv").string(), result.records);
    bench::write_summary_csv((dir / "summary.csv").string(), {result.summary});
    dump_counters(result);
    print_summary(result.summary, result.clean());
    return result.clean() ? kExitOk : kExitRuntime;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"meshflow: distributed windowed stream processing benchmarks"};
    Flags f;
    auto opt = [&](const std::string& name, auto& var, const std::string& help) {
        return app.add_option(name, var, help)->envname(env_name(name));
    };
    auto* o_config = app.add_option("--config", f.config_file, "JSON run configuration to start from")
                         ->check(CLI::ExistingFile);
    auto* o_world = opt("--world-size", f.world_size, "number of ranks");
    auto* o_backend = opt("--backend", f.backend, "in-process | socket");
    auto* o_rank = opt("--rank", f.rank, "this process's rank (socket backend)");
    auto* o_peers = opt("--peers", f.peers, "file with one 'rank host:port' per line (socket backend)");
    auto* o_workload = opt("--workload", f.workload, "swa | ysb | ysb-star");
    auto* o_pipe = opt("--pipelining", f.pipelining, "on | off");
    auto* o_rate = opt("--rate", f.rate, "events per second over all generators");
    auto* o_duration = opt("--duration", f.duration, "generation time in seconds");
    auto* o_window = opt("--window-ms", f.window_ms, "window length in milliseconds");
    auto* o_seed = opt("--seed", f.seed, "generator seed");
    auto* o_output = opt("--output", f.output, "output directory");
    auto* o_time = opt("--time-mode", f.time_mode, "wall | scheduled");
    auto* o_bytes = opt("--event-bytes", f.event_bytes, "mean serialized event size");
    auto* o_campaigns = opt("--campaigns", f.campaigns, "number of campaigns");
    auto* o_ads = opt("--ads-per-campaign", f.ads_per_campaign, "ads per campaign");
    auto* o_batch = opt("--batch-size", f.batch_size, "generator events per message");
    auto* o_linger = opt("--linger-ms", f.linger_ms, "generator flush interval");
    auto* o_connect = opt("--connect-timeout-ms", f.connect_timeout_ms, "socket connection timeout");
    auto* o_drain = opt("--drain-timeout-ms", f.drain_timeout_ms, "time allowed after generation ends");
    auto* o_st = app.add_flag("--st-search", f.st_search, "search the sustainable throughput")->envname("MESHFLOW_ST_SEARCH");
    auto* o_st_start = opt("--st-start-rate", f.st_start, "first rate of the search");
    auto* o_st_step = opt("--st-step", f.st_step, "rate increment");
    auto* o_st_max = opt("--st-max-rate", f.st_max, "last rate of the search");
    auto* o_st_dur = opt("--st-run-duration", f.st_duration, "seconds per search run");
    auto* o_st_base = opt("--st-baseline-runs", f.st_baseline, "runs averaged into the baseline latency");
    auto* o_st_factor = opt("--st-factor", f.st_factor, "back-pressure threshold over the baseline");
    auto* o_st_rates = opt("--st-rates", f.st_rates, "explicit increasing rates")->delimiter(',');
    auto* o_log = opt("--log-level", f.log_level, "debug | info | warn | error");
    app.add_flag("--print-topology", f.print_topology, "print the workload topology as JSON and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        RunConfig cfg;
        if (o_config->count() > 0) {
            std::ifstream in(f.config_file);
            nlohmann::json j;
            try {
                in >> j;
            } catch (const nlohmann::json::exception& e) {
                throw UsageError(fmt::format("{}: {}", f.config_file, e.what()));
            }
            cfg = RunConfig::from_json(j);
        }
        try {
            if (o_world->count()) cfg.world_size = f.world_size;
            if (o_backend->count()) cfg.backend = parse_backend(f.backend);
            if (o_rank->count()) cfg.rank = f.rank;
            if (o_peers->count()) cfg.peers_file = f.peers;
            if (o_workload->count()) cfg.workload = bench::parse_workload(f.workload);
            if (o_pipe->count()) cfg.pipelining = parse_on_off(f.pipelining);
            if (o_rate->count()) cfg.generator.target_rate = f.rate;
            if (o_duration->count()) cfg.generator.duration_s = f.duration;
            if (o_window->count()) cfg.generator.window_ms = f.window_ms;
            if (o_seed->count()) cfg.generator.seed = f.seed;
            if (o_output->count()) cfg.output_dir = f.output;
            if (o_time->count()) cfg.generator.time_mode = bench::parse_time_mode(f.time_mode);
            if (o_bytes->count()) cfg.generator.avg_event_bytes = f.event_bytes;
            if (o_campaigns->count()) cfg.generator.num_campaigns = f.campaigns;
            if (o_ads->count()) cfg.generator.ads_per_campaign = f.ads_per_campaign;
            if (o_batch->count()) cfg.generator.batch_size = f.batch_size;
            if (o_linger->count()) cfg.generator.linger_ms = f.linger_ms;
            if (o_connect->count()) cfg.connect_timeout_ms = f.connect_timeout_ms;
            if (o_drain->count()) cfg.drain_timeout_ms = f.drain_timeout_ms;
            if (o_st->count()) cfg.st_search = f.st_search;
            if (o_st_start->count()) cfg.st.start_rate = f.st_start;
            if (o_st_step->count()) cfg.st.rate_step = f.st_step;
            if (o_st_max->count()) cfg.st.max_rate = f.st_max;
            if (o_st_dur->count()) cfg.st.run_duration_s = f.st_duration;
            if (o_st_base->count()) cfg.st.baseline_runs = f.st_baseline;
            if (o_st_factor->count()) cfg.st.backpressure_factor = f.st_factor;
            if (o_st_rates->count()) cfg.st.rates = f.st_rates;
            if (o_log->count()) cfg.log_level = f.log_level;
            parse_level(cfg.log_level);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        cfg.validate();

        if (f.print_topology) {
            std::cout << bench::build_workload_topology(cfg.workload, cfg.generator, cfg.pipelining).to_json().dump(2)
                      << '\n';
            return kExitOk;
        }
        return execute(cfg);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\nRun with --help for more information.\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        log::error(kComponent, "run failed: {}", e.what());
        return kExitRuntime;
    }
}

}  // namespace meshflow::cli
