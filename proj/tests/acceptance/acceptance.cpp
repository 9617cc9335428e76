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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any criterion fails.
//
//   meshflow_acceptance [--duration SECONDS] [criterion ids...]
//
// --duration shortens the oracle grid runs for local iteration; the default is the full 60 s.

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <future>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "harness.hpp"
#include "meshflow/bench/runner.hpp"
#include "meshflow/bench/st_search.hpp"
#include "meshflow/bench/workload.hpp"
#include "meshflow/core/channel_tag.hpp"
#include "meshflow/core/log.hpp"
#include "meshflow/ops/builder.hpp"
#include "meshflow/ops/stateful.hpp"
#include "meshflow/transport/in_process_transport.hpp"
#include "meshflow/transport/socket_transport.hpp"
#include "oracle.hpp"

namespace mf = meshflow;
using mf::bench::Workload;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;
    std::vector<std::string> failures;

    void check(bool ok, std::string what) {
        if (!ok) {
            pass = false;
            failures.push_back(std::move(what));
        }
    }
    void note(std::string s) { notes.push_back(std::move(s)); }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

double g_grid_duration_s = 60;

// ------------------------------------------------------------------ C1

Outcome tag_protocol() {
    Outcome out;
    const auto start = Clock::now();
    std::size_t checked = 0;
    auto verify = [&](int sr, int so, int tr, int to) {
        const auto tag = mf::ChannelTag::make(sr, so, tr, to);
        const std::uint32_t code = mf::encode_tag(tag);
        const std::uint32_t manual = static_cast<std::uint32_t>(sr) * 16777216u + static_cast<std::uint32_t>(so) * 65536u +
                                     static_cast<std::uint32_t>(tr) * 256u + static_cast<std::uint32_t>(to);
        const auto back = mf::decode_tag(code);
        ++checked;
        return code == manual && back == tag;
    };

    const int bounds[] = {0, 1, 2, 127, 128, 129, 253, 254, 255};
    std::size_t bad = 0;
    for (int a : bounds)
        for (int b : bounds)
            for (int c : bounds)
                for (int d : bounds) bad += verify(a, b, c, d) ? 0 : 1;

    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> byte(0, 255);
    for (int field = 0; field < 4; ++field) {
        for (int v = 0; v < 256; ++v) {
            int f[4] = {byte(rng), byte(rng), byte(rng), byte(rng)};
            f[field] = v;
            bad += verify(f[0], f[1], f[2], f[3]) ? 0 : 1;
        }
    }
    std::uniform_int_distribution<std::uint32_t> word;
    for (int i = 0; i < 100'000; ++i) {
        bad += verify(byte(rng), byte(rng), byte(rng), byte(rng)) ? 0 : 1;
        const std::uint32_t t = word(rng);
        bad += mf::encode_tag(mf::decode_tag(t)) == t ? 0 : 1;
    }
    std::size_t rejected = 0;
    for (int v : {-1, 256, 1000}) {
        for (int field = 0; field < 4; ++field) {
            int f[4] = {0, 0, 0, 0};
            f[field] = v;
            try {
                (void)mf::ChannelTag::make(f[0], f[1], f[2], f[3]);
            } catch (const std::out_of_range&) {
                ++rejected;
            }
        }
    }
    const double elapsed = seconds_since(start);
    out.check(bad == 0, fmt::format("{} round-trip mismatches", bad));
    out.check(rejected == 12, fmt::format("{}/12 out-of-range fields rejected", rejected));
    out.check(elapsed < 1.0, fmt::format("took {:.2f} s", elapsed));
    out.note(fmt::format("{} tags checked, {} out-of-range rejected", checked, rejected));
    return out;
}

// ------------------------------------------------------------------ C2

struct FifoStats {
    std::size_t misrouted = 0;
    std::size_t reordered = 0;
    std::size_t lost = 0;
    std::size_t extra = 0;
};

FifoStats fifo_run(std::vector<std::unique_ptr<mf::Transport>>& transports, const std::function<void()>& shutdown_all,
                   std::size_t per_tag, std::uint64_t seed) {
    const int W = static_cast<int>(transports.size());
    std::vector<mf::ChannelTag> tags;
    for (int i = 0; i < 64; ++i) {
        tags.push_back(mf::ChannelTag::make(i % W, i / 16 + 1, (i / W) % W, (i * 7) % 13 + 20));
    }
    for (const auto& t : tags) transports[t.target_rank]->register_receiver(t);

    FifoStats stats;
    std::mutex mu;
    std::vector<std::thread> receivers;
    for (const auto& tag : tags) {
        receivers.emplace_back([&, tag] {
            FifoStats local;
            std::uint64_t expect = 0;
            for (std::size_t n = 0; n < per_tag; ++n) {
                auto msg = transports[tag.target_rank]->recv(tag);
                if (!msg) {
                    local.lost += per_tag - n;
                    break;
                }
                if (!(msg->tag == tag) || msg->events.size() != 1 || msg->events[0].value != mf::encode_tag(tag)) {
                    ++local.misrouted;
                    continue;
                }
                if (msg->events[0].key != expect) ++local.reordered;
                expect = msg->events[0].key + 1;
            }
            std::lock_guard lock(mu);
            stats.misrouted += local.misrouted;
            stats.reordered += local.reordered;
            stats.lost += local.lost;
        });
    }

    std::vector<std::thread> senders;
    for (int r = 0; r < W; ++r) {
        senders.emplace_back([&, r] {
            std::vector<std::size_t> mine;
            for (std::size_t i = 0; i < tags.size(); ++i) {
                if (tags[i].source_rank == r) mine.insert(mine.end(), per_tag, i);
            }
            std::mt19937_64 rng(seed + static_cast<std::uint64_t>(r));
            std::shuffle(mine.begin(), mine.end(), rng);
            std::vector<std::uint64_t> seq(tags.size(), 0);
            std::uniform_int_distribution<std::size_t> payload(0, 300);
            for (std::size_t i : mine) {
                mf::Event e{seq[i]++, mf::encode_tag(tags[i]), 0, std::vector<std::uint8_t>(payload(rng), 0xab)};
                transports[r]->send(tags[i].target_rank, tags[i], mf::Message::data(tags[i], {std::move(e)}));
            }
        });
    }
    for (auto& t : senders) t.join();
    for (auto& t : receivers) t.join();
    shutdown_all();
    for (const auto& tag : tags) {
        if (transports[tag.target_rank]->recv(tag)) ++stats.extra;
    }
    return stats;
}

Outcome transport_fifo() {
    Outcome out;
    const auto start = Clock::now();
    constexpr int W = 4;
    constexpr std::size_t kPerTag = 400;
    {
        auto fabric = mf::LocalFabric::create(W);
        std::vector<std::unique_ptr<mf::Transport>> ts;
        for (int r = 0; r < W; ++r) ts.push_back(fabric->endpoint(r));
        std::size_t pending = 0;
        const auto s = fifo_run(ts, [&] {
            pending = fabric->pending_messages();
            fabric->shutdown();
        }, kPerTag, 11);
        out.check(pending == 0, fmt::format("in-process: {} messages left in the fabric", pending));
        out.check(s.misrouted == 0 && s.reordered == 0 && s.lost == 0 && s.extra == 0,
                  fmt::format("in-process: misrouted={} reordered={} lost={} extra={}", s.misrouted, s.reordered,
                              s.lost, s.extra));
    }
    {
        std::vector<std::unique_ptr<mf::Transport>> ts;
        std::vector<mf::SocketTransport*> sockets;
        std::vector<mf::RankAddress> peers;
        for (int r = 0; r < W; ++r) {
            auto t = std::make_unique<mf::SocketTransport>(r, W, "127.0.0.1:0");
            peers.push_back({r, fmt::format("127.0.0.1:{}", t->port())});
            sockets.push_back(t.get());
            ts.push_back(std::move(t));
        }
        std::vector<std::future<void>> conn;
        for (auto* s : sockets) conn.push_back(std::async(std::launch::async, [s, &peers] { s->connect(peers, std::chrono::seconds(10)); }));
        for (auto& c : conn) c.get();
        const auto s = fifo_run(ts, [&] {
            std::vector<std::thread> stop;
            for (auto& t : ts) stop.emplace_back([&t] { t->shutdown(); });
            for (auto& t : stop) t.join();
        }, kPerTag, 12);
        out.check(s.misrouted == 0 && s.reordered == 0 && s.lost == 0 && s.extra == 0,
                  fmt::format("socket: misrouted={} reordered={} lost={} extra={}", s.misrouted, s.reordered, s.lost,
                              s.extra));
    }
    const double elapsed = seconds_since(start);
    out.check(elapsed < 30, fmt::format("took {:.1f} s", elapsed));
    out.note(fmt::format("64 tags x {} messages per backend", kPerTag));
    return out;
}

// ------------------------------------------------------------------ grid runs (C3-C6, C10)

struct GridKey {
    Workload workload;
    int world_size;
    bool pipelining;
    auto operator<=>(const GridKey&) const = default;
};

std::map<GridKey, mf::bench::RunResult> g_grid;

mf::bench::GeneratorConfig grid_generator() {
    mf::bench::GeneratorConfig g;
    g.target_rate = 10'000;
    g.duration_s = g_grid_duration_s;
    g.window_ms = 10'000;
    g.seed = 20'240'611;
    g.time_mode = mf::bench::TimeMode::kScheduled;
    return g;
}

void run_grid(Workload w) {
    std::vector<std::pair<GridKey, std::future<mf::bench::RunResult>>> jobs;
    for (int W : {1, 2, 4}) {
        for (bool pipe : {false, true}) {
            GridKey key{w, W, pipe};
            if (g_grid.count(key)) continue;
            mf::bench::RunOptions o;
            o.workload = w;
            o.generator = grid_generator();
            o.world_size = W;
            o.pipelining = pipe;
            o.keep_event_log = true;
            o.drain_timeout = std::chrono::seconds(60);
            jobs.emplace_back(key, std::async(std::launch::async, [o] { return mf::bench::run_local(o); }));
        }
    }
    for (auto& [key, fut] : jobs) g_grid.emplace(key, fut.get());
}

std::string config_name(const GridKey& k) {
    return fmt::format("{} W={} pipelining={}", mf::bench::to_string(k.workload), k.world_size, k.pipelining ? "on" : "off");
}

std::uint64_t count_events_of_type(const mf::bench::EventLog& log, std::uint64_t type) {
    std::uint64_t n = 0;
    for (const auto& e : log.all()) n += e.value == type ? 1 : 0;
    return n;
}

Outcome workload_oracle(Workload w) {
    Outcome out;
    const auto start = Clock::now();
    run_grid(w);
    std::size_t exact = 0;
    for (auto& [key, result] : g_grid) {
        if (key.workload != w) continue;
        const auto name = config_name(key);
        out.check(result.clean(), name + ": run did not shut down cleanly");
        const auto events = result.event_log->all();
        const auto expected = mf::testing::expected_results(w, events, grid_generator());
        mf::testing::WindowTable actual;
        try {
            actual = mf::testing::to_table(result.records);
        } catch (const std::exception& e) {
            out.check(false, name + ": " + e.what());
            continue;
        }
        const auto diffs = mf::testing::diff_tables(expected, actual);
        for (const auto& d : diffs) out.check(false, name + ": " + d);
        if (diffs.empty()) ++exact;
        out.check(result.summary.events_late == 0, fmt::format("{}: {} late events", name, result.summary.events_late));

        if (w == Workload::kSwa) {
            std::map<std::uint64_t, std::uint64_t> truth;
            for (int r = 0; r < key.world_size; ++r) {
                for (auto [win, n] : mf::testing::scheduled_counts_per_window(grid_generator(), key.world_size)) truth[win] += n;
            }
            std::map<std::uint64_t, std::uint64_t> got;
            for (const auto& r : result.records) got[r.window_id] += r.value;
            out.check(got == truth, name + ": per-window counts differ from the generator schedule");
            out.check(result.summary.events_dropped == 0, fmt::format("{}: {} drops", name, result.summary.events_dropped));
            if (key.world_size == 1 && !key.pipelining) {
                std::string counts;
                for (auto [win, n] : got) counts += fmt::format("{}{}", counts.empty() ? "" : ",", n);
                out.note(fmt::format("window counts [{}]", counts));
            }
        } else if (w == Workload::kYsb) {
            out.check(result.summary.events_dropped == 0, fmt::format("{}: {} drops", name, result.summary.events_dropped));
        } else {
            // The split routes clicks and views only; purchases match no branch and are dropped there.
            const auto purchases = count_events_of_type(*result.event_log, 2);
            out.check(result.summary.events_dropped == purchases,
                      fmt::format("{}: {} drops, expected {} purchase events", name, result.summary.events_dropped,
                                  purchases));
        }
        if (key.world_size == 4 && key.pipelining) {
            out.note(fmt::format("{} result rows, {} events", actual.size(), events.size()));
        }
    }
    out.note(fmt::format("{}/6 configurations exact", exact));

    if (w == Workload::kYsbStar) {
        // Sparse traffic: many campaign windows see clicks without views, which must produce nothing.
        mf::bench::RunOptions o;
        o.workload = w;
        o.generator = grid_generator();
        o.generator.target_rate = 60;
        o.generator.duration_s = 3;
        o.generator.window_ms = 1000;
        o.world_size = 2;
        o.keep_event_log = true;
        auto result = mf::bench::run_local(o);
        const auto expected = mf::testing::expected_results(w, result.event_log->all(), o.generator);
        const auto actual = mf::testing::to_table(result.records);
        for (const auto& d : mf::testing::diff_tables(expected, actual)) out.check(false, "sparse: " + d);
        std::set<std::pair<std::uint64_t, std::uint64_t>> click_only;
        const auto cat = mf::bench::make_ad_catalogue(o.generator);
        std::set<std::pair<std::uint64_t, std::uint64_t>> viewed;
        for (const auto& e : result.event_log->all()) {
            const auto k = std::make_pair(e.event_time / 1000, *cat.ad_to_campaign.lookup(e.key));
            if (e.value == 0) viewed.insert(k);
            if (e.value == 1) click_only.insert(k);
        }
        std::size_t zero_view = 0;
        for (const auto& k : click_only) zero_view += viewed.count(k) ? 0 : 1;
        out.check(zero_view > 0, "sparse run produced no click-only campaign windows");
        out.check(result.clean(), "sparse run did not shut down cleanly");
        out.note(fmt::format("sparse run: {} click-only campaign windows suppressed, {} ratios", zero_view, actual.size()));
    }
    const double elapsed = seconds_since(start);
    out.check(elapsed < 300, fmt::format("took {:.0f} s", elapsed));
    return out;
}

// ------------------------------------------------------------------ C6

Outcome pipelining() {
    Outcome out;
    for (Workload w : {Workload::kSwa, Workload::kYsb, Workload::kYsbStar}) run_grid(w);
    std::size_t identical = 0;
    for (Workload w : {Workload::kSwa, Workload::kYsb, Workload::kYsbStar}) {
        for (int W : {1, 2, 4}) {
            const auto& off = g_grid.at({w, W, false});
            const auto& on = g_grid.at({w, W, true});
            const bool same = mf::testing::projection(off.records) == mf::testing::projection(on.records) &&
                              !off.records.empty();
            out.check(same, fmt::format("{} W={}: sink output differs with pipelining", mf::bench::to_string(w), W));
            identical += same ? 1 : 0;
        }
        const auto topo = mf::bench::build_workload_topology(w, grid_generator(), true);
        const auto& on = g_grid.at({w, 1, true});
        const auto& off = g_grid.at({w, 1, false});
        std::uint64_t sends_on = 0;
        std::uint64_t sends_off = 0;
        for (const auto& d : topo.operators()) {
            if (!mf::is_stateless(d.kind)) continue;
            sends_on += on.sends_from(d.op_id);
            sends_off += off.sends_from(d.op_id);
        }
        out.check(sends_on == 0, fmt::format("{}: {} transport sends from stateless operators with pipelining, W=1",
                                             mf::bench::to_string(w), sends_on));
        out.check(sends_off > 0, fmt::format("{}: no stateless sends without pipelining", mf::bench::to_string(w)));
        out.note(fmt::format("{} W=1 stateless sends {} -> {}", mf::bench::to_string(w), sends_off, sends_on));
    }
    out.note(fmt::format("{}/9 sorted sink outputs identical", identical));

    // Reported only: the same saturated single-rank run with and without pipelining.
    double rates[2] = {0, 0};
    double lat[2] = {0, 0};
    for (int p = 0; p < 2; ++p) {
        mf::bench::RunOptions o;
        o.workload = Workload::kYsb;
        o.generator.target_rate = 2'000'000;
        o.generator.duration_s = 2;
        o.generator.window_ms = 500;
        o.world_size = 1;
        o.pipelining = p == 1;
        auto r = mf::bench::run_local(o);
        rates[p] = static_cast<double>(r.summary.events_processed) / o.generator.duration_s;
        lat[p] = r.summary.mean_latency_ms;
    }
    out.note(fmt::format("saturated YSB W=1: {:.0f} ev/s ({:.0f} ms) off, {:.0f} ev/s ({:.0f} ms) on, {:+.1f}%", rates[0],
                         lat[0], rates[1], lat[1], 100.0 * (rates[1] - rates[0]) / std::max(1.0, rates[0])));
    return out;
}

// ------------------------------------------------------------------ C7

Outcome timestamp_law() {
    Outcome out;
    std::mt19937_64 rng(77);
    constexpr std::uint64_t kWindow = 100;
    const mf::Clock clock(mf::Clock::steady::now() - std::chrono::seconds(10));
    std::size_t emitted = 0;
    std::size_t bad_time = 0;
    std::size_t bad_value = 0;
    std::size_t bad_set = 0;
    std::size_t bad_latency = 0;

    mf::bench::SinkCollector collector;
    mf::OperatorContext sink_ctx;
    sink_ctx.clock = &clock;
    mf::bench::SinkOperator sink(sink_ctx, kWindow, collector);

    for (int set = 0; set < 10'000; ++set) {
        const bool join = set % 5 == 4;
        mf::OperatorContext ctx;
        ctx.indegree = join ? 2 : static_cast<int>(rng() % 3 + 1);
        ctx.outdegree = 1;
        ctx.clock = &clock;
        const std::size_t n = rng() % 40 + 1;
        std::vector<std::pair<mf::Event, int>> events;  // event, input side
        for (std::size_t i = 0; i < n; ++i) {
            mf::Event e{rng() % 5, rng() % 1000, rng() % (4 * kWindow), {}};
            events.emplace_back(e, static_cast<int>(rng() % static_cast<std::uint64_t>(ctx.indegree)));
        }
        // Oracle: per side, per (window, key) fold and max time.
        using Key = std::pair<std::uint64_t, std::uint64_t>;
        std::map<Key, std::pair<std::uint64_t, std::uint64_t>> side[2];  // value, max time
        const auto fn_kind = static_cast<int>(rng() % 3);
        for (const auto& [e, s] : events) {
            auto& cell = side[join ? s : 0][{e.event_time / kWindow, e.key}];
            cell.second = std::max(cell.second, e.event_time + 1);  // +1 marks presence
            if (join || fn_kind == 1) cell.first += e.value;
            else if (fn_kind == 0) cell.first += 1;
            else cell.first = std::max(cell.first, e.value);
        }

        mf::OutputSlots slots(1);
        std::unique_ptr<mf::Operator> op;
        if (join) {
            op = std::make_unique<mf::ops::WindowJoinOperator>(
                ctx, mf::ops::WindowJoinOperator::Config{mf::ops::WindowJoinOperator::Combine::kSum, kWindow});
        } else {
            mf::ops::WindowAggregateOperator::Config cfg;
            cfg.function = mf::ops::AggregateFunction(fn_kind == 0   ? mf::ops::AggregateFunction::Kind::kCount
                                                      : fn_kind == 1 ? mf::ops::AggregateFunction::Kind::kSum
                                                                     : mf::ops::AggregateFunction::Kind::kMax);
            cfg.window_ms = kWindow;
            op = std::make_unique<mf::ops::WindowAggregateOperator>(ctx, cfg);
        }
        // Random batching over the inputs.
        std::size_t i = 0;
        while (i < events.size()) {
            const std::size_t len = std::min<std::size_t>(events.size() - i, rng() % 5 + 1);
            std::vector<mf::Event> by_side[2];
            for (std::size_t k = i; k < i + len; ++k) by_side[events[k].second % 2 == 1 && join ? 1 : 0].push_back(events[k].first);
            for (int s = 0; s < 2; ++s) {
                if (by_side[s].empty()) continue;
                op->on_data(std::move(by_side[s]), mf::InputInfo{0, s, 0}, slots);
            }
            i += len;
        }
        op->on_watermark(mf::kAllWindows, slots);

        std::map<Key, std::pair<std::uint64_t, std::uint64_t>> expected;
        if (join) {
            for (const auto& [k, l] : side[0]) {
                auto it = side[1].find(k);
                if (it != side[1].end()) expected[k] = {l.first + it->second.first, std::max(l.second, it->second.second) - 1};
            }
        } else {
            for (const auto& [k, c] : side[0]) expected[k] = {c.first, c.second - 1};
        }
        std::set<Key> seen;
        for (const auto& e : slots[0]) {
            const Key k{e.event_time / kWindow, e.key};
            ++emitted;
            seen.insert(k);
            auto it = expected.find(k);
            if (it == expected.end()) {
                ++bad_set;
                continue;
            }
            bad_time += e.event_time == it->second.second ? 0 : 1;
            bad_value += e.value == it->second.first ? 0 : 1;
        }
        bad_set += seen.size() == expected.size() ? 0 : 1;
        sink.on_data(std::move(slots[0]), mf::InputInfo{}, slots);
    }
    for (const auto& r : collector.records()) {
        if (r.latency_ms < 0 || r.latency_ms != static_cast<std::int64_t>(r.release_ms) - static_cast<std::int64_t>(r.event_time_ms)) {
            ++bad_latency;
        }
    }
    std::size_t grid_records = 0;
    for (const auto& [key, result] : g_grid) {
        for (const auto& r : result.records) {
            ++grid_records;
            if (r.latency_ms < 0 ||
                r.latency_ms != static_cast<std::int64_t>(r.release_ms) - static_cast<std::int64_t>(r.event_time_ms)) {
                ++bad_latency;
            }
        }
    }
    out.check(bad_time == 0, fmt::format("{} windowed events with a wrong event time", bad_time));
    out.check(bad_value == 0, fmt::format("{} windowed events with a wrong value", bad_value));
    out.check(bad_set == 0, fmt::format("{} sets with missing or extra results", bad_set));
    out.check(bad_latency == 0, fmt::format("{} records violating latency = release - event_time >= 0", bad_latency));
    out.note(fmt::format("10000 sets, {} windowed events, {} grid records checked", emitted, grid_records));
    return out;
}

// ------------------------------------------------------------------ C8

Outcome preaggregation() {
    Outcome out;
    std::mt19937_64 rng(88);
    constexpr int W = 4;
    constexpr std::uint64_t kWindow = 50;
    std::size_t trials = 0;
    for (const char* fn : {"sum", "count"}) {
        for (int t = 0; t < 12; ++t) {
            ++trials;
            std::vector<std::vector<mf::Event>> per_rank(W);
            std::map<std::pair<std::uint64_t, std::uint64_t>, mf::testing::Cell> oracle;
            const std::size_t n = rng() % 800 + 50;
            for (std::size_t i = 0; i < n; ++i) {
                mf::Event e{rng() % 23, rng() % 1000, rng() % (5 * kWindow), {}};
                auto& c = oracle[{e.event_time / kWindow, e.key}];
                c.value += std::string(fn) == "sum" ? e.value : 1;
                c.event_time_ms = std::max(c.event_time_ms, e.event_time);
                per_rank[rng() % W].push_back(e);
            }
            const char* routings[] = {"key", "value", "local"};
            const std::string routing = routings[rng() % 3];
            const nlohmann::json params{{"function", fn}, {"window_ms", kWindow}, {"group", "key"}};

            mf::ops::TopologyBuilder single;
            {
                // A single-stage keyed aggregation needs key-partitioned input.
                const int g = single.add(mf::OperatorKind::kGenerator, "source", {{"routing", "key"}});
                auto p = params;
                p["stage"] = "single";
                const int a = single.add(mf::OperatorKind::kAggregation, "agg", p);
                const int s = single.add(mf::OperatorKind::kSink, "sink");
                single.connect(g, a);
                single.connect(a, s);
            }
            mf::ops::TopologyBuilder two;
            {
                const int g = two.add(mf::OperatorKind::kGenerator, "source", {{"routing", routing}});
                const auto [pre, global] = two.preaggregate_then_global("agg", params);
                const int s = two.add(mf::OperatorKind::kSink, "sink");
                two.connect(g, pre);
                two.connect(global, s);
            }
            const auto r1 = mf::testing::run_topology(single.build(), W, per_rank, kWindow);
            const auto r2 = mf::testing::run_topology(two.build(), W, per_rank, kWindow);
            const auto t1 = mf::testing::to_table(r1.records);
            const auto t2 = mf::testing::to_table(r2.records);
            const auto d1 = mf::testing::diff_tables(oracle, t1, 2);
            const auto d2 = mf::testing::diff_tables(oracle, t2, 2);
            for (const auto& d : d1) out.check(false, fmt::format("{} trial {} single-stage: {}", fn, t, d));
            for (const auto& d : d2) out.check(false, fmt::format("{} trial {} two-stage: {}", fn, t, d));
            out.check(r1.joined && r2.joined && r1.failures == 0 && r2.failures == 0,
                      fmt::format("{} trial {}: run did not finish cleanly", fn, t));
        }
    }
    out.note(fmt::format("{} randomized placements on {} ranks", trials, W));
    return out;
}

// ------------------------------------------------------------------ C9

Outcome st_search() {
    Outcome out;
    // Knees sit past the baseline rates so the baseline itself is unloaded.
    for (double knee : {9'000.0, 17'500.0, 23'000.0, 41'000.0}) {
        for (double step : {1'000.0, 2'500.0}) {
            mf::bench::STSearchConfig cfg;
            cfg.start_rate = 1'000;
            cfg.rate_step = step;
            cfg.max_rate = 60'000;
            const auto r = mf::bench::find_sustainable_throughput(cfg, [&](double rate) {
                return mf::bench::STSample{rate < knee ? 100.0 : 1000.0, false};
            });
            const bool ok = r.sustainable_rate && *r.sustainable_rate < knee && *r.sustainable_rate >= knee - step;
            out.check(ok, fmt::format("knee {} step {}: got {}", knee, step,
                                      r.sustainable_rate ? fmt::format("{}", *r.sustainable_rate) : "none"));
        }
    }
    // Reference curve: average latency (ms) against throughput (millions of events/s).
    const std::vector<std::pair<double, double>> curve = {{1, 192},   {5, 365},    {13, 578},   {22, 799},
                                                          {23, 833},  {24, 1423},  {25, 6496},  {26, 15794},
                                                          {27, 19737}, {28, 25990}, {30, 35008}, {31, 38964},
                                                          {32, 44304}};
    mf::bench::STSearchConfig cfg;
    for (const auto& [rate, lat] : curve) cfg.rates.push_back(rate);
    const auto r = mf::bench::find_sustainable_throughput(cfg, [&](double rate) {
        for (const auto& [x, y] : curve) {
            if (x == rate) return mf::bench::STSample{y, false};
        }
        return mf::bench::STSample{0, true};
    });
    out.check(r.sustainable_rate && *r.sustainable_rate == 24,
              fmt::format("reference curve: got {}", r.sustainable_rate ? fmt::format("{}", *r.sustainable_rate) : "none"));
    out.note(fmt::format("reference curve: baseline {:.1f} ms, threshold {:.0f} ms, ST {}M", r.baseline_latency_ms,
                         4.0 * r.baseline_latency_ms, r.sustainable_rate.value_or(-1)));
    return out;
}

// ------------------------------------------------------------------ C10

Outcome clean_shutdown() {
    Outcome out;
    std::size_t grid_clean = 0;
    for (const auto& [key, result] : g_grid) {
        out.check(result.clean(), config_name(key) + ": not clean");
        grid_clean += result.clean() ? 1 : 0;
    }
    std::size_t reps_clean = 0;
    std::size_t threads = 0;
    const Workload workloads[] = {Workload::kSwa, Workload::kYsb, Workload::kYsbStar};
    for (int rep = 0; rep < 20; ++rep) {
        mf::bench::RunOptions o;
        o.workload = workloads[rep % 3];
        o.generator.target_rate = 4'000;
        o.generator.duration_s = 1.2;
        o.generator.window_ms = 300;
        o.generator.seed = 1000 + static_cast<std::uint64_t>(rep);
        o.generator.time_mode = mf::bench::TimeMode::kScheduled;
        o.world_size = rep % 2 == 0 ? 4 : 2;
        o.pipelining = (rep / 2) % 2 == 1;
        o.backend = rep % 5 == 4 ? mf::Backend::kSocket : mf::Backend::kInProcess;
        o.keep_event_log = true;
        o.drain_timeout = std::chrono::seconds(20);
        const auto t0 = Clock::now();
        auto r = mf::bench::run_local(o);
        const auto name = fmt::format("rep {} ({} W={} {} {})", rep, mf::bench::to_string(o.workload), o.world_size,
                                      o.pipelining ? "pipelined" : "plain", mf::to_string(o.backend));
        out.check(r.joined, name + ": did not terminate in time");
        std::size_t residual = 0;
        std::size_t failed = 0;
        for (const auto& rk : r.ranks) {
            residual += rk.residual_data;
            failed += rk.failed_threads;
            threads += rk.started_threads;
            out.check(rk.started_threads == rk.expected_threads,
                      fmt::format("{}: rank {} started {} of {} threads", name, rk.rank, rk.started_threads, rk.expected_threads));
        }
        out.check(residual == 0, fmt::format("{}: {} DATA messages left in queues", name, residual));
        out.check(failed == 0, fmt::format("{}: {} threads failed", name, failed));
        const auto diffs = mf::testing::diff_tables(
            mf::testing::expected_results(o.workload, r.event_log->all(), o.generator), mf::testing::to_table(r.records), 2);
        for (const auto& d : diffs) out.check(false, name + ": " + d);
        reps_clean += r.clean() && diffs.empty() ? 1 : 0;
        if (seconds_since(t0) > 20) out.check(false, name + ": slow shutdown");
    }
    out.note(fmt::format("{}/{} grid runs clean, {}/20 repetitions clean, {} threads joined", grid_clean, g_grid.size(),
                         reps_clean, threads));
    return out;
}

// ------------------------------------------------------------------ C11

Outcome operator_counts() {
    Outcome out;
    const auto gen = grid_generator();
    const std::pair<Workload, std::size_t> want[] = {{Workload::kSwa, 3}, {Workload::kYsb, 5}, {Workload::kYsbStar, 9}};
    std::string got;
    for (const auto& [w, n] : want) {
        for (bool pipe : {false, true}) {
            const auto t = mf::bench::build_workload_topology(w, gen, pipe);
            const auto count = mf::bench::operator_count_without_sink(t);
            out.check(count == n, fmt::format("{}: {} operators, expected {}", mf::bench::to_string(w), count, n));
            out.check(t.sinks().size() == 1, fmt::format("{}: {} sinks", mf::bench::to_string(w), t.sinks().size()));
            if (!pipe) got += fmt::format("{}{}={}+sink", got.empty() ? "" : " ", mf::bench::to_string(w), count);
        }
    }
    out.note(got);
    return out;
}

struct Criterion {
    int id;
    const char* title;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--duration" && i + 1 < argc) {
            g_grid_duration_s = std::stod(argv[++i]);
        } else {
            selected.insert(std::stoi(a));
        }
    }
    mf::log::set_level(mf::log::Level::kError);

    const std::vector<Criterion> criteria = {
        {1, "tag protocol round-trip", tag_protocol},
        {2, "transport FIFO and isolation", transport_fifo},
        {3, "SWA oracle", [] { return workload_oracle(Workload::kSwa); }},
        {4, "YSB oracle", [] { return workload_oracle(Workload::kYsb); }},
        {5, "YSB* oracle", [] { return workload_oracle(Workload::kYsbStar); }},
        {6, "pipelining transparency and effect", pipelining},
        {7, "windowed timestamp law", timestamp_law},
        {8, "pre-aggregation invariance", preaggregation},
        {9, "sustainable-throughput search", st_search},
        {10, "clean shutdown", clean_shutdown},
        {11, "operator-count structure", operator_counts},
    };

    int failed = 0;
    for (const auto& c : criteria) {
        if (!selected.empty() && !selected.count(c.id)) continue;
        const auto start = Clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.check(false, fmt::format("exception: {}", e.what()));
        }
        std::string detail;
        for (const auto& n : o.notes) detail += (detail.empty() ? "" : "; ") + n;
        std::cout << fmt::format("{} C{:<2} {} ({:.1f} s){}{}\n", o.pass ? "PASS" : "FAIL", c.id, c.title,
                                 seconds_since(start), detail.empty() ? "" : ": ", detail);
        for (const auto& f : o.failures) std::cout << "      - " << f << '\n';
        std::cout.flush();
        failed += o.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
