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

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "meshflow/ops/builder.hpp"
#include "meshflow/ops/factory.hpp"
#include "meshflow/ops/stateful.hpp"
#include "meshflow/ops/stateless.hpp"
#include "meshflow/ops/static_table.hpp"

namespace mf = meshflow;
namespace ops = meshflow::ops;

namespace {

mf::OperatorContext context(int world_size, int outdegree, int indegree = 1, int rank = 0) {
    mf::OperatorContext c;
    c.world_size = world_size;
    c.outdegree = outdegree;
    c.indegree = indegree;
    c.rank = rank;
    return c;
}

mf::Event ev(std::uint64_t key, std::uint64_t value, std::uint64_t t) { return mf::Event{key, value, t, {}}; }

// Index of the only non-empty slot, or -1.
int only_slot(const mf::OutputSlots& s) {
    int found = -1;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i].empty()) continue;
        if (found != -1) return -2;
        found = static_cast<int>(i);
    }
    return found;
}

}  // namespace

TEST(Routing, SlotFormulas) {
    const auto ctx = context(4, 2);
    EXPECT_EQ(ops::Router(ops::RoutingKind::kShardByValue, ctx).slot(ev(9, 7, 0), 1), 1 * 4 + 3u);
    EXPECT_EQ(ops::Router(ops::RoutingKind::kShardByKey, ctx).slot(ev(9, 7, 0)), 1u);
    EXPECT_EQ(ops::Router(ops::RoutingKind::kShardByWindow, ctx, 100).slot(ev(9, 7, 650)), 2u);
    auto pinned = context(4, 2, 1, 3);
    EXPECT_EQ(ops::Router(ops::RoutingKind::kLocalOnly, pinned).slot(ev(9, 7, 0), 1), 7u);
    pinned.pipelined = true;
    EXPECT_EQ(ops::Router(ops::RoutingKind::kShardByValue, pinned).slot(ev(9, 4, 0)), 3u);
    EXPECT_THROW(ops::Router(ops::RoutingKind::kShardByWindow, ctx), std::invalid_argument);
    EXPECT_THROW(ops::parse_routing("random"), std::invalid_argument);
}

TEST(Map, DoublesAndShardsOnTheResult) {
    const auto ctx = context(4, 1);
    ops::MapOperator map(ctx, ops::ValueFunction(ops::ValueFunction::Fn::kMul, 2), ops::RoutingKind::kShardByValue);
    mf::OutputSlots out(ctx.slot_count());
    map.on_data({ev(5, 3, 123)}, {}, out);
    ASSERT_EQ(only_slot(out), 2);
    EXPECT_EQ(out[2][0], ev(5, 6, 123));

    mf::OutputSlots none(ctx.slot_count());
    map.on_data({}, {}, none);
    EXPECT_TRUE(none.empty());
}

TEST(Expression, JsonAndArithmetic) {
    const auto p = ops::Predicate::from_json({{"field", "key"}, {"cmp", "ge"}, {"arg", 10}});
    EXPECT_TRUE(p(ev(10, 0, 0)));
    EXPECT_FALSE(p(ev(9, 0, 0)));
    EXPECT_EQ(ops::Predicate::from_json(p.to_json()).to_json(), p.to_json());
    EXPECT_THROW(ops::Predicate::from_json({{"field", "colour"}, {"cmp", "eq"}, {"arg", 1}}), std::invalid_argument);
    EXPECT_EQ(ops::ValueFunction::from_json({{"fn", "add"}, {"arg", 5}})(1), 6u);
    EXPECT_EQ(ops::ValueFunction(ops::ValueFunction::Fn::kMod, 4)(11), 3u);
    EXPECT_THROW(ops::ValueFunction(ops::ValueFunction::Fn::kMod, 0)(11), std::domain_error);
}

TEST(Filter, AlwaysAndNever) {
    const auto ctx = context(2, 1);
    ops::FilterOperator all(ctx, ops::Predicate::always(), ops::RoutingKind::kShardByValue);
    ops::FilterOperator none(ctx, ops::Predicate::never(), ops::RoutingKind::kShardByValue);
    mf::OutputSlots a(2);
    mf::OutputSlots b(2);
    all.on_data({ev(1, 1, 1), ev(1, 2, 2)}, {}, a);
    none.on_data({ev(1, 1, 1), ev(1, 2, 2)}, {}, b);
    EXPECT_EQ(a.event_count(), 2u);
    EXPECT_EQ(a[1][0].event_time, 1u);
    EXPECT_TRUE(b.empty());
    // Rejection by a filter is selection, not loss.
    EXPECT_EQ(none.counters().snapshot().dropped, 0u);
}

TEST(Split, BranchTimesWorldSizePlusValue) {
    const auto ctx = context(4, 2);
    // Conditions test the key so the value stays free for routing.
    ops::SplitOperator by_key(ctx,
                              {ops::Predicate(ops::Field::kKey, ops::Predicate::Cmp::kEq, 1),
                               ops::Predicate(ops::Field::kKey, ops::Predicate::Cmp::kEq, 0)},
                              ops::RoutingKind::kShardByValue);
    mf::OutputSlots click(8);
    by_key.on_data({ev(1, 7, 0)}, {}, click);
    EXPECT_EQ(only_slot(click), 3);
    mf::OutputSlots view(8);
    by_key.on_data({ev(0, 7, 0)}, {}, view);
    EXPECT_EQ(only_slot(view), 7);

    mf::OutputSlots rest(8);
    by_key.on_data({ev(2, 7, 0)}, {}, rest);
    EXPECT_TRUE(rest.empty());
    EXPECT_EQ(by_key.counters().snapshot().dropped, 1u);

    ops::SplitOperator overlap(ctx, {ops::Predicate::always(), ops::Predicate::always()}, ops::RoutingKind::kShardByValue);
    mf::OutputSlots both(8);
    overlap.on_data({ev(0, 5, 0)}, {}, both);
    EXPECT_EQ(only_slot(both), 1);
    EXPECT_EQ(overlap.ambiguous(), 1u);
}

TEST(StaticJoin, ReplacesKeyAndDropsMisses) {
    const auto ctx = context(1, 1);
    ops::StaticJoinOperator join(ctx, ops::StaticTable(std::unordered_map<std::uint64_t, std::uint64_t>{{10, 1}}), ops::RoutingKind::kShardByValue);
    mf::OutputSlots out(1);
    join.on_data({ev(10, 4, 77), ev(99, 4, 78)}, {}, out);
    ASSERT_EQ(out[0].size(), 1u);
    EXPECT_EQ(out[0][0], ev(1, 4, 77));
    EXPECT_EQ(join.counters().snapshot().dropped, 1u);
}

TEST(StaticTable, CsvRoundTrip) {
    const auto path = std::filesystem::temp_directory_path() / "meshflow_table_test.csv";
    ops::StaticTable t({{1, 2}, {30, 4}});
    t.save_csv(path.string());
    const auto back = ops::StaticTable::load_csv(path.string());
    EXPECT_EQ(back.size(), 2u);
    EXPECT_EQ(back.lookup(30), 4u);
    EXPECT_EQ(back.lookup(31), std::nullopt);
    {
        std::ofstream bad(path);
        bad << "ad,campaign\n5,x\n";
    }
    EXPECT_THROW(ops::StaticTable::load_csv(path.string()), std::runtime_error);
    std::filesystem::remove(path);
    EXPECT_EQ(ops::StaticTable::from_json(t.to_json()).lookup(1), 2u);
}

TEST(WindowAggregate, ReduceSumsIntoOneResult) {
    auto ctx = context(1, 1);
    ops::WindowAggregateOperator reduce(
        ctx, {ops::AggregateFunction(ops::AggregateFunction::Kind::kSum), ops::AggregateStage::kSingle,
              ops::Grouping::kAll, 10'000});
    mf::OutputSlots out(1);
    reduce.on_data({ev(3, 2, 1000), ev(4, 3, 2000)}, {}, out);
    EXPECT_TRUE(out.empty());
    reduce.on_watermark(0, out);
    ASSERT_EQ(out[0].size(), 1u);
    EXPECT_EQ(out[0][0].value, 5u);
    EXPECT_EQ(out[0][0].event_time, 2000u);
    EXPECT_EQ(reduce.open_windows(), 0u);
}

TEST(WindowAggregate, CountPerKey) {
    auto ctx = context(1, 1);
    ops::WindowAggregateOperator agg(ctx, {ops::AggregateFunction(ops::AggregateFunction::Kind::kCount),
                                           ops::AggregateStage::kSingle, ops::Grouping::kByKey, 10'000});
    mf::OutputSlots out(1);
    agg.on_data({ev(1, 1, 1000), ev(1, 1, 2000), ev(2, 1, 3000)}, {}, out);
    agg.on_watermark(0, out);
    ASSERT_EQ(out[0].size(), 2u);
    auto rows = out[0];
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
    EXPECT_EQ(rows[0], ev(1, 2, 2000));
    EXPECT_EQ(rows[1], ev(2, 1, 3000));

    mf::OutputSlots empty(1);
    agg.on_watermark(5, empty);
    EXPECT_TRUE(empty.empty());
}

TEST(WindowAggregate, LateEventsAreCountedNotEmitted) {
    auto ctx = context(1, 1);
    ops::WindowAggregateOperator agg(ctx, {ops::AggregateFunction(ops::AggregateFunction::Kind::kCount),
                                           ops::AggregateStage::kSingle, ops::Grouping::kByKey, 100});
    mf::OutputSlots out(1);
    agg.on_watermark(2, out);
    agg.on_data({ev(1, 1, 150)}, {}, out);
    agg.on_watermark(3, out);
    EXPECT_TRUE(out.empty());
    EXPECT_EQ(agg.counters().snapshot().late, 1u);
}

TEST(WindowAggregate, GlobalStageMergesPartials) {
    auto ctx = context(2, 1);
    const ops::AggregateFunction sum(ops::AggregateFunction::Kind::kSum);
    ops::WindowAggregateOperator pre0(ctx, {sum, ops::AggregateStage::kPre, ops::Grouping::kByKey, 100});
    auto ctx1 = context(2, 1, 1, 1);
    ops::WindowAggregateOperator pre1(ctx1, {sum, ops::AggregateStage::kPre, ops::Grouping::kByKey, 100});
    ops::WindowAggregateOperator global(context(2, 1, 1), {sum, ops::AggregateStage::kGlobal, ops::Grouping::kByKey, 100});
    mf::OutputSlots a(2);
    mf::OutputSlots b(2);
    pre0.on_data({ev(1, 4, 10)}, {}, a);
    pre1.on_data({ev(1, 6, 30)}, {}, b);
    pre0.on_watermark(0, a);
    pre1.on_watermark(0, b);
    // Window 0 partials are routed to rank 0 % 2.
    ASSERT_EQ(a[0].size(), 1u);
    ASSERT_EQ(b[0].size(), 1u);
    mf::OutputSlots out(2);
    global.on_data(std::move(a[0]), {}, out);
    global.on_data(std::move(b[0]), {}, out);
    global.on_watermark(0, out);
    ASSERT_EQ(out[1].size(), 1u);
    EXPECT_EQ(out[1][0], ev(1, 10, 30));
}

TEST(WindowAggregate, NonMergeableFunctionsStaySingleStage) {
    const ops::AggregateFunction last(ops::AggregateFunction::Kind::kLast);
    EXPECT_FALSE(last.mergeable());
    EXPECT_THROW(last.merge(1, 2), std::logic_error);
    EXPECT_THROW(ops::WindowAggregateOperator(context(1, 1), {last, ops::AggregateStage::kGlobal, ops::Grouping::kByKey, 100}),
                 std::invalid_argument);
    ops::TopologyBuilder b;
    EXPECT_THROW(b.preaggregate_then_global("agg", {{"function", "last"}, {"window_ms", 100}}), mf::TopologyError);
    EXPECT_NO_THROW(b.preaggregate_then_global("agg", {{"function", "max"}, {"window_ms", 100}}));
}

TEST(WindowJoin, RatioInMicroUnits) {
    auto ctx = context(1, 1, 2);
    ops::WindowJoinOperator fresh(ctx, {ops::WindowJoinOperator::Combine::kRatioMicro, 10'000});
    mf::OutputSlots o(1);
    fresh.on_data({ev(1, 3, 500), ev(2, 1, 900), ev(3, 4, 10)}, {0, 0, 0}, o);
    fresh.on_data({ev(1, 6, 700), ev(3, 0, 100)}, {1, 1, 0}, o);
    fresh.on_watermark(0, o);
    ASSERT_EQ(o[0].size(), 1u);
    EXPECT_EQ(o[0][0], ev(1, 500'000, 700));
    EXPECT_EQ(fresh.unmatched(), 1u);
    EXPECT_EQ(fresh.counters().snapshot().dropped, 1u);
}

TEST(WindowJoin, RatioArithmetic) {
    EXPECT_EQ(ops::ratio_micro(3, 6), 500'000u);
    EXPECT_EQ(ops::ratio_micro(1, 3), 333'333u);
    EXPECT_EQ(ops::ratio_micro(5, 0), std::nullopt);
    EXPECT_EQ(ops::ratio_micro(~0ull, 1), std::nullopt);
    EXPECT_EQ(ops::ratio_micro(~0ull, 1'000'000), ~0ull);
}

TEST(Factory, BuildsFromParams) {
    mf::OperatorDescriptor d;
    d.kind = mf::OperatorKind::kMap;
    d.predecessors = {0};
    d.successors = {2};
    d.params = {{"fn", {{"fn", "add"}, {"arg", 1}}}};
    EXPECT_NE(ops::make_standard_operator(d, context(1, 1)), nullptr);
    d.kind = mf::OperatorKind::kSplit;
    d.successors = {2, 3};
    d.params = {{"conditions", nlohmann::json::array({ops::Predicate::always().to_json()})}};
    EXPECT_THROW(ops::make_standard_operator(d, context(1, 2)), std::invalid_argument);
    d.successors = {2};
    d.kind = mf::OperatorKind::kAggregation;
    d.params = {{"function", "median"}, {"window_ms", 10}};
    EXPECT_THROW(ops::make_standard_operator(d, context(1, 1)), std::invalid_argument);
    d.kind = mf::OperatorKind::kSink;
    EXPECT_EQ(ops::make_standard_operator(d, context(1, 1)), nullptr);
}
