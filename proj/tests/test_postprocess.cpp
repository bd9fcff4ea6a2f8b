#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "gridflow/error.hpp"
#include "gridflow/postprocess.hpp"
#include "gridflow/reduce.hpp"
#include "gridflow/solver.hpp"

using namespace gridflow;

namespace {

// s* -> v, v <-> w, w -> d
QcqpInstance pair_instance(double demand) {
  QcqpInstance q;
  q.num_nodes = 4;
  q.source = 0;
  q.arcs = {{0, 1, 1, 0, 10, 1, 0}, {1, 2, 1, 0, 10, 0, 0}, {2, 1, 1, 0, 10, 0, 0}, {2, 3, 1, 0, 10, 0, 0}};
  q.sinks = {3};
  q.demand = {demand};
  return q;
}

FlowPoint flows(std::vector<double> x, std::vector<double> y) { return {std::move(x), std::move(y)}; }

}  // namespace

TEST(RoundWaste, WasteFreeUnchanged) {
  auto q = fixtures::two_arc_path(0.1, 0.5);
  double x = 0.7;
  double y2 = x - 0.1 * x * x;
  auto z = flows({x, x}, {x, y2});
  q.demand = {y2};
  EXPECT_EQ(round_waste(q, z), z);
  EXPECT_LE(max_waste(q, z), 1e-12);
}

TEST(RoundWaste, ArcWasteOnTwoArcPath) {
  auto q = fixtures::two_arc_path(0.1, 0.8);
  RoundStats st;
  auto r = round_waste(q, flows({1, 1}, {1, 0.8}), &st);
  const double want = (1 - std::sqrt(0.68)) / 0.2;
  EXPECT_NEAR(r.x[0], want, 1e-12);
  EXPECT_NEAR(r.x[1], want, 1e-12);
  EXPECT_NEAR(r.y[0], want, 1e-12);
  EXPECT_NEAR(r.y[1], 0.8, 1e-12);
  EXPECT_NEAR(want, 0.8769, 1e-4);
  EXPECT_GE(st.events, 1);
}

TEST(RoundWaste, NodeWaste) {
  auto q = fixtures::two_arc_path(0.0, 0.6);
  auto r = round_waste(q, flows({1, 0.6}, {1, 0.6}));
  EXPECT_NEAR(r.x[0], 0.6, 1e-12);
  EXPECT_NEAR(r.y[0], 0.6, 1e-12);
  EXPECT_NEAR(r.x[1], 0.6, 1e-12);
}

TEST(RoundWaste, RandomFeasiblePoints) {
  std::mt19937_64 rng(77);
  for (int rep = 0; rep < 15; ++rep) {
    auto q = fixtures::random_qcqp(rng, 3 + rep % 2);
    auto z = fixtures::feasible_with_waste(rng, q);
    ASSERT_LE(evaluate(q, z).max_residual(), 1e-12);
    RoundStats st;
    auto r = round_waste(q, z, &st);
    for (int a = 0; a < q.num_arcs(); ++a) {
      EXPECT_LE(r.x[a], z.x[a]);
      EXPECT_LE(r.y[a], z.y[a]);
    }
    EXPECT_LE(objective(q, r), objective(q, z));
    EXPECT_LE(max_waste(q, r), 1e-9);
    EXPECT_LE(evaluate(q, r).max_residual(), 1e-9);
    EXPECT_LE(st.events, 2 * q.num_arcs() + q.num_nodes);
  }
}

TEST(RoundWaste, RejectsInfeasibleInput) {
  auto q = fixtures::two_arc_path(0.0, 0.6);
  EXPECT_THROW(round_waste(q, flows({1, 0.2}, {1, 0.2})), PreconditionError);
}

TEST(Merge, OpposingFlowsCancel) {
  auto q = pair_instance(2);
  auto r = merge_antiparallel(q, flows({7, 5, 3, 2}, {7, 5, 3, 2}));
  EXPECT_DOUBLE_EQ(r.x[1], 2);
  EXPECT_DOUBLE_EQ(r.y[1], 2);
  EXPECT_EQ(r.x[2], 0);
  EXPECT_EQ(r.y[2], 0);
}

TEST(Merge, OneDirectionZeroIsUnchanged) {
  auto q = pair_instance(2);
  auto z = flows({5, 5, 0, 2}, {5, 5, 0, 2});
  EXPECT_EQ(merge_antiparallel(q, z), z);
}

TEST(Merge, TieZeroesBoth) {
  auto q = pair_instance(2);
  auto r = merge_antiparallel(q, flows({6, 4, 4, 2}, {6, 4, 4, 2}));
  for (int a : {1, 2}) {
    EXPECT_EQ(r.x[a], 0);
    EXPECT_EQ(r.y[a], 0);
  }
}

TEST(Merge, RandomPointsNeverWorsen) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 15; ++rep) {
    auto q = fixtures::random_qcqp(rng, 4);
    auto z = fixtures::feasible_with_waste(rng, q);
    auto r = merge_antiparallel(q, z);
    EXPECT_LE(objective(q, r), objective(q, z) + 1e-12);
    auto before = evaluate(q, z).residuals, after = evaluate(q, r).residuals;
    for (std::size_t i = 0; i < before.size(); ++i) EXPECT_LE(after[i], std::max(before[i], 0.0) + 1e-12);
    for (auto [a, b] : antiparallel_pairs(q)) EXPECT_FALSE(r.x[a] > 0 && r.x[b] > 0);
  }
}

TEST(DeleteAntiparallel, BenchRule) {
  auto q = pair_instance(2);
  auto r = delete_antiparallel(q, flows({7, 5, 3, 2}, {7, 5, 3, 2}));
  EXPECT_EQ(r.x[1], 5);
  EXPECT_EQ(r.x[2], 0);
}

TEST(DynamicFlowExtraction, ZeroDemand) {
  Upgg g;
  g.nodes = {{"a", PiecewiseConstantFn::constant(0.0, 1.0), fixtures::rate(1.0, PiecewiseConstantFn::constant(1.0, 1.0))},
             {"b", PiecewiseConstantFn::constant(0.0, 1.0), {}}};
  g.edges = {{"a-b", 0, 1, 1.0, 0.0}};
  BuiltQcqp b = build_qcqp(g);
  auto f = to_dynamic_flow(b, FlowPoint::zeros(b.qcqp.num_arcs()));
  for (const auto& iv : f.intervals) EXPECT_TRUE(iv.arcs.empty());
  EXPECT_EQ(f.objective, 0.0);
  EXPECT_EQ(dynamic_flow_cost(g, f), 0.0);
}

TEST(DynamicFlowExtraction, GreedySchedule) {
  Spgg g = fixtures::greedy_spgg();
  BuiltQcqp b = build_qcqp(g);
  auto r = barrier_solve(b.qcqp, 1e-7);
  auto f = to_dynamic_flow(b, r.flow);
  ASSERT_EQ(f.intervals.size(), 1u);
  EXPECT_NEAR(f.intervals[0].production.at("s1"), 0.5, 1e-4);
  EXPECT_NEAR(f.intervals[0].production.at("s2"), 0.5, 1e-4);
  EXPECT_NEAR(dynamic_flow_cost(g, f), 3.0, 1e-3);
  EXPECT_LE(dynamic_flow_cost(g, f), f.objective + 1e-9);
  auto chk = check_dynamic_flow(g, f);
  EXPECT_TRUE(chk.ok) << (chk.problems.empty() ? "" : chk.problems[0]);
}

TEST(DynamicFlowExtraction, TwoIntervalsUseTheirOwnCopies) {
  Upgg g = fixtures::figure_two_node(true);
  BuiltQcqp b = build_qcqp(g);
  auto r = feasible_eps_solution(b.qcqp, 1e-4);
  auto f = to_dynamic_flow(b, r.flow);
  ASSERT_EQ(f.intervals.size(), 2u);
  EXPECT_DOUBLE_EQ(f.intervals[0].end, 0.5);
  const FlowPoint p = round_waste(b.qcqp, merge_antiparallel(b.qcqp, r.flow));
  for (std::size_t i = 0; i < 2; ++i) {
    double want = 0.0, got = 0.0;
    for (int a = 0; a < b.qcqp.num_arcs(); ++a) {
      const Tag& t = b.prov.arcs[a];
      if (t.origin == Origin::GridEdge && t.interval == static_cast<int>(i)) want += p.x[a];
    }
    for (const auto& arc : f.intervals[i].arcs) {
      EXPECT_EQ(arc.edge, 0);
      got += arc.x;
    }
    EXPECT_DOUBLE_EQ(got, want);
  }
  auto chk = check_dynamic_flow(g, f);
  EXPECT_TRUE(chk.ok) << (chk.problems.empty() ? "" : chk.problems[0]);
  EXPECT_LE(dynamic_flow_cost(g, f), f.objective + 1e-9);
  EXPECT_LE(f.objective, r.objective + 1e-12);
}

TEST(DynamicFlowCheck, DetectsViolations) {
  Spgg g = fixtures::greedy_spgg();
  DynamicFlow f;
  f.intervals.push_back({0.0, 2.0, {{0, 0, 1.0, 1.0}}, {{"s1", 1.0}}});
  EXPECT_TRUE(check_dynamic_flow(g, f).ok);
  f.intervals[0].arcs[0].x = 1.5;  // over capacity
  f.intervals[0].arcs[0].y = 1.5;
  EXPECT_FALSE(check_dynamic_flow(g, f).ok);
  f.intervals[0].arcs[0] = {0, 0, 0.4, 0.4};  // demand unmet
  EXPECT_FALSE(check_dynamic_flow(g, f).ok);
}

TEST(IntegrateFromZero, ExtendsPastDomain) {
  PiecewiseConstantFn pi({1.0}, {1.0, 3.0}, 2.0);
  EXPECT_DOUBLE_EQ(integrate_from_zero(pi, 1.5), 2.5);
  EXPECT_DOUBLE_EQ(integrate_from_zero(pi, 3.0), 7.0);
  EXPECT_DOUBLE_EQ(integrate_from_zero(pi, 0.0), 0.0);
}
