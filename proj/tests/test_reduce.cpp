#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "gridflow/bench.hpp"
#include "gridflow/error.hpp"
#include "gridflow/reduce.hpp"

using namespace gridflow;

namespace {

// One source with two cost pieces feeding one sink over one arc.
Spgg source_sink(double horizon) {
  Spgg g;
  g.horizon = horizon;
  g.nodes = {"s", "d"};
  g.arcs = {{"s-d", 0, 1, 2.0, 0.1}};
  g.sources = {{0, 4.0, PiecewiseConstantFn({1.0}, {1.0, 2.0}, 4.0)}};
  g.sinks = {{1, PiecewiseConstantFn::constant(0.5, horizon)}};
  return g;
}

}  // namespace

TEST(Simplify, FigureInstance) {
  Simplified s = simplify_constant(fixtures::figure_two_node(false));
  std::multiset<std::string> names(s.spgg.nodes.begin(), s.spgg.nodes.end());
  EXPECT_EQ(names, (std::multiset<std::string>{"u", "v", "u^s", "u^d", "v^I0", "v^I1", "v^d"}));
  EXPECT_EQ(s.spgg.arcs.size(), 7u);
  EXPECT_EQ(s.spgg.sources.size(), 3u);
  EXPECT_EQ(s.spgg.sinks.size(), 2u);
  EXPECT_TRUE(validate(s.spgg).ok());
  // rate pieces become sources with capacity |I| and r = 0
  for (std::size_t a = 0; a < s.spgg.arcs.size(); ++a)
    if (s.prov.arcs[a].origin == Origin::NodeSource && s.prov.arcs[a].source_piece >= 0) {
      EXPECT_DOUBLE_EQ(s.spgg.arcs[a].capacity, 0.5);
      EXPECT_EQ(s.spgg.arcs[a].resistance, 0.0);
    }
}

TEST(Simplify, EmptyAfterPruning) {
  Upgg g;
  g.nodes = {{"lonely", PiecewiseConstantFn::constant(0.0, 1.0), {}}};
  Simplified s = simplify_constant(g);
  EXPECT_TRUE(s.spgg.nodes.empty());
  EXPECT_TRUE(s.spgg.arcs.empty());
}

TEST(Simplify, SinkCapacityIsTwicePeak) {
  Upgg g;
  g.nodes = {{"a", PiecewiseConstantFn::constant(0.0, 1.0), fixtures::rate(5.0, PiecewiseConstantFn::constant(1.0, 5.0))},
             {"b", PiecewiseConstantFn::constant(3.0, 1.0), {}}};
  g.edges = {{"a-b", 0, 1, 4.0, 0.0}};
  Simplified s = simplify_constant(g);
  bool seen = false;
  for (std::size_t a = 0; a < s.spgg.arcs.size(); ++a)
    if (s.prov.arcs[a].origin == Origin::NodeSink) {
      EXPECT_DOUBLE_EQ(s.spgg.arcs[a].capacity, 6.0);
      seen = true;
    }
  EXPECT_TRUE(seen);
}

TEST(Simplify, UnreachableDemand) {
  Upgg g;
  g.nodes = {{"a", PiecewiseConstantFn::constant(0.0, 1.0), fixtures::rate(5.0, PiecewiseConstantFn::constant(1.0, 5.0))},
             {"b", PiecewiseConstantFn::constant(1.0, 1.0), {}},
             {"c", PiecewiseConstantFn::constant(1.0, 1.0), {}}};
  g.edges = {{"a-b", 0, 1, 4.0, 0.0}};
  try {
    simplify_constant(g);
    FAIL();
  } catch (const ReductionError& e) {
    EXPECT_NE(std::string(e.what()).find("c"), std::string::npos);
  }
}

TEST(TimeExpand, FigureCounts) {
  Spgg g = source_sink(1.0);
  Expanded k1 = time_expand(g, TimeGrid({0.0, 1.0}));
  EXPECT_EQ(k1.qcqp.num_nodes, 5);
  EXPECT_EQ(k1.qcqp.num_arcs(), 5);
  Expanded k2 = time_expand(g, TimeGrid({0.0, 0.5, 1.0}));
  EXPECT_EQ(k2.qcqp.num_nodes, 7);
  EXPECT_EQ(k2.qcqp.num_arcs(), 8);
  auto c = expected_counts(g, 2);
  EXPECT_EQ(c.nodes, 7);
  EXPECT_EQ(c.arcs, 8);
}

TEST(TimeExpand, ArcParameters) {
  Spgg g = source_sink(1.0);
  Expanded e = time_expand(g, TimeGrid({0.0, 0.25, 1.0}));
  const double t_min = 0.25;
  for (int a = 0; a < e.qcqp.num_arcs(); ++a) {
    const auto& arc = e.qcqp.arcs[a];
    const Tag& t = e.prov.arcs[a];
    double len = t.piece == 0 ? 1.0 : 3.0;
    switch (t.origin) {
      case Origin::Production:
        EXPECT_EQ(arc.tail, e.qcqp.source);
        EXPECT_DOUBLE_EQ(arc.u, len / t_min);
        EXPECT_DOUBLE_EQ(arc.c_lin, (t.piece == 0 ? 1.0 : 2.0) * t_min);
        EXPECT_EQ(arc.rho, 1.0);
        break;
      case Origin::Delegation:
        EXPECT_DOUBLE_EQ(arc.rho, t_min / e.grid.length(t.interval));
        EXPECT_DOUBLE_EQ(arc.u, len / t_min);
        EXPECT_EQ(arc.c_lin, 0.0);
        if (t.interval == 0) EXPECT_EQ(arc.rho, 1.0);
        break;
      case Origin::GridEdge:
        EXPECT_DOUBLE_EQ(arc.r, 0.1);
        EXPECT_DOUBLE_EQ(arc.u, 2.0);
        EXPECT_EQ(arc.c_lin, 0.0);
        break;
      default:
        ADD_FAILURE() << "unexpected arc origin";
    }
  }
  EXPECT_EQ(e.qcqp.demand, (std::vector<double>{0.5, 0.5}));
}

TEST(TimeExpand, CountFormulaOnRandomGraphs) {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 10; ++rep) {
    Upgg u = generate_bench_instance(Family::Cycle, 3 + rep % 4, rng());
    Simplified s = simplify_constant(u);
    Expanded e = time_expand(s.spgg, s.grid);
    auto c = expected_counts(s.spgg, s.grid.size());
    EXPECT_EQ(e.qcqp.num_nodes, c.nodes);
    EXPECT_EQ(e.qcqp.num_arcs(), c.arcs);
    EXPECT_NO_THROW(validate_qcqp(e.qcqp));
  }
}

TEST(BuildQcqp, FigureInstanceTwoIntervals) {
  BuiltQcqp b = build_qcqp(fixtures::figure_two_node(true));
  EXPECT_EQ(b.grid.size(), 2u);
  EXPECT_EQ(b.qcqp.num_nodes, 19);
  EXPECT_EQ(b.qcqp.num_arcs(), 26);
}

TEST(BuildQcqp, GreedyProductionArcs) {
  const double L = 10.0;
  BuiltQcqp b = build_qcqp(fixtures::greedy_spgg(L));
  std::vector<std::pair<double, double>> s1, s2;
  for (int a = 0; a < b.qcqp.num_arcs(); ++a) {
    const Tag& t = b.prov.arcs[a];
    if (t.origin != Origin::Production) continue;
    const auto& arc = b.qcqp.arcs[a];
    EXPECT_EQ(arc.c_quad, 0.0);
    (t.source == 0 ? s1 : s2).emplace_back(arc.u, arc.c_lin);
  }
  EXPECT_EQ(s1, (std::vector<std::pair<double, double>>{{0.5, 2.0}, {0.5, 2.0 * L}}));
  EXPECT_EQ(s2, (std::vector<std::pair<double, double>>{{1.0, 4.0}}));
}

TEST(BuildQcqp, SelfSuppliedZeroDemandIsEmpty) {
  Upgg g;
  g.nodes = {{"v", PiecewiseConstantFn::constant(0.0, 1.0), fixtures::rate(1.0, PiecewiseConstantFn::constant(1.0, 1.0))}};
  BuiltQcqp b = build_qcqp(g);
  EXPECT_EQ(b.qcqp.num_arcs(), 0);
}

TEST(BuildQcqp, LossFunctionsAreProper) {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 5; ++rep) {
    BuiltQcqp b = build_qcqp(generate_bench_instance(Family::CircularLadder, 6, rng()));
    for (const auto& a : b.qcqp.arcs) {
      double prev = -1.0;
      for (double x : {0.0, a.u / 2, a.u}) {
        double g = gamma(a, x);
        EXPECT_GE(g, 0.0);
        EXPECT_LE(g, x + 1e-15);
        EXPECT_GT(g, prev);
        EXPECT_GT(gamma_prime(a, x), 0.0);
        prev = g;
      }
    }
  }
}

TEST(BuildQcqp, ProvenanceIsABijection) {
  for (const Upgg& g : {fixtures::figure_two_node(true), generate_bench_instance(Family::Complete, 4, 3)}) {
    BuiltQcqp b = build_qcqp(g);
    ASSERT_EQ(static_cast<int>(b.prov.arcs.size()), b.qcqp.num_arcs());
    ASSERT_EQ(static_cast<int>(b.prov.nodes.size()), b.qcqp.num_nodes);
    std::set<Tag> arcs(b.prov.arcs.begin(), b.prov.arcs.end()), nodes(b.prov.nodes.begin(), b.prov.nodes.end());
    EXPECT_EQ(arcs.size(), b.prov.arcs.size());
    EXPECT_EQ(nodes.size(), b.prov.nodes.size());
    // each surviving (edge, direction, interval) triple appears once
    std::set<std::tuple<int, int, int>> triples;
    for (const Tag& t : b.prov.arcs)
      if (t.origin == Origin::GridEdge) EXPECT_TRUE(triples.insert({t.edge, t.direction, t.interval}).second);
  }
}
