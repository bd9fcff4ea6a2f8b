#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "gridflow/bench.hpp"
#include "gridflow/error.hpp"

using namespace gridflow;

TEST(Generator, CycleIsDeterministic) {
  Upgg a = generate_bench_instance(Family::Cycle, 3, 42), b = generate_bench_instance(Family::Cycle, 3, 42);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.nodes.size(), 3u);
  EXPECT_EQ(a.edges.size(), 3u);
  EXPECT_NE(a, generate_bench_instance(Family::Cycle, 3, 43));
}

TEST(Generator, FamilyShapes) {
  for (int n : {6, 8, 12}) EXPECT_EQ(generate_bench_instance(Family::CircularLadder, n, 1).edges.size(), 3u * n / 2);
  EXPECT_EQ(generate_bench_instance(Family::Complete, 5, 1).edges.size(), 10u);
  EXPECT_THROW(generate_bench_instance(Family::Cycle, 2, 1), ParameterError);
  EXPECT_THROW(generate_bench_instance(Family::CircularLadder, 7, 1), ParameterError);
  EXPECT_EQ(family_size(Family::CircularLadder, 7), 6);
  EXPECT_EQ(parse_family("circular-ladder"), Family::CircularLadder);
  EXPECT_THROW(parse_family("star"), ParameterError);
}

TEST(Generator, Laws) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Upgg g = generate_bench_instance(seed % 2 ? Family::Complete : Family::Cycle, 5, seed);
    ASSERT_TRUE(validate(g).ok());
    EXPECT_TRUE(trivial_self_supply_check(g));
    for (const auto& n : g.nodes) {
      EXPECT_EQ(n.demand.breakpoints().size(), 3u);
      EXPECT_EQ(n.demand.breakpoints(), g.nodes[0].demand.breakpoints());
      for (double v : n.demand.values()) {
        EXPECT_GE(v, 1.0);
        EXPECT_LE(v, 2.0);
      }
      EXPECT_DOUBLE_EQ(*n.supply.cumulative_cap, 2.0 * g.horizon * n.demand.supremum());
      ASSERT_EQ(n.supply.pi->pieces(), 2u);
      EXPECT_LE(n.supply.pi->value(0), n.supply.pi->value(1));
    }
    for (const auto& e : g.edges) {
      EXPECT_GE(e.capacity, 1.0);
      EXPECT_LE(e.capacity, 5.0);
      EXPECT_LE(e.resistance * e.capacity, 0.4);
    }
  }
}

TEST(Polyfit, ExactLines) {
  auto f = polyfit({0, 1, 2, 3}, {1, 3, 5, 7}, 1);
  EXPECT_NEAR(f.coef[0], 1, 1e-12);
  EXPECT_NEAR(f.coef[1], 2, 1e-12);
  auto q = polyfit({-2, -1, 0, 1, 2}, {4, 1, 0, 1, 4}, 2);
  EXPECT_NEAR(q.coef[0], 0, 1e-12);
  EXPECT_NEAR(q.coef[1], 0, 1e-12);
  EXPECT_NEAR(q.coef[2], 1, 1e-12);
  EXPECT_NEAR(q.rss, 0, 1e-18);
  auto nested = polyfit({0, 1, 2, 3, 4}, {1, 3, 5, 7, 9}, 2);
  EXPECT_LE(std::abs(nested.coef[2]), 1e-9);
}

TEST(Polyfit, RecoversQuadraticAtBenchScale) {
  std::vector<double> x, y;
  for (int n : {3, 502, 1001, 1501, 2000}) {
    x.push_back(n);
    y.push_back(3e-7 * n * n + 2e-4 * n + 0.01);
  }
  auto f = polyfit(x, y, 2);
  EXPECT_NEAR(f.coef[0], 0.01, 1e-9);
  EXPECT_NEAR(f.coef[1], 2e-4, 1e-9);
  EXPECT_NEAR(f.coef[2], 3e-7, 1e-9);
}

TEST(Polyfit, Errors) {
  EXPECT_THROW(polyfit({1, 2}, {1, 2}, 2), ParameterError);
  EXPECT_THROW(polyfit({1, 1, 1}, {1, 2, 3}, 1), NumericalError);
}

TEST(Median, IgnoresNaN) {
  EXPECT_EQ(median({3, 1, 2}), 2);
  EXPECT_EQ(median({4, 1, 2, 3}), 2.5);
  EXPECT_EQ(median({NAN, 5, 1}), 3);
  EXPECT_TRUE(std::isnan(median({NAN})));
}

TEST(Harness, SizesAndOrder) {
  BenchSpec s;
  s.n_max = 20;
  s.points = 4;
  s.reps = 3;
  auto sizes = sample_sizes(s);
  EXPECT_EQ(sizes.front(), 3);
  EXPECT_EQ(sizes.back(), 20);
  EXPECT_TRUE(std::is_sorted(sizes.begin(), sizes.end()));
  auto order = execution_order(s);
  EXPECT_EQ(order.size(), 12u);
  std::set<std::pair<int, int>> all(order.begin(), order.end());
  EXPECT_EQ(all.size(), 12u);
  EXPECT_EQ(order, execution_order(s));
  s.seed = 2;
  EXPECT_NE(order, execution_order(s));
  s.points = 1;
  EXPECT_THROW(check_spec(s), ParameterError);
  s.points = 40;
  EXPECT_THROW(sample_sizes(s), ParameterError);
}

TEST(Harness, InjectedRunnerAndFailures) {
  BenchSpec s;
  s.n_max = 9;
  s.points = 3;
  s.reps = 2;
  std::vector<int> seen;
  int calls = 0;
  auto runner = [&](const Upgg& g) {
    seen.push_back(static_cast<int>(g.nodes.size()));
    if (++calls == 2) throw NumericalError("boom");
    return RunOutcome{1e-3 * static_cast<double>(g.nodes.size() * g.nodes.size()), 1, 2};
  };
  auto r = run_bench(s, runner);
  EXPECT_EQ(r.failures, 1);
  EXPECT_EQ(seen.size(), 6u);
  int nan = 0;
  for (const auto& row : r.rows) nan += static_cast<int>(std::count_if(row.raw.begin(), row.raw.end(), [](double v) { return std::isnan(v); }));
  EXPECT_EQ(nan, 1);
  ASSERT_EQ(r.fits.size(), 2u);
  EXPECT_NEAR(r.fits[1].second.coef[2], 1e-3, 1e-9);
  std::string csv = bench_csv(s, r);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "family,n,nodes,arcs,median_s,raw_times");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 5);
    EXPECT_EQ(std::count(line.begin(), line.end(), ';'), 1);
  }
  EXPECT_EQ(rows, 3);
  EXPECT_NE(fit_summary(r).find("failed runs: 1"), std::string::npos);
}

TEST(Harness, SmokeRun) {
  BenchSpec s;
  s.n_max = 20;
  s.points = 3;
  s.reps = 1;
  auto r = run_bench(s);
  EXPECT_EQ(r.failures, 0);
  ASSERT_EQ(r.rows.size(), 3u);
  for (std::size_t i = 1; i < r.rows.size(); ++i) EXPECT_GT(r.rows[i].arcs, r.rows[i - 1].arcs);
  for (const auto& row : r.rows) EXPECT_GT(row.median_s, 0.0);
}

TEST(Pipeline, BenchRuleFlowIsClean) {
  auto res = bench_pipeline(generate_bench_instance(Family::CircularLadder, 6, 3), 1e-2, {});
  EXPECT_GT(res.qcqp_arcs, 0);
  for (const auto& iv : res.flow.intervals) {
    std::set<int> edges;
    for (const auto& a : iv.arcs) EXPECT_TRUE(edges.insert(a.edge).second) << "both directions used";
  }
}
