#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "gridflow/grid.hpp"
#include "gridflow/pwfun.hpp"
#include "gridflow/qcqp.hpp"
#include "gridflow/solver.hpp"

namespace fixtures {

using namespace gridflow;

inline Supply cumulative(double cap, PiecewiseConstantFn pi) {
  Supply s;
  s.cumulative_cap = cap;
  s.pi = std::move(pi);
  return s;
}

inline Supply rate(double cap, PiecewiseConstantFn pi) {
  Supply s;
  s.rate_cap = cap;
  s.pi = std::move(pi);
  return s;
}

// Two suppliers feeding one consumer; s1 turns expensive (L) after one unit.
inline Spgg greedy_spgg(double L = 10.0) {
  Spgg g;
  g.horizon = 2.0;
  g.nodes = {"s1", "s2", "d"};
  g.arcs = {{"s1-d", 0, 2, 1.0, 0.0}, {"s2-d", 1, 2, 0.5, 0.0}};
  g.sources = {{0, 2.0, PiecewiseConstantFn({1.0}, {1.0, L}, 2.0)},
               {1, 2.0, PiecewiseConstantFn::constant(2.0, 2.0)}};
  g.sinks = {{2, PiecewiseConstantFn::constant(1.0, 2.0)}};
  return g;
}

// Same example as an undirected grid.
inline Upgg greedy_upgg(double L = 10.0) {
  Upgg g;
  g.horizon = 2.0;
  GridNode s1{"s1", PiecewiseConstantFn::constant(0.0, 2.0), cumulative(2.0, PiecewiseConstantFn({1.0}, {1.0, L}, 2.0))};
  GridNode s2{"s2", PiecewiseConstantFn::constant(0.0, 2.0), cumulative(2.0, PiecewiseConstantFn::constant(2.0, 2.0))};
  GridNode d{"d", PiecewiseConstantFn::constant(1.0, 2.0), {}};
  g.nodes = {s1, s2, d};
  g.edges = {{"s1-d", 0, 2, 1.0, 0.0}, {"s2-d", 1, 2, 0.5, 0.0}};
  return g;
}

// Two-node figure instance: u cumulative, v rate-capped with one pi breakpoint,
// both with demand. `demand_bp` adds a demand breakpoint (k = 2).
inline Upgg figure_two_node(bool demand_bp) {
  Upgg g;
  g.horizon = 1.0;
  PiecewiseConstantFn du = demand_bp ? PiecewiseConstantFn({0.5}, {0.2, 0.4}, 1.0) : PiecewiseConstantFn::constant(0.3, 1.0);
  PiecewiseConstantFn dv = PiecewiseConstantFn::constant(0.3, 1.0);
  g.nodes = {{"u", du, cumulative(2.0, PiecewiseConstantFn({1.0}, {1.0, 3.0}, 2.0))},
             {"v", dv, rate(1.0, PiecewiseConstantFn({0.5}, {1.0, 2.0}, 1.0))}};
  g.edges = {{"u-v", 0, 1, 1.0, 0.1}};
  return g;
}

// s* -> d single arc.
inline QcqpInstance single_arc(double u, double c_lin, double c_quad, double d, double r = 0.0) {
  QcqpInstance q;
  q.num_nodes = 2;
  q.source = 0;
  q.arcs = {{0, 1, 1.0, r, u, c_lin, c_quad}};
  q.sinks = {1};
  q.demand = {d};
  return q;
}

// s* -> v -> d path with optional losses on the second arc.
inline QcqpInstance two_arc_path(double r2, double d) {
  QcqpInstance q;
  q.num_nodes = 3;
  q.source = 0;
  q.arcs = {{0, 1, 1.0, 0.0, 2.0, 1.0, 0.0}, {1, 2, 1.0, r2, 2.0, 0.0, 0.0}};
  q.sinks = {2};
  q.demand = {d};
  return q;
}

// Random strictly feasible QCQP: s* feeds a few transit nodes wired by
// antiparallel pairs, each with a sink hanging off it.
inline QcqpInstance random_qcqp(std::mt19937_64& rng, int transit = 3, bool quad_costs = false) {
  auto U = [&rng](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  QcqpInstance q;
  q.num_nodes = 1 + 2 * transit;
  q.source = 0;
  for (int v = 1; v <= transit; ++v) {
    double u = U(2.0, 4.0);
    q.arcs.push_back({0, v, 1.0, 0.0, u, U(1.0, 3.0), quad_costs ? U(0.0, 0.5) : 0.0});
  }
  for (int v = 1; v < transit; ++v) {
    double u = U(1.0, 3.0);
    double r = U(0.0, 0.3 / u);
    q.arcs.push_back({v, v + 1, 1.0, r, u, 0.0, 0.0});
    q.arcs.push_back({v + 1, v, 1.0, r, u, 0.0, 0.0});
  }
  for (int v = 1; v <= transit; ++v) {
    int d = transit + v;
    double u = U(1.5, 3.0);
    q.arcs.push_back({v, d, U(0.7, 1.0), U(0.0, 0.1 / u), u, 0.0, 0.0});
    q.sinks.push_back(d);
    q.demand.push_back(U(0.2, 0.8));
  }
  return q;
}

inline FlowPoint random_point(std::mt19937_64& rng, const QcqpInstance& q) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  FlowPoint z = FlowPoint::zeros(q.num_arcs());
  for (int a = 0; a < q.num_arcs(); ++a) {
    z.x[a] = U(rng) * q.arcs[a].u;
    z.y[a] = U(rng) * z.x[a];
  }
  return z;
}

// Feasible point with arc and node waste: a convex combination of the optimum
// and an interior point, then out-flows lowered where the head has slack.
inline FlowPoint feasible_with_waste(std::mt19937_64& rng, const QcqpInstance& q) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const auto opt = barrier_solve(q, 1e-6).flow;
  const auto inner = unpack(phase_one(to_program(q), {}).z, q.num_arcs());
  const double th = U(rng);
  FlowPoint z = FlowPoint::zeros(q.num_arcs());
  for (int a = 0; a < q.num_arcs(); ++a) {
    z.x[a] = th * opt.x[a] + (1 - th) * inner.x[a];
    z.y[a] = th * opt.y[a] + (1 - th) * inner.y[a];
  }
  std::vector<int> sink_pos(q.num_nodes, -1);
  for (std::size_t i = 0; i < q.sinks.size(); ++i) sink_pos[q.sinks[i]] = static_cast<int>(i);
  for (int a = 0; a < q.num_arcs(); ++a) {
    if (U(rng) < 0.5) continue;
    const int h = q.arcs[a].head;
    double in = 0.0, out = 0.0;
    for (int b = 0; b < q.num_arcs(); ++b) {
      if (q.arcs[b].head == h) in += z.y[b];
      if (q.arcs[b].tail == h) out += z.x[b];
    }
    double slack = in - out - (sink_pos[h] >= 0 ? q.demand[sink_pos[h]] : 0.0);
    if (slack > 0.0) z.y[a] -= U(rng) * std::min(slack, z.y[a]);
  }
  return z;
}

}  // namespace fixtures
