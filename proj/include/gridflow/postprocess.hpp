#pragma once

#include <map>
#include <string>
#include <vector>

#include "gridflow/grid.hpp"
#include "gridflow/pwfun.hpp"
#include "gridflow/qcqp.hpp"
#include "gridflow/reduce.hpp"

namespace gridflow {

// Waste tolerance used by the rounding routines: tol * (1 + |value|).
inline constexpr double kWasteTolerance = 1e-12;

struct RoundStats {
  int events = 0;    // waste eliminations (each one restarts the search)
  int restarts = 0;
};

// Removes arc and node waste from a feasible point by pushing flow back
// towards the super-source. Output <= input componentwise.
FlowPoint round_waste(const QcqpInstance& inst, const FlowPoint& z, RoundStats* stats = nullptr);

// Largest arc or node waste of z (0 for a waste-free point).
double max_waste(const QcqpInstance& inst, const FlowPoint& z);

// Antiparallel pairs (a, a') with a < a', each arc in at most one pair.
std::vector<std::pair<int, int>> antiparallel_pairs(const QcqpInstance& inst);

// Cancels opposing flows on every antiparallel pair.
FlowPoint merge_antiparallel(const QcqpInstance& inst, const FlowPoint& z);

// Bench rule: for every pair, if y_a > x_a' the flow on a' is dropped.
FlowPoint delete_antiparallel(const QcqpInstance& inst, const FlowPoint& z);

struct ArcFlow {
  int edge = 0;       // index into the instance's edges (or arcs in SPGG mode)
  int direction = 0;  // 0: u -> v, 1: v -> u
  double x = 0.0;
  double y = 0.0;
  bool operator==(const ArcFlow&) const = default;
};

struct IntervalFlow {
  double start = 0.0;
  double end = 0.0;
  std::vector<ArcFlow> arcs;                 // nonzero entries only
  std::map<std::string, double> production;  // node id -> rate
  bool operator==(const IntervalFlow&) const = default;
};

struct DynamicFlow {
  std::vector<IntervalFlow> intervals;
  double objective = 0.0;  // QCQP objective of the mapped point
  bool operator==(const DynamicFlow&) const = default;
};

struct ExtractOptions {
  bool merge = true;
  bool round = true;
  bool bench_rule = false;  // delete_antiparallel instead of merging
};

// Maps a QCQP point back to flows on the user's edges and a production
// schedule. Production per node is the out-flow of its delegation arcs.
DynamicFlow to_dynamic_flow(const BuiltQcqp& built, const FlowPoint& z, const ExtractOptions& opt = {});

struct FlowCheck {
  bool ok = true;
  std::vector<std::string> problems;
};

// Re-evaluates a dynamic flow against the instance semantics: losses,
// capacities, demands per interval, rate caps and cumulative budgets.
FlowCheck check_dynamic_flow(const Upgg& g, const DynamicFlow& f, double tol = 1e-9);
FlowCheck check_dynamic_flow(const Spgg& g, const DynamicFlow& f, double tol = 1e-9);

// Production cost: integral of the marginal cost over cumulative production
// (cumulative suppliers) or over the rate at every instant (rate suppliers).
double dynamic_flow_cost(const Upgg& g, const DynamicFlow& f);
double dynamic_flow_cost(const Spgg& g, const DynamicFlow& f);

// Integral of a step function from 0 to b.
double integrate_from_zero(const PiecewiseConstantFn& pi, double b);

}  // namespace gridflow
