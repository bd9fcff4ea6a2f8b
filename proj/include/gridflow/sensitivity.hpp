#pragma once

#include <string>
#include <vector>

#include "gridflow/qcqp.hpp"
#include "gridflow/solver.hpp"

namespace gridflow {

// One arc of the residual graph around a waste-free flow (x*, y*).
struct ResidualArc {
  int tail = 0;
  int head = 0;
  int base = 0;          // arc of the original instance
  bool forward = true;   // a' (push more) or a'' (undo)
  double capacity = 0.0;

  // a':  x -> gamma(x* + x) - y*      a'':  y -> x* - gamma^-1(y* - y)
  double gain(const QcqpInstance& inst, const FlowPoint& z, double amount) const;
};

struct ResidualGraph {
  int num_nodes = 0;
  std::vector<ResidualArc> arcs;  // a' of arc a at 2a, a'' at 2a + 1
};

ResidualGraph residual_graph(const QcqpInstance& inst, const FlowPoint& z, double tol = 1e-9);

enum class AtomKind { Demand, Capacity };

// Change of one demand (index into sinks) or one arc capacity by delta.
struct Atom {
  AtomKind kind = AtomKind::Demand;
  int target = 0;
  double delta = 0.0;
};

struct PerturbationBound {
  double lower = 0.0;
  double upper = 0.0;
  std::vector<std::pair<double, double>> contributions;  // per atom
};

PerturbationBound demand_bound(const QcqpInstance& inst, int sink, double delta);
PerturbationBound capacity_bound(const QcqpInstance& inst, int arc, double delta);
PerturbationBound composite_bound(const QcqpInstance& inst, const std::vector<Atom>& atoms);

QcqpInstance perturb(const QcqpInstance& inst, const Atom& atom);

struct LocalSensitivities {
  std::vector<double> capacity;           // -lambda of the capacity rows
  std::vector<char> capacity_one_sided;   // arc cost or loss only defined on [0, u]
  std::vector<double> demand;             // -lambda of the demand rows
  std::vector<double> resistance;         // lambda of the loss rows times x*^2
  double gap = 0.0;                       // m / t of the center used
};

// Estimates from the duals of a barrier solve. The resistance values assume
// that the optimum moves continuously with r.
LocalSensitivities local_sensitivities(const QcqpInstance& inst, const SolveReport& report);

struct EmpiricalCheck {
  bool perturbed_feasible = true;
  std::string note;
  double base = 0.0;
  double perturbed = 0.0;
  double delta_opt = 0.0;
  PerturbationBound bound;
  bool within = true;  // delta_opt in [lower - 2 eps, upper + 2 eps]
};

// Solves the base and the perturbed instance to eps and compares the change
// in optimum with the bound. An infeasible perturbation is reported only.
EmpiricalCheck validate_bound_empirically(const QcqpInstance& inst, const Atom& atom, double eps,
                                          const BarrierConfig& cfg = {});

}  // namespace gridflow
