#include "gridflow/sensitivity.hpp"

#include <algorithm>
#include <cmath>

#include "gridflow/error.hpp"

namespace gridflow {

double ResidualArc::gain(const QcqpInstance& inst, const FlowPoint& z, double amount) const {
  const QcqpArc& a = inst.arcs[base];
  if (forward) return gamma(a, z.x[base] + amount) - z.y[base];
  return z.x[base] - gamma_inverse(a, z.y[base] - amount);
}

ResidualGraph residual_graph(const QcqpInstance& inst, const FlowPoint& z, double tol) {
  if (z.x.size() != inst.arcs.size() || z.y.size() != inst.arcs.size())
    throw PreconditionError("flow point does not match the instance's arc count");
  ResidualGraph g;
  g.num_nodes = inst.num_nodes;
  for (int a = 0; a < inst.num_arcs(); ++a) {
    const QcqpArc& arc = inst.arcs[a];
    if (std::abs(z.y[a] - gamma(arc, z.x[a])) > tol * (1.0 + std::abs(z.x[a])))
      throw PreconditionError("residual graph needs a waste-free flow (arc " + std::to_string(a) + ")");
    if (z.x[a] < -tol || z.x[a] > arc.u + tol) throw PreconditionError("flow outside the arc capacity");
    g.arcs.push_back({arc.tail, arc.head, a, true, std::max(0.0, arc.u - z.x[a])});
    g.arcs.push_back({arc.head, arc.tail, a, false, std::max(0.0, z.y[a])});
  }
  return g;
}

namespace {

PerturbationBound single(double lo, double hi) {
  PerturbationBound b;
  b.lower = lo;
  b.upper = hi;
  b.contributions.emplace_back(lo, hi);
  return b;
}

}  // namespace

PerturbationBound demand_bound(const QcqpInstance& inst, int sink, double delta) {
  if (sink < 0 || sink >= static_cast<int>(inst.sinks.size())) throw ParameterError("unknown sink");
  InstanceConstants c = constants(inst);
  const double worst = c.c_prime_max * delta * c.iota_product;
  const double best = c.c_prime_min * delta;
  if (delta == 0.0) return single(0.0, 0.0);
  return delta > 0.0 ? single(best, worst) : single(worst, best);
}

PerturbationBound capacity_bound(const QcqpInstance& inst, int arc, double delta) {
  if (arc < 0 || arc >= inst.num_arcs()) throw ParameterError("unknown arc");
  InstanceConstants c = constants(inst);
  const double swing = -c.c_prime_max * delta * c.iota_product;
  if (delta == 0.0) return single(0.0, 0.0);
  return delta > 0.0 ? single(swing, 0.0) : single(0.0, swing);
}

PerturbationBound composite_bound(const QcqpInstance& inst, const std::vector<Atom>& atoms) {
  PerturbationBound total;
  for (const auto& at : atoms) {
    PerturbationBound b = at.kind == AtomKind::Demand ? demand_bound(inst, at.target, at.delta)
                                                      : capacity_bound(inst, at.target, at.delta);
    total.lower += b.lower;
    total.upper += b.upper;
    total.contributions.push_back(b.contributions.front());
  }
  return total;
}

QcqpInstance perturb(const QcqpInstance& inst, const Atom& atom) {
  QcqpInstance p = inst;
  if (atom.kind == AtomKind::Demand) {
    if (atom.target < 0 || atom.target >= static_cast<int>(p.sinks.size())) throw ParameterError("unknown sink");
    p.demand[atom.target] += atom.delta;
  } else {
    if (atom.target < 0 || atom.target >= p.num_arcs()) throw ParameterError("unknown arc");
    p.arcs[atom.target].u += atom.delta;
  }
  return p;
}

LocalSensitivities local_sensitivities(const QcqpInstance& inst, const SolveReport& report) {
  const int m = inst.num_constraints();
  if (static_cast<int>(report.duals.size()) != m)
    throw PreconditionError("local sensitivities need the duals of a barrier solve");
  LocalSensitivities out;
  const int A = inst.num_arcs();
  out.capacity.assign(A, 0.0);
  out.capacity_one_sided.assign(A, 0);
  out.resistance.assign(A, 0.0);
  out.demand.assign(inst.sinks.size(), 0.0);
  out.gap = report.duality_gap;
  std::vector<RowLabel> labels = row_labels(inst);
  for (int i = 0; i < m; ++i) {
    const double lam = report.duals[i];
    const RowLabel& l = labels[i];
    switch (l.family) {
      case RowFamily::Capacity:
        out.capacity[l.index] = -lam;
        break;
      case RowFamily::Demand:
        out.demand[l.index] = -lam;
        break;
      case RowFamily::Loss: {
        double x = report.flow.x[l.index];
        out.resistance[l.index] = lam * x * x;
        break;
      }
      default:
        break;
    }
  }
  for (int a = 0; a < A; ++a) {
    const QcqpArc& arc = inst.arcs[a];
    out.capacity_one_sided[a] = arc.tail == inst.source || arc.r > 0.0 || arc.c_quad > 0.0;
  }
  return out;
}

EmpiricalCheck validate_bound_empirically(const QcqpInstance& inst, const Atom& atom, double eps,
                                          const BarrierConfig& cfg) {
  EmpiricalCheck out;
  out.bound = composite_bound(inst, {atom});
  out.base = barrier_solve(inst, eps, cfg).objective;
  QcqpInstance p = perturb(inst, atom);
  try {
    validate_qcqp(p);
    for (const auto& a : p.arcs)
      if (!(a.u > 0.0) || !(iota(a) > 0.0)) throw ValidationError("perturbed arc leaves the model's range");
    out.perturbed = barrier_solve(p, eps, cfg).objective;
  } catch (const InfeasibleError& e) {
    out.perturbed_feasible = false;
    out.note = e.what();
    return out;
  } catch (const NotStrictlyFeasibleError& e) {
    out.perturbed_feasible = false;
    out.note = e.what();
    return out;
  } catch (const ValidationError& e) {
    out.perturbed_feasible = false;
    out.note = e.what();
    return out;
  }
  out.delta_opt = out.perturbed - out.base;
  out.within = out.delta_opt >= out.bound.lower - 2.0 * eps && out.delta_opt <= out.bound.upper + 2.0 * eps;
  return out;
}

}  // namespace gridflow
