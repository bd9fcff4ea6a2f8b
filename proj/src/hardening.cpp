#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "gridflow/error.hpp"
#include "gridflow/solver.hpp"

namespace gridflow {

namespace {

double max_row(const SparseQcqp& p, const double* z) {
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < p.rows(); ++i) best = std::max(best, p.row_value(i, z));
  return best;
}

// Ball containing the relevant part of the slack program's feasible set.
double slack_ball_radius(const QcqpInstance& inst, const SparseQcqp& p, double shift) {
  std::vector<double> zero(p.n, 0.0);
  double u_max = 0.0;
  for (const auto& a : inst.arcs) u_max = std::max(u_max, a.u);
  double s_hi = std::max(u_max, max_row(p, zero.data()) + shift);
  double r2 = s_hi * s_hi;
  for (const auto& a : inst.arcs) r2 += 2.0 * (a.u + 2.0 * s_hi) * (a.u + 2.0 * s_hi);
  return std::sqrt(r2);
}

}  // namespace

FindEpsResult find_eps(const QcqpInstance& inst, double eps, const SolverConfig& cfg) {
  if (!(eps > 0.0)) throw ParameterError("eps must be positive");
  validate_qcqp(inst);
  InstanceConstants c = constants(inst);
  FindEpsResult out;
  out.q_eps = c.q_eps(eps);
  out.eps_prime = std::min(out.q_eps, 1.0);
  const double floor = cfg.floor_factor * out.q_eps;
  SparseQcqp p = to_program(inst);
  const int m = p.rows();
  if (m == 0) {
    out.z.assign(p.n, 0.0);
    return out;
  }
  if (cfg.engine == Engine::PathFollowing) {
    // classify first: an eps-solution carries no certified sign
    PhaseOneResult ph = phase_one(p, cfg.barrier);
    out.newton_steps += ph.newton_steps;
  }

  for (;;) {
    const double ep = out.eps_prime;
    if (ep < floor)
      throw NotStrictlyFeasibleError(
          "eps' fell below the floor; the instance is not strictly feasible within tolerance", ep);
    SlackProgram sp = slack_program(p, 2.0 * ep);
    if (cfg.engine == Engine::Barrier) {
      std::vector<double> start(sp.program.n, 0.0);
      start[sp.slack] = max_row(p, start.data()) + 2.0 * ep + 1.0;
      bool found = false, infeasible = false;
      double lower = 0.0;
      auto stop = [&](const std::vector<double>& z, double t) {
        if (max_row(p, z.data()) + 2.0 * ep <= 0.0) return found = true;
        lower = z[sp.slack] - m / t - 2.0 * ep;
        if (lower > 0.0) return infeasible = true;
        return false;
      };
      ProgramSolution sol;
      try {
        sol = barrier_program(sp.program, start, ep, cfg.barrier, stop);
      } catch (const NonConvergenceError&) {
        // centering breaks down long before the nominal floor when b0 = 0
        throw NotStrictlyFeasibleError("slack solve broke down at eps' = " + std::to_string(ep) +
                                           "; the instance is not strictly feasible within tolerance", ep);
      } catch (const NumericalError&) {
        throw NotStrictlyFeasibleError("slack solve broke down at eps' = " + std::to_string(ep) +
                                           "; the instance is not strictly feasible within tolerance", ep);
      }
      out.newton_steps += sol.newton_steps;
      if (infeasible) {
        InfeasibilityCertificate cert{lower, sol.z[sp.slack], sol.gap, sol.z};
        throw InfeasibleError("instance is infeasible: slack optimum >= " + std::to_string(lower), cert);
      }
      if (found || max_row(p, sol.z.data()) + 2.0 * ep <= 0.0) {
        out.z.assign(sol.z.begin(), sol.z.begin() + p.n);
        return out;
      }
    } else {
      double radius = slack_ball_radius(inst, p, 2.0 * ep);
      ProgramSolution sol = path_following_program(sp.program, ep, radius, cfg.path);
      out.newton_steps += sol.newton_steps + sol.phase1_steps;
      std::vector<double> z(sol.z.begin(), sol.z.begin() + p.n);
      // rows satisfy g_i + 2 eps' - s <= eps', so s <= 0 gives g_i <= -eps'
      if (sol.z[sp.slack] <= 0.0 && max_row(p, z.data()) <= -ep) {
        out.z = std::move(z);
        return out;
      }
    }
    out.eps_prime = ep / 2.0;
    ++out.halvings;
  }
}

SolveReport feasible_eps_solution(const QcqpInstance& inst, double eps, const SolverConfig& cfg) {
  auto start = std::chrono::steady_clock::now();
  FindEpsResult fe = find_eps(inst, eps, cfg);
  const double ep = fe.eps_prime;
  QcqpInstance hard = harden(inst, ep);
  SparseQcqp p = to_program(hard);
  SolveReport r;
  r.engine = engine_name(cfg.engine);
  r.eps_target = eps;
  r.eps_prime = ep;
  r.halvings = fe.halvings;
  r.newton_phase1 = fe.newton_steps;
  r.m = p.rows();
  if (p.rows() == 0) {
    r.flow = FlowPoint::zeros(inst.num_arcs());
    return r;
  }
  ProgramSolution sol;
  if (cfg.engine == Engine::Barrier) {
    sol = barrier_program(p, fe.z, ep, cfg.barrier);
    r.duals = sol.duals;
    r.centers = sol.centers;
  } else {
    sol = path_following_program(p, ep / 2.0, constants(inst).sigma, cfg.path);
  }
  r.point = sol.z;
  r.flow = unpack(sol.z, inst.num_arcs());
  r.t_final = sol.t;
  r.duality_gap = sol.gap;
  r.newton_phase2 = sol.newton_steps + sol.phase1_steps;
  Evaluation ev = evaluate(inst, r.flow);
  r.objective = ev.objective;
  r.max_residual = ev.max_residual();
  if (!(r.max_residual <= 0.0))
    throw NumericalError("hardened solve returned a point violating the original constraints by " +
                         std::to_string(r.max_residual));
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

SolveReport relative_fptas(const QcqpInstance& inst, double eps_rel, const SolverConfig& cfg) {
  if (!(eps_rel > 0.0)) throw ParameterError("relative eps must be positive");
  validate_qcqp(inst);
  InstanceConstants c = constants(inst);
  if (!(c.F > 0.0))
    throw DegenerateInstanceError("F = 0: optimum may be 0, relative error undefined");
  SolveReport r = feasible_eps_solution(inst, eps_rel * c.F, cfg);
  r.relative_bound_F = c.F;
  return r;
}

}  // namespace gridflow
