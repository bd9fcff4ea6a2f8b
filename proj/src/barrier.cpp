#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "gridflow/error.hpp"
#include "gridflow/newton.hpp"
#include "gridflow/solver.hpp"

namespace gridflow {

double BarrierConfig::effective_mu(int m) const {
  if (aggressive) return 10.0;
  if (mu > 1.0) return mu;
  return 1.0 + 1.0 / std::sqrt(static_cast<double>(m) + 1.0);
}

void BarrierConfig::check() const {
  if (!(t0 > 0.0)) throw ParameterError("t0 must be positive");
  if (!(alpha > 0.0 && alpha < 0.5)) throw ParameterError("alpha must lie in (0, 0.5)");
  if (!(beta > 0.0 && beta < 1.0)) throw ParameterError("beta must lie in (0, 1)");
  if (!(centering_tol > 0.0)) throw ParameterError("centering tolerance must be positive");
  if (max_newton < 1 || max_outer < 1) throw ParameterError("iteration caps must be >= 1");
}

std::string engine_name(Engine e) { return e == Engine::Barrier ? "barrier" : "pathfollow"; }

Engine parse_engine(const std::string& s) {
  if (s == "barrier") return Engine::Barrier;
  if (s == "pathfollow" || s == "path-following" || s == "pathfollowing") return Engine::PathFollowing;
  throw ParameterError("unknown engine '" + s + "'");
}

CenterResult newton_center(NewtonSystem& sys, double t, std::vector<double> z,
                           const BarrierConfig& cfg) {
  const SparseQcqp& p = sys.program();
  const int n = p.n, m = p.rows();
  std::vector<double> g(m), jv(p.nnz()), d(m), w(m), grad(n), extra(n), A(m), B(m);
  Eigen::VectorXd rhs(n);
  CenterResult res;
  int flat = 0;
  double best = std::numeric_limits<double>::infinity();

  for (int step = 0;; ++step) {
    sys.eval_rows(z.data(), g.data());
    for (int i = 0; i < m; ++i) {
      if (!(g[i] < 0.0)) throw PreconditionError("centering start is not strictly feasible");
      d[i] = 1.0 / -g[i];
      w[i] = d[i] * d[i];
    }
    sys.jacobian(z.data(), jv.data());
    sys.accumulate(jv.data(), d.data(), grad.data());
    for (int j = 0; j < n; ++j) {
      grad[j] += t * (p.obj_lin[j] + 2.0 * p.obj_quad[j] * z[j]);
      extra[j] = 2.0 * t * p.obj_quad[j];
    }
    sys.factorize(jv.data(), w.data(), d.data(), extra.data());
    for (int j = 0; j < n; ++j) rhs[j] = -grad[j];
    Eigen::VectorXd dz = sys.solve(rhs);
    double slope = 0.0;  // grad . dz = -lambda^2
    for (int j = 0; j < n; ++j) slope += grad[j] * dz[j];
    double dec = -slope / 2.0;
    res.decrements.push_back(dec);
    res.decrement = dec;
    if (dec <= cfg.centering_tol || !std::isfinite(dec)) {
      if (!std::isfinite(dec)) res.stalled = true;
      break;
    }
    // deep in the quadratic region the decrement must collapse; if it keeps
    // hovering it has hit the rounding floor of the gradient
    if (dec <= 1e-6) {
      if (dec < 0.5 * best) {
        flat = 0;
      } else if (++flat >= 5) {
        break;
      }
    }
    best = std::min(best, dec);
    if (step >= cfg.max_newton)
      throw NonConvergenceError("Newton centering hit its iteration cap", z);

    // exact quadratic expansions along dz: g(s) = g + s A + s^2 B
    sys.directional(jv.data(), dz.data(), A.data());
    sys.curvature(dz.data(), B.data());
    double a0 = 0.0, b0 = 0.0;
    for (int j = 0; j < n; ++j) {
      a0 += (p.obj_lin[j] + 2.0 * p.obj_quad[j] * z[j]) * dz[j];
      b0 += p.obj_quad[j] * dz[j] * dz[j];
    }
    double s = 1.0;
    bool accepted = false;
    while (s > 1e-14) {
      bool inside = true;
      double dphi = t * (s * a0 + s * s * b0);
      for (int i = 0; i < m; ++i) {
        double ratio = (s * A[i] + s * s * B[i]) / g[i];
        if (!(1.0 + ratio > 0.0)) {
          inside = false;
          break;
        }
        dphi -= std::log1p(ratio);
      }
      if (inside && dphi <= cfg.alpha * s * slope) {
        accepted = true;
        break;
      }
      s *= cfg.beta;
    }
    if (!accepted) {
      res.stalled = true;
      break;
    }
    for (int j = 0; j < n; ++j) z[j] += s * dz[j];
    ++res.steps;
  }
  res.z = std::move(z);
  return res;
}

CenterResult newton_center(const SparseQcqp& p, double t, std::vector<double> start,
                           const BarrierConfig& cfg) {
  NewtonSystem sys(p, cfg.parallel);
  return newton_center(sys, t, std::move(start), cfg);
}

ProgramSolution barrier_program(const SparseQcqp& p, std::vector<double> start, double eps,
                                const BarrierConfig& cfg,
                                const std::function<bool(const std::vector<double>&, double)>& stop) {
  cfg.check();
  if (!(eps > 0.0)) throw ParameterError("eps must be positive");
  ProgramSolution sol;
  const int m = p.rows();
  if (m == 0) {
    sol.z = std::move(start);
    return sol;
  }
  NewtonSystem sys(p, cfg.parallel);
  const double mu = cfg.effective_mu(m);
  const double t_max = m / eps;
  double t = std::min(cfg.t0, t_max);
  std::vector<double> z = std::move(start);
  for (int outer = 0; outer < cfg.max_outer; ++outer) {
    CenterResult c = newton_center(sys, t, std::move(z), cfg);
    z = std::move(c.z);
    sol.newton_steps += c.steps;
    sol.centers.push_back({t, p.objective(z.data()), m / t, c.decrement, c.steps, {}});
    if (cfg.record_points) sol.centers.back().z = z;
    if (stop && stop(z, t)) {
      sol.stopped_early = true;
      break;
    }
    if (t >= t_max) break;
    t = std::min(t * mu, t_max);
    if (outer + 1 == cfg.max_outer) throw NonConvergenceError("barrier outer iteration cap reached", z);
  }
  sol.t = t;
  sol.gap = m / t;
  Duals du = extract_duals(p, z, t);
  sol.duals = std::move(du.lambda);
  sol.z = std::move(z);
  return sol;
}

namespace {

double max_row(const SparseQcqp& p, const double* z) {
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < p.rows(); ++i) best = std::max(best, p.row_value(i, z));
  return best;
}

}  // namespace

PhaseOneResult phase_one(const SparseQcqp& p, const BarrierConfig& cfg) {
  PhaseOneResult out;
  out.z.assign(p.n, 0.0);
  if (p.rows() == 0) {
    out.slack = -std::numeric_limits<double>::infinity();
    return out;
  }
  double g0 = max_row(p, out.z.data());
  if (g0 < 0.0) {
    out.slack = g0;
    return out;
  }
  SlackProgram sp = slack_program(p, 0.0);
  std::vector<double> start(sp.program.n, 0.0);
  start[sp.slack] = g0 + 1.0;
  const int m = sp.program.rows();
  bool found = false, infeasible = false;
  double lower = 0.0;
  auto stop = [&](const std::vector<double>& z, double t) {
    if (max_row(p, z.data()) < 0.0) return found = true;
    lower = z[sp.slack] - m / t;
    if (lower > 0.0) return infeasible = true;
    return false;
  };
  ProgramSolution sol = barrier_program(sp.program, start, cfg.phase1_floor, cfg, stop);
  out.newton_steps = sol.newton_steps;
  if (infeasible) {
    InfeasibilityCertificate cert{lower, sol.z[sp.slack], sol.gap, sol.z};
    throw InfeasibleError("instance is infeasible: slack optimum >= " + std::to_string(lower), cert);
  }
  if (!found)
    throw NotStrictlyFeasibleError("no strictly feasible point: slack optimum is 0 within " +
                                       std::to_string(sol.gap),
                                   sol.gap);
  out.z.assign(sol.z.begin(), sol.z.begin() + p.n);
  out.slack = max_row(p, out.z.data());
  return out;
}

Duals extract_duals(const SparseQcqp& p, const std::vector<double>& z, double t) {
  if (!(t > 0.0)) throw PreconditionError("t must be positive");
  Duals d;
  const int m = p.rows();
  d.lambda.resize(m);
  for (int i = 0; i < m; ++i) {
    double g = p.row_value(i, z.data());
    if (!(g < 0.0)) throw PreconditionError("duals need a strictly feasible point");
    d.lambda[i] = 1.0 / (t * -g);
  }
  d.gap = m / t;
  return d;
}

Duals extract_duals(const QcqpInstance& inst, const FlowPoint& z, double t) {
  return extract_duals(to_program(inst), pack(z), t);
}

namespace {

using Clock = std::chrono::steady_clock;

SolveReport trivial_report(const std::string& engine, double eps) {
  SolveReport r;
  r.engine = engine;
  r.eps_target = eps;
  r.max_residual = 0.0;
  return r;
}

}  // namespace

SolveReport barrier_solve(const QcqpInstance& inst, double eps, const BarrierConfig& cfg) {
  auto t0 = Clock::now();
  validate_qcqp(inst);
  SparseQcqp p = to_program(inst);
  if (p.rows() == 0) return trivial_report("barrier", eps);
  PhaseOneResult ph = phase_one(p, cfg);
  ProgramSolution sol = barrier_program(p, ph.z, eps, cfg);
  SolveReport r;
  r.engine = "barrier";
  r.point = sol.z;
  r.flow = unpack(sol.z, inst.num_arcs());
  Evaluation ev = evaluate(inst, r.flow);
  r.objective = ev.objective;
  r.max_residual = ev.max_residual();
  r.eps_target = eps;
  r.duals = sol.duals;
  r.t_final = sol.t;
  r.duality_gap = sol.gap;
  r.m = p.rows();
  r.newton_phase1 = ph.newton_steps;
  r.newton_phase2 = sol.newton_steps;
  r.centers = std::move(sol.centers);
  r.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
  return r;
}

double slack_optimum(const QcqpInstance& inst, double tol, const BarrierConfig& cfg) {
  SparseQcqp p = to_program(inst);
  if (p.rows() == 0) return -std::numeric_limits<double>::infinity();
  SlackProgram sp = slack_program(p, 0.0);
  std::vector<double> start(sp.program.n, 0.0);
  start[sp.slack] = max_row(p, start.data()) + 1.0;
  ProgramSolution sol = barrier_program(sp.program, start, tol, cfg);
  return sol.z[sp.slack];
}

}  // namespace gridflow
