#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gridflow/qcqp.hpp"
#include "gridflow/sparse_program.hpp"

namespace gridflow {

struct BarrierConfig {
  double t0 = 1.0;
  double mu = 0.0;           // <= 1 selects 1 + 1/sqrt(m+1)
  bool aggressive = false;   // mu = 10
  double alpha = 0.1;
  double beta = 0.7;
  double centering_tol = 1e-10;  // stop centering once lambda^2 / 2 <= tol
  int max_newton = 200;          // per centering
  int max_outer = 100000;
  double phase1_floor = 1e-11;   // gap below which Phase I gives up on strictness
  bool parallel = false;
  bool record_points = false;    // keep the iterate of every center

  double effective_mu(int m) const;
  void check() const;
};

struct PathConfig {
  double kappa1 = 0.0;  // <= 1 selects 1 + 1/(8 sqrt(m+3))
  double kappa2 = 0.0;
  long long max_steps = 5'000'000;
  bool parallel = false;

  double effective_kappa(double k, int m) const;
};

enum class Engine { Barrier, PathFollowing };
std::string engine_name(Engine e);
Engine parse_engine(const std::string& s);

struct SolverConfig {
  Engine engine = Engine::Barrier;
  BarrierConfig barrier;
  PathConfig path;
  double floor_factor = 1e-12;  // find_eps gives up below floor_factor * Q_eps
};

// One outer iteration of the barrier method, recorded after centering.
struct CenterRecord {
  double t = 0.0;
  double objective = 0.0;
  double gap = 0.0;
  double decrement = 0.0;  // lambda^2 / 2 at acceptance
  int newton_steps = 0;
  std::vector<double> z;  // only with BarrierConfig::record_points
};

struct ProgramSolution {
  std::vector<double> z;
  double t = 0.0;
  double gap = 0.0;
  std::vector<double> duals;  // empty for path-following
  std::vector<CenterRecord> centers;
  long long newton_steps = 0;
  long long phase1_steps = 0;
  bool stopped_early = false;
};

struct CenterResult {
  std::vector<double> z;
  int steps = 0;
  double decrement = 0.0;
  std::vector<double> decrements;  // lambda^2 / 2 before every step
  bool stalled = false;            // line search could not make progress
};

class NewtonSystem;

// Minimises t f0(z) - sum log(-g_i(z)) from a strictly feasible start.
CenterResult newton_center(NewtonSystem& sys, double t, std::vector<double> start,
                           const BarrierConfig& cfg);
CenterResult newton_center(const SparseQcqp& p, double t, std::vector<double> start,
                           const BarrierConfig& cfg);

// Barrier method on a program from a strictly feasible point until m/t <= eps
// or `stop(z, t)` returns true after a centering.
ProgramSolution barrier_program(const SparseQcqp& p, std::vector<double> start, double eps,
                                const BarrierConfig& cfg,
                                const std::function<bool(const std::vector<double>&, double)>& stop = {});

struct PhaseOneResult {
  std::vector<double> z;  // strictly feasible
  double slack = 0.0;     // max_i g_i(z) < 0
  long long newton_steps = 0;
};

// Strictly feasible point via the slack program. Throws InfeasibleError with a
// certificate, or NotStrictlyFeasibleError if the optimum sits at 0.
PhaseOneResult phase_one(const SparseQcqp& p, const BarrierConfig& cfg);

// Path-following method over the ball of radius sigma; returns an
// eps-solution. W is derived from the program and the ball.
ProgramSolution path_following_program(const SparseQcqp& p, double eps, double sigma,
                                       const PathConfig& cfg);
double ball_bound_W(const SparseQcqp& p, double sigma);

struct Duals {
  std::vector<double> lambda;
  double gap = 0.0;  // m / t
};

Duals extract_duals(const SparseQcqp& p, const std::vector<double>& z, double t);
Duals extract_duals(const QcqpInstance& inst, const FlowPoint& z, double t);

struct SolveReport {
  std::string engine;
  FlowPoint flow;
  std::vector<double> point;  // program variables
  double objective = 0.0;
  double eps_target = 0.0;
  double eps_prime = 0.0;
  double max_residual = 0.0;
  std::vector<double> duals;
  double t_final = 0.0;
  double duality_gap = 0.0;
  int m = 0;
  long long newton_phase1 = 0;
  long long newton_phase2 = 0;
  int halvings = 0;
  double wall_time = 0.0;
  std::vector<CenterRecord> centers;
  double relative_bound_F = 0.0;  // F used by relative_fptas, 0 otherwise
};

SolveReport barrier_solve(const QcqpInstance& inst, double eps, const BarrierConfig& cfg = {});
SolveReport path_following_solve(const QcqpInstance& inst, double eps, const PathConfig& cfg = {});

struct FindEpsResult {
  double eps_prime = 0.0;
  int halvings = 0;
  double q_eps = 0.0;
  std::vector<double> z;  // satisfies g_i(z) <= -eps' (barrier: <= -2 eps')
  long long newton_steps = 0;
};

FindEpsResult find_eps(const QcqpInstance& inst, double eps, const SolverConfig& cfg = {});
SolveReport feasible_eps_solution(const QcqpInstance& inst, double eps, const SolverConfig& cfg = {});
SolveReport relative_fptas(const QcqpInstance& inst, double eps_rel, const SolverConfig& cfg = {});

// Optimum of the slack program min s s.t. g_i(z) <= s, to precision tol.
// Equals -b^(0).
double slack_optimum(const QcqpInstance& inst, double tol, const BarrierConfig& cfg = {});

}  // namespace gridflow
