#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "gridflow/error.hpp"
#include "gridflow/newton.hpp"
#include "gridflow/solver.hpp"

namespace gridflow {

double PathConfig::effective_kappa(double k, int m) const {
  if (k > 1.0) return k;
  return 1.0 + 1.0 / (8.0 * std::sqrt(static_cast<double>(m) + 3.0));
}

double ball_bound_W(const SparseQcqp& p, double sigma) {
  auto bound = [sigma](double lin2, double qmax, double c) {
    return std::sqrt(lin2) * sigma + qmax * sigma * sigma + c;
  };
  double lin2 = 0.0, qmax = 0.0;
  for (int j = 0; j < p.n; ++j) {
    lin2 += p.obj_lin[j] * p.obj_lin[j];
    qmax = std::max(qmax, p.obj_quad[j]);
  }
  double W = bound(lin2, qmax, std::abs(p.obj_const));
  for (int i = 0; i < p.rows(); ++i) {
    lin2 = 0.0;
    qmax = 0.0;
    for (int a = p.row_ptr[i]; a < p.row_ptr[i + 1]; ++a) {
      lin2 += p.lin[a] * p.lin[a];
      qmax = std::max(qmax, p.quad[a]);
    }
    W = std::max(W, bound(lin2, qmax, std::max(p.offset[i], 0.0)));
  }
  return W > 0.0 ? W : 1.0;
}

namespace {

// Rows g_i(z) - q plus the objective term written as the row
// f0(z) + W - q / omega. Its log barrier differs from -log(q - omega (W + f0))
// by a constant, and keeping it in the sparse system avoids a badly
// conditioned rank-one update once the slack gets small.
SlackProgram extended_program(const SparseQcqp& p, double W, double omega) {
  SlackProgram ext = slack_program(p, 0.0);
  std::vector<SparseQcqp::Entry> row;
  for (int j = 0; j < p.n; ++j)
    if (p.obj_lin[j] != 0.0 || p.obj_quad[j] != 0.0) row.push_back({j, p.obj_lin[j], p.obj_quad[j]});
  row.push_back({ext.slack, -1.0 / omega, 0.0});
  ext.program.add_row(row, W + p.obj_const);
  return ext;
}

// Extended barrier F(z, q) of the path-following method and its Newton
// system: a sparse part plus the ball term handled by Woodbury.
class ExtendedBarrier {
 public:
  ExtendedBarrier(const SparseQcqp& p, double eps, double sigma, bool parallel)
      : p_(p),
        ext_(extended_program(p, ball_bound_W(p, sigma), eps / (3.0 * ball_bound_W(p, sigma)))),
        sys_(ext_.program, parallel),
        n_(p.n),
        N_(p.n + 1),
        sigma2_(sigma * sigma),
        W_(ball_bound_W(p, sigma)),
        omega_(eps / (3.0 * W_)) {
    r_.resize(m() + 1);
    jv_.resize(ext_.program.nnz());
    d_.resize(m() + 1);
    w_.resize(m() + 1);
    extra_.resize(N_);
    grad_.resize(N_);
    acc_.resize(N_);
  }

  int m() const { return p_.rows(); }
  int N() const { return N_; }
  double W() const { return W_; }
  double omega() const { return omega_; }
  double objective(const std::vector<double>& v) const { return p_.objective(v.data()); }

  bool inside(const std::vector<double>& v) const {
    double q = v[n_];
    if (!(2.0 * W_ - q > 0.0)) return false;
    double zz = 0.0;
    for (int j = 0; j < n_; ++j) zz += v[j] * v[j];
    if (!(sigma2_ - zz > 0.0)) return false;
    for (int i = 0; i <= m(); ++i)
      if (!(ext_.program.row_value(i, v.data()) < 0.0)) return false;
    return true;
  }

  // Slack of the objective row and the rounding noise of computing it.
  double objective_slack(const std::vector<double>& v) const { return -ext_.program.row_value(m(), v.data()); }
  double objective_noise(const std::vector<double>& v) const {
    return 64.0 * std::numeric_limits<double>::epsilon() *
           (std::abs(p_.objective(v.data())) + W_ + std::abs(v[n_]) / omega_);
  }

  // Evaluates derivatives at v and factorizes the Hessian.
  void prepare(const std::vector<double>& v) {
    const double q = v[n_];
    sys_.eval_rows(v.data(), r_.data());
    for (int i = 0; i <= m(); ++i) {
      if (!(r_[i] < 0.0)) throw NumericalError("path-following iterate left the domain");
      d_[i] = 1.0 / -r_[i];
      w_[i] = d_[i] * d_[i];
    }
    sys_.jacobian(v.data(), jv_.data());
    sys_.accumulate(jv_.data(), d_.data(), acc_.data());

    double zz = 0.0;
    for (int j = 0; j < n_; ++j) zz += v[j] * v[j];
    const double b = sigma2_ - zz;
    const double top = 2.0 * W_ - q;

    u_ = Eigen::VectorXd::Zero(N_);
    for (int j = 0; j < n_; ++j) {
      grad_[j] = acc_[j] + 2.0 * v[j] / b;
      extra_[j] = 2.0 / b;
      u_[j] = 2.0 * v[j] / b;
    }
    grad_[n_] = acc_[n_] + 1.0 / top;
    extra_[n_] = 1.0 / (top * top);

    sys_.factorize(jv_.data(), w_.data(), d_.data(), extra_.data());
    Y_ = sys_.solve(u_);
    k_ = 1.0 + u_.dot(Y_);
  }

  Eigen::VectorXd grad() const {
    return Eigen::Map<const Eigen::VectorXd>(grad_.data(), N_);
  }

  // (S + u u^T)^-1 b
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    Eigen::VectorXd x0 = sys_.solve(b);
    return x0 - Y_ * (u_.dot(x0) / k_);
  }

 private:
  const SparseQcqp& p_;
  SlackProgram ext_;
  NewtonSystem sys_;
  int n_, N_;
  double sigma2_, W_, omega_;
  std::vector<double> r_, jv_, d_, w_, extra_, grad_, acc_;
  Eigen::VectorXd u_, Y_;
  double k_ = 1.0;
};

// Damped Newton step that stays inside the domain; false if none does.
bool take_step(const ExtendedBarrier& F, std::vector<double>& v, const Eigen::VectorXd& dv, double lambda) {
  double s = lambda > 0.5 ? 1.0 / (1.0 + lambda) : 1.0;
  std::vector<double> trial(v.size());
  for (int tries = 0; tries < 80; ++tries, s *= 0.5) {
    for (std::size_t j = 0; j < v.size(); ++j) trial[j] = v[j] + s * dv[static_cast<Eigen::Index>(j)];
    if (F.inside(trial)) {
      v.swap(trial);
      return true;
    }
  }
  return false;
}

const char* kStepFailure = "path-following step could not stay inside the domain";

}  // namespace

ProgramSolution path_following_program(const SparseQcqp& p, double eps, double sigma,
                                       const PathConfig& cfg) {
  if (!(eps > 0.0)) throw ParameterError("eps must be positive");
  if (!(sigma > 0.0)) throw ParameterError("ball radius must be positive");
  ProgramSolution sol;
  const int m = p.rows();
  if (m == 0) {
    sol.z.assign(p.n, 0.0);
    return sol;
  }
  ExtendedBarrier F(p, eps, sigma, cfg.parallel);
  const int N = F.N();
  const double nu = m + 3.0;
  const double k1 = cfg.effective_kappa(cfg.kappa1, m);
  const double k2 = cfg.effective_kappa(cfg.kappa2, m);
  const double beta = 0.25;
  const double target = eps * eps / (3.0 * F.W());
  const double slack_const = nu + (beta + std::sqrt(nu)) * beta / (1.0 - beta);

  std::vector<double> v(N, 0.0);
  v[N - 1] = 1.5 * F.W();
  if (!F.inside(v)) throw InvariantError("path-following start point outside its domain");
  F.prepare(v);
  const Eigen::VectorXd g0 = F.grad();
  Eigen::VectorXd eq = Eigen::VectorXd::Zero(N);
  eq[N - 1] = 1.0;

  double t = 1.0;
  long long steps = 0;
  // Phase 1: follow the auxiliary path towards the analytic center
  for (;; ++steps) {
    if (steps >= cfg.max_steps) throw NonConvergenceError("path-following phase 1 step cap", v);
    if (steps > 0) F.prepare(v);
    Eigen::VectorXd gF = F.grad();
    Eigen::VectorXd xF = F.solve(gF);
    double lamF2 = gF.dot(xF);
    if (lamF2 <= 1.0 / 64.0) {
      Eigen::VectorXd xq = F.solve(eq);
      t = 0.125 / std::sqrt(std::max(xq[N - 1], 1e-300));
      break;
    }
    t /= k1;
    Eigen::VectorXd g = gF - t * g0;
    Eigen::VectorXd dv = -F.solve(g);
    double lambda = std::sqrt(std::max(0.0, -g.dot(dv)));
    if (!take_step(F, v, dv, lambda)) throw NumericalError(std::string(kStepFailure) + " DBG phase1 lam=" + std::to_string(lambda));
  }
  sol.phase1_steps = steps;
  // Phase 2: minimise t q + F with increasing t
  for (long long s2 = 0;; ++s2) {
    if (steps + s2 >= cfg.max_steps) throw NonConvergenceError("path-following phase 2 step cap", v);
    F.prepare(v);
    Eigen::VectorXd g = t * eq + F.grad();
    Eigen::VectorXd dv = -F.solve(g);
    double lambda = std::sqrt(std::max(0.0, -g.dot(dv)));
    if (!take_step(F, v, dv, lambda)) {
      // the objective slack drowned in rounding: the iterate is as good as doubles allow
      if (F.objective_slack(v) <= 1e3 * F.objective_noise(v)) {
        sol.stopped_early = true;
        break;
      }
      throw NumericalError(std::string(kStepFailure) + " DBG phase2 t=" + std::to_string(t) + " slack=" + std::to_string(F.objective_slack(v)*1e12) + "e-12 noise=" + std::to_string(F.objective_noise(v)*1e12) + "e-12");
    }
    ++sol.newton_steps;
    if (slack_const / t <= target) break;
    t *= k2;
  }
  sol.t = t;
  sol.gap = slack_const / t;
  sol.z.assign(v.begin(), v.begin() + p.n);
  return sol;
}

SolveReport path_following_solve(const QcqpInstance& inst, double eps, const PathConfig& cfg) {
  auto start = std::chrono::steady_clock::now();
  validate_qcqp(inst);
  SparseQcqp p = to_program(inst);
  SolveReport r;
  r.engine = "pathfollow";
  r.eps_target = eps;
  r.m = p.rows();
  if (p.rows() == 0) return r;
  ProgramSolution sol = path_following_program(p, eps, constants(inst).sigma, cfg);
  r.point = sol.z;
  r.flow = unpack(sol.z, inst.num_arcs());
  Evaluation ev = evaluate(inst, r.flow);
  r.objective = ev.objective;
  r.max_residual = ev.max_residual();
  r.t_final = sol.t;
  r.duality_gap = sol.gap;
  r.newton_phase1 = sol.phase1_steps;
  r.newton_phase2 = sol.newton_steps;
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace gridflow
