#include "gridflow/newton.hpp"

#include <algorithm>
#include <cmath>

#include "gridflow/error.hpp"

namespace gridflow {

NewtonSystem::NewtonSystem(const SparseQcqp& p, bool parallel)
    : p_(p),
      parallel_(parallel),
      pattern_(kernels::build_hessian_pattern(p)),
      columns_(kernels::build_column_index(p)),
      h_(p.n, p.n) {
  h_.resizeNonZeros(pattern_.nnz());
  std::copy(pattern_.outer.begin(), pattern_.outer.end(), h_.outerIndexPtr());
  std::copy(pattern_.inner.begin(), pattern_.inner.end(), h_.innerIndexPtr());
  std::fill(h_.valuePtr(), h_.valuePtr() + pattern_.nnz(), 0.0);
  base_.resize(pattern_.nnz());
  llt_.analyzePattern(h_);
}

void NewtonSystem::eval_rows(const double* z, double* g) const {
  if (parallel_)
    kernels::eval_rows_omp(p_, z, g);
  else
    kernels::eval_rows_serial(p_, z, g);
}

void NewtonSystem::jacobian(const double* z, double* jv) const {
  if (parallel_)
    kernels::jacobian_values_omp(p_, z, jv);
  else
    kernels::jacobian_values_serial(p_, z, jv);
}

void NewtonSystem::accumulate(const double* jv, const double* coef, double* out) const {
  if (parallel_)
    kernels::accumulate_columns_omp(columns_, jv, coef, p_.n, out);
  else
    kernels::accumulate_columns_serial(columns_, jv, coef, p_.n, out);
}

void NewtonSystem::directional(const double* jv, const double* d, double* out) const {
  const int m = p_.rows();
#pragma omp parallel for schedule(static) if (parallel_)
  for (int i = 0; i < m; ++i) {
    double acc = 0.0;
    for (int a = p_.row_ptr[i]; a < p_.row_ptr[i + 1]; ++a) acc += jv[a] * d[p_.cols[a]];
    out[i] = acc;
  }
}

void NewtonSystem::curvature(const double* d, double* out) const {
  const int m = p_.rows();
#pragma omp parallel for schedule(static) if (parallel_)
  for (int i = 0; i < m; ++i) {
    double acc = 0.0;
    for (int a = p_.row_ptr[i]; a < p_.row_ptr[i + 1]; ++a) {
      double v = d[p_.cols[a]];
      acc += p_.quad[a] * v * v;
    }
    out[i] = acc;
  }
}

double NewtonSystem::factorize(const double* jv, const double* w, const double* c, const double* extra) {
  if (parallel_)
    kernels::assemble_hessian_omp(pattern_, p_, jv, w, c, extra, base_.data());
  else
    kernels::assemble_hessian_serial(pattern_, p_, jv, w, c, extra, base_.data());

  for (double v : base_)
    if (!std::isfinite(v)) throw NumericalError("non-finite Newton matrix entry");

  double* vals = h_.valuePtr();
  std::copy(base_.begin(), base_.end(), vals);
  llt_.factorize(h_);
  if (llt_.info() == Eigen::Success) return 0.0;

  // infinity norm of the symmetric matrix from its lower triangle
  std::vector<double> rowsum(p_.n, 0.0);
  for (int c0 = 0; c0 < p_.n; ++c0)
    for (int e = pattern_.outer[c0]; e < pattern_.outer[c0 + 1]; ++e) {
      int r = pattern_.inner[e];
      rowsum[r] += std::abs(base_[e]);
      if (r != c0) rowsum[c0] += std::abs(base_[e]);
    }
  double norm = rowsum.empty() ? 0.0 : *std::max_element(rowsum.begin(), rowsum.end());
  double shift = 1e-12 * (1.0 + norm);
  for (int attempt = 0; attempt < 8; ++attempt, shift *= 100.0) {
    std::copy(base_.begin(), base_.end(), vals);
    for (int j = 0; j < p_.n; ++j) vals[pattern_.diag[j]] += shift;
    llt_.factorize(h_);
    if (llt_.info() == Eigen::Success) return shift;
  }
  throw NumericalError("Newton matrix is not positive definite even after regularisation");
}

Eigen::VectorXd NewtonSystem::solve(const Eigen::VectorXd& b) const { return llt_.solve(b); }

}  // namespace gridflow
