#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <vector>

#include "gridflow/kernels.hpp"
#include "gridflow/sparse_program.hpp"

namespace gridflow {

// Sparse symmetric Newton system for barrier functions over a separable
// program. The symbolic analysis is done once; every factorize() only
// refreshes numeric values.
class NewtonSystem {
 public:
  NewtonSystem(const SparseQcqp& p, bool parallel);

  const SparseQcqp& program() const { return p_; }
  int n() const { return p_.n; }
  int m() const { return p_.rows(); }

  void eval_rows(const double* z, double* g) const;
  void jacobian(const double* z, double* jv) const;
  // out = J^T coef
  void accumulate(const double* jv, const double* coef, double* out) const;
  // (J d)_i for a direction d
  void directional(const double* jv, const double* d, double* out) const;
  // sum_p quad_p d_col^2 per row
  void curvature(const double* d, double* out) const;

  // Assembles sum_i w_i a_i a_i^T + sum_i c_i diag(2 quad_i) + diag(extra) and
  // factorizes it, regularising the diagonal if needed. Returns the shift used.
  double factorize(const double* jv, const double* w, const double* c, const double* extra);
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

  bool parallel() const { return parallel_; }

 private:
  const SparseQcqp& p_;
  bool parallel_;
  kernels::HessianPattern pattern_;
  kernels::ColumnIndex columns_;
  Eigen::SparseMatrix<double> h_;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> llt_;
  std::vector<double> base_;
};

}  // namespace gridflow
