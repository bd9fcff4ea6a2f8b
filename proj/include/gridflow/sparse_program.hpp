#pragma once

#include <vector>

namespace gridflow {

// Separable quadratic program: every function is
//   sum_j lin_j z_j + quad_j z_j^2 + const,
// constraints stored row-wise in CSR form as g_i(z) <= 0.
struct SparseQcqp {
  struct Entry {
    int col;
    double lin;
    double quad;
  };

  int n = 0;
  std::vector<double> obj_lin;
  std::vector<double> obj_quad;
  double obj_const = 0.0;

  std::vector<int> row_ptr{0};
  std::vector<int> cols;
  std::vector<double> lin;
  std::vector<double> quad;
  std::vector<double> offset;

  explicit SparseQcqp(int nvars = 0) : n(nvars), obj_lin(nvars, 0.0), obj_quad(nvars, 0.0) {}

  int rows() const { return static_cast<int>(offset.size()); }
  int nnz() const { return static_cast<int>(cols.size()); }
  void add_row(const std::vector<Entry>& entries, double constant);

  double objective(const double* z) const;
  double row_value(int i, const double* z) const;

  // Adds a new variable with coefficient `coef` in every row; returns its index.
  int append_column_in_all_rows(double coef);
  // Shifts every row constant by `eps`.
  void shift_rows(double eps);
};

}  // namespace gridflow
