#pragma once

#include <vector>

#include "gridflow/sparse_program.hpp"

namespace gridflow::kernels {

// Lower-triangular Hessian layout. `values` positions follow the storage order
// of a column-major compressed sparse matrix so they can be copied straight
// into the factorization.
struct HessianPattern {
  int n = 0;
  std::vector<int> outer;  // column starts, size n+1
  std::vector<int> inner;  // row indices per stored entry
  std::vector<int> diag;   // position of (j,j)

  // Outer-product contributions w_i * jv[p] * jv[q] for entry e live in
  // [pair_ptr[e], pair_ptr[e+1]).
  std::vector<int> pair_ptr;
  std::vector<int> pair_row;
  std::vector<int> pair_p;
  std::vector<int> pair_q;

  // Curvature contributions d_i * 2 quad[p] to diagonal j live in
  // [curv_ptr[j], curv_ptr[j+1]).
  std::vector<int> curv_ptr;
  std::vector<int> curv_row;
  std::vector<int> curv_p;

  int nnz() const { return static_cast<int>(inner.size()); }
};

HessianPattern build_hessian_pattern(const SparseQcqp& p);

// Column view of the CSR rows, used to accumulate J^T v deterministically.
struct ColumnIndex {
  std::vector<int> ptr;
  std::vector<int> entry;
  std::vector<int> row;
};

ColumnIndex build_column_index(const SparseQcqp& p);

// g_i(z) for all rows.
void eval_rows_serial(const SparseQcqp& p, const double* z, double* g);
void eval_rows_omp(const SparseQcqp& p, const double* z, double* g);

// d g_i / d z_col for every stored entry: lin + 2 quad z_col.
void jacobian_values_serial(const SparseQcqp& p, const double* z, double* jv);
void jacobian_values_omp(const SparseQcqp& p, const double* z, double* jv);

// out_j = sum_i coef_i * jv(i, j)
void accumulate_columns_serial(const ColumnIndex& c, const double* jv, const double* coef, int n,
                               double* out);
void accumulate_columns_omp(const ColumnIndex& c, const double* jv, const double* coef, int n,
                            double* out);

// H = sum_i w_i a_i a_i^T + sum_i d_i diag(2 quad_i) + diag(extra)
void assemble_hessian_serial(const HessianPattern& h, const SparseQcqp& p, const double* jv,
                             const double* w, const double* d, const double* extra,
                             double* values);
void assemble_hessian_omp(const HessianPattern& h, const SparseQcqp& p, const double* jv,
                          const double* w, const double* d, const double* extra, double* values);

int max_threads();

}  // namespace gridflow::kernels
