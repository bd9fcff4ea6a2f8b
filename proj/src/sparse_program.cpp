#include "gridflow/sparse_program.hpp"

namespace gridflow {

void SparseQcqp::add_row(const std::vector<Entry>& entries, double constant) {
  for (const auto& e : entries) {
    cols.push_back(e.col);
    lin.push_back(e.lin);
    quad.push_back(e.quad);
  }
  row_ptr.push_back(static_cast<int>(cols.size()));
  offset.push_back(constant);
}

double SparseQcqp::objective(const double* z) const {
  double acc = obj_const;
  for (int j = 0; j < n; ++j) acc += (obj_lin[j] + obj_quad[j] * z[j]) * z[j];
  return acc;
}

double SparseQcqp::row_value(int i, const double* z) const {
  double acc = offset[i];
  for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
    double v = z[cols[p]];
    acc += (lin[p] + quad[p] * v) * v;
  }
  return acc;
}

int SparseQcqp::append_column_in_all_rows(double coef) {
  const int col = n++;
  obj_lin.push_back(0.0);
  obj_quad.push_back(0.0);
  std::vector<int> nptr{0};
  std::vector<int> ncols;
  std::vector<double> nlin, nquad;
  ncols.reserve(cols.size() + offset.size());
  nlin.reserve(ncols.capacity());
  nquad.reserve(ncols.capacity());
  for (int i = 0; i < rows(); ++i) {
    for (int p = row_ptr[i]; p < row_ptr[i + 1]; ++p) {
      ncols.push_back(cols[p]);
      nlin.push_back(lin[p]);
      nquad.push_back(quad[p]);
    }
    ncols.push_back(col);
    nlin.push_back(coef);
    nquad.push_back(0.0);
    nptr.push_back(static_cast<int>(ncols.size()));
  }
  row_ptr = std::move(nptr);
  cols = std::move(ncols);
  lin = std::move(nlin);
  quad = std::move(nquad);
  return col;
}

void SparseQcqp::shift_rows(double eps) {
  for (double& c : offset) c += eps;
}

}  // namespace gridflow
