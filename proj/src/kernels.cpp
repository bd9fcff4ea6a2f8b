#include "gridflow/kernels.hpp"

#include <algorithm>
#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gridflow::kernels {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

HessianPattern build_hessian_pattern(const SparseQcqp& p) {
  HessianPattern h;
  h.n = p.n;
  const auto n = static_cast<std::int64_t>(p.n);
  auto key = [n](int r, int c) { return static_cast<std::int64_t>(c) * n + r; };

  std::vector<std::int64_t> keys;
  keys.reserve(static_cast<std::size_t>(p.n) + p.cols.size() * 2);
  for (int j = 0; j < p.n; ++j) keys.push_back(key(j, j));
  for (int i = 0; i < p.rows(); ++i)
    for (int a = p.row_ptr[i]; a < p.row_ptr[i + 1]; ++a)
      for (int b = a; b < p.row_ptr[i + 1]; ++b) {
        int r = std::max(p.cols[a], p.cols[b]);
        int c = std::min(p.cols[a], p.cols[b]);
        keys.push_back(key(r, c));
      }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

  h.outer.assign(p.n + 1, 0);
  h.inner.resize(keys.size());
  for (std::size_t e = 0; e < keys.size(); ++e) {
    int c = static_cast<int>(keys[e] / n);
    h.inner[e] = static_cast<int>(keys[e] % n);
    ++h.outer[c + 1];
  }
  for (int j = 0; j < p.n; ++j) h.outer[j + 1] += h.outer[j];
  auto position = [&](int r, int c) {
    auto first = h.inner.begin() + h.outer[c];
    auto last = h.inner.begin() + h.outer[c + 1];
    return static_cast<int>(std::lower_bound(first, last, r) - h.inner.begin());
  };
  h.diag.resize(p.n);
  for (int j = 0; j < p.n; ++j) h.diag[j] = position(j, j);

  // counting sort of pair contributions by target entry, keeping row order
  const int nnz = h.nnz();
  std::vector<int> target;
  std::vector<int> count(nnz + 1, 0);
  for (int i = 0; i < p.rows(); ++i)
    for (int a = p.row_ptr[i]; a < p.row_ptr[i + 1]; ++a)
      for (int b = a; b < p.row_ptr[i + 1]; ++b) {
        int e = position(std::max(p.cols[a], p.cols[b]), std::min(p.cols[a], p.cols[b]));
        target.push_back(e);
        ++count[e + 1];
      }
  for (int e = 0; e < nnz; ++e) count[e + 1] += count[e];
  h.pair_ptr = count;
  h.pair_row.resize(target.size());
  h.pair_p.resize(target.size());
  h.pair_q.resize(target.size());
  std::size_t t = 0;
  for (int i = 0; i < p.rows(); ++i)
    for (int a = p.row_ptr[i]; a < p.row_ptr[i + 1]; ++a)
      for (int b = a; b < p.row_ptr[i + 1]; ++b) {
        int slot = count[target[t++]]++;
        h.pair_row[slot] = i;
        h.pair_p[slot] = a;
        h.pair_q[slot] = b;
      }

  h.curv_ptr.assign(p.n + 1, 0);
  for (int a = 0; a < p.nnz(); ++a)
    if (p.quad[a] != 0.0) ++h.curv_ptr[p.cols[a] + 1];
  for (int j = 0; j < p.n; ++j) h.curv_ptr[j + 1] += h.curv_ptr[j];
  std::vector<int> fill(h.curv_ptr.begin(), h.curv_ptr.end() - 1);
  h.curv_row.resize(h.curv_ptr.back());
  h.curv_p.resize(h.curv_ptr.back());
  for (int i = 0; i < p.rows(); ++i)
    for (int a = p.row_ptr[i]; a < p.row_ptr[i + 1]; ++a)
      if (p.quad[a] != 0.0) {
        int slot = fill[p.cols[a]]++;
        h.curv_row[slot] = i;
        h.curv_p[slot] = a;
      }
  return h;
}

ColumnIndex build_column_index(const SparseQcqp& p) {
  ColumnIndex c;
  c.ptr.assign(p.n + 1, 0);
  for (int col : p.cols) ++c.ptr[col + 1];
  for (int j = 0; j < p.n; ++j) c.ptr[j + 1] += c.ptr[j];
  std::vector<int> fill(c.ptr.begin(), c.ptr.end() - 1);
  c.entry.resize(p.cols.size());
  c.row.resize(p.cols.size());
  for (int i = 0; i < p.rows(); ++i)
    for (int a = p.row_ptr[i]; a < p.row_ptr[i + 1]; ++a) {
      int slot = fill[p.cols[a]]++;
      c.entry[slot] = a;
      c.row[slot] = i;
    }
  return c;
}

namespace {

inline double row_at(const SparseQcqp& p, int i, const double* z) {
  double acc = p.offset[i];
  for (int a = p.row_ptr[i]; a < p.row_ptr[i + 1]; ++a) {
    double v = z[p.cols[a]];
    acc += (p.lin[a] + p.quad[a] * v) * v;
  }
  return acc;
}

inline double hess_entry(const HessianPattern& h, const SparseQcqp& p, const double* jv,
                         const double* w, int e) {
  double acc = 0.0;
  for (int k = h.pair_ptr[e]; k < h.pair_ptr[e + 1]; ++k)
    acc += w[h.pair_row[k]] * jv[h.pair_p[k]] * jv[h.pair_q[k]];
  (void)p;
  return acc;
}

inline double curvature(const HessianPattern& h, const SparseQcqp& p, const double* d, int j) {
  double acc = 0.0;
  for (int k = h.curv_ptr[j]; k < h.curv_ptr[j + 1]; ++k)
    acc += d[h.curv_row[k]] * 2.0 * p.quad[h.curv_p[k]];
  return acc;
}

}  // namespace

void eval_rows_serial(const SparseQcqp& p, const double* z, double* g) {
  const int m = p.rows();
  for (int i = 0; i < m; ++i) g[i] = row_at(p, i, z);
}

void eval_rows_omp(const SparseQcqp& p, const double* z, double* g) {
  const int m = p.rows();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m; ++i) g[i] = row_at(p, i, z);
}

void jacobian_values_serial(const SparseQcqp& p, const double* z, double* jv) {
  const int nnz = p.nnz();
  for (int a = 0; a < nnz; ++a) jv[a] = p.lin[a] + 2.0 * p.quad[a] * z[p.cols[a]];
}

void jacobian_values_omp(const SparseQcqp& p, const double* z, double* jv) {
  const int nnz = p.nnz();
#pragma omp parallel for schedule(static)
  for (int a = 0; a < nnz; ++a) jv[a] = p.lin[a] + 2.0 * p.quad[a] * z[p.cols[a]];
}

void accumulate_columns_serial(const ColumnIndex& c, const double* jv, const double* coef, int n,
                               double* out) {
  for (int j = 0; j < n; ++j) {
    double acc = 0.0;
    for (int k = c.ptr[j]; k < c.ptr[j + 1]; ++k) acc += coef[c.row[k]] * jv[c.entry[k]];
    out[j] = acc;
  }
}

void accumulate_columns_omp(const ColumnIndex& c, const double* jv, const double* coef, int n,
                            double* out) {
#pragma omp parallel for schedule(static)
  for (int j = 0; j < n; ++j) {
    double acc = 0.0;
    for (int k = c.ptr[j]; k < c.ptr[j + 1]; ++k) acc += coef[c.row[k]] * jv[c.entry[k]];
    out[j] = acc;
  }
}

void assemble_hessian_serial(const HessianPattern& h, const SparseQcqp& p, const double* jv,
                             const double* w, const double* d, const double* extra,
                             double* values) {
  const int nnz = h.nnz();
  for (int e = 0; e < nnz; ++e) values[e] = hess_entry(h, p, jv, w, e);
  for (int j = 0; j < h.n; ++j) values[h.diag[j]] += curvature(h, p, d, j) + extra[j];
}

void assemble_hessian_omp(const HessianPattern& h, const SparseQcqp& p, const double* jv,
                          const double* w, const double* d, const double* extra, double* values) {
  const int nnz = h.nnz();
#pragma omp parallel for schedule(dynamic, 256)
  for (int e = 0; e < nnz; ++e) values[e] = hess_entry(h, p, jv, w, e);
  const int n = h.n;
#pragma omp parallel for schedule(static)
  for (int j = 0; j < n; ++j) values[h.diag[j]] += curvature(h, p, d, j) + extra[j];
}

}  // namespace gridflow::kernels
