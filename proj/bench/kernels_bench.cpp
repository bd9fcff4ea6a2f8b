#include <benchmark/benchmark.h>

#include <map>
#include <random>
#include <vector>

#include "gridflow/bench.hpp"
#include "gridflow/kernels.hpp"
#include "gridflow/qcqp.hpp"
#include "gridflow/reduce.hpp"

namespace {

using namespace gridflow;

// Program of a generated cycle grid plus a random interior-ish point.
struct Fixture {
  SparseQcqp p;
  kernels::HessianPattern pattern;
  kernels::ColumnIndex columns;
  std::vector<double> z, g, jv, w, d, extra, out, values;

  explicit Fixture(int n) {
    p = to_program(build_qcqp(generate_bench_instance(Family::Cycle, n, 7)).qcqp);
    pattern = kernels::build_hessian_pattern(p);
    columns = kernels::build_column_index(p);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(0.1, 1.0);
    z.resize(p.n);
    for (double& v : z) v = U(rng);
    g.resize(p.rows());
    jv.resize(p.nnz());
    w.resize(p.rows());
    d.resize(p.rows());
    for (int i = 0; i < p.rows(); ++i) d[i] = U(rng), w[i] = d[i] * d[i];
    extra.assign(p.n, 1.0);
    out.resize(p.n);
    values.resize(pattern.nnz());
    kernels::jacobian_values_serial(p, z.data(), jv.data());
  }
};

Fixture& fixture(int n) {
  static std::map<int, Fixture*> cache;
  auto& f = cache[n];
  if (!f) f = new Fixture(n);
  return *f;
}

template <bool Omp>
void BM_EvalRows(benchmark::State& st) {
  Fixture& f = fixture(static_cast<int>(st.range(0)));
  for (auto _ : st) {
    if (Omp)
      kernels::eval_rows_omp(f.p, f.z.data(), f.g.data());
    else
      kernels::eval_rows_serial(f.p, f.z.data(), f.g.data());
    benchmark::DoNotOptimize(f.g.data());
  }
  st.counters["rows"] = f.p.rows();
}

template <bool Omp>
void BM_Jacobian(benchmark::State& st) {
  Fixture& f = fixture(static_cast<int>(st.range(0)));
  for (auto _ : st) {
    if (Omp)
      kernels::jacobian_values_omp(f.p, f.z.data(), f.jv.data());
    else
      kernels::jacobian_values_serial(f.p, f.z.data(), f.jv.data());
    benchmark::DoNotOptimize(f.jv.data());
  }
}

template <bool Omp>
void BM_Accumulate(benchmark::State& st) {
  Fixture& f = fixture(static_cast<int>(st.range(0)));
  for (auto _ : st) {
    if (Omp)
      kernels::accumulate_columns_omp(f.columns, f.jv.data(), f.d.data(), f.p.n, f.out.data());
    else
      kernels::accumulate_columns_serial(f.columns, f.jv.data(), f.d.data(), f.p.n, f.out.data());
    benchmark::DoNotOptimize(f.out.data());
  }
}

template <bool Omp>
void BM_Hessian(benchmark::State& st) {
  Fixture& f = fixture(static_cast<int>(st.range(0)));
  for (auto _ : st) {
    if (Omp)
      kernels::assemble_hessian_omp(f.pattern, f.p, f.jv.data(), f.w.data(), f.d.data(), f.extra.data(),
                                    f.values.data());
    else
      kernels::assemble_hessian_serial(f.pattern, f.p, f.jv.data(), f.w.data(), f.d.data(), f.extra.data(),
                                       f.values.data());
    benchmark::DoNotOptimize(f.values.data());
  }
  st.counters["threads"] = kernels::max_threads();
}

}  // namespace

BENCHMARK_TEMPLATE(BM_EvalRows, false)->Arg(200)->Arg(2000);
BENCHMARK_TEMPLATE(BM_EvalRows, true)->Arg(200)->Arg(2000);
BENCHMARK_TEMPLATE(BM_Jacobian, false)->Arg(200)->Arg(2000);
BENCHMARK_TEMPLATE(BM_Jacobian, true)->Arg(200)->Arg(2000);
BENCHMARK_TEMPLATE(BM_Accumulate, false)->Arg(200)->Arg(2000);
BENCHMARK_TEMPLATE(BM_Accumulate, true)->Arg(200)->Arg(2000);
BENCHMARK_TEMPLATE(BM_Hessian, false)->Arg(200)->Arg(2000);
BENCHMARK_TEMPLATE(BM_Hessian, true)->Arg(200)->Arg(2000);

BENCHMARK_MAIN();
