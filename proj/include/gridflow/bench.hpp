#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "gridflow/grid.hpp"
#include "gridflow/postprocess.hpp"
#include "gridflow/solver.hpp"

namespace gridflow {

enum class Family { Cycle, CircularLadder, Complete };

Family parse_family(const std::string& s);
std::string family_name(Family f);
int family_minimum(Family f);  // smallest node count
// Node count closest to n (from below) that the family can realise.
int family_size(Family f, int n);

// Random laws of the generator; U[a, b] everywhere.
struct GeneratorLaws {
  double horizon = 1.0;
  int demand_breakpoints = 3;   // shared by all nodes of an instance
  double demand_lo = 1.0, demand_hi = 2.0;
  double supply_factor = 2.0;   // bhat = factor * T * max demand
  double pi_bp_lo = 0.25, pi_bp_hi = 0.75;  // breakpoint as a fraction of bhat
  double pi_low_lo = 1.0, pi_low_hi = 2.0;
  double pi_high_lo = 2.0, pi_high_hi = 4.0;
  double cap_lo = 1.0, cap_hi = 5.0;
  double r_times_u = 0.4;       // r ~ U[0, r_times_u / u]
};

Upgg generate_bench_instance(Family f, int n, std::uint64_t seed, const GeneratorLaws& laws = {});

struct PolyFit {
  std::vector<double> coef;  // c0 + c1 x + c2 x^2 ...
  double rss = 0.0;
};

// Least squares via normal equations on scaled columns. Throws ParameterError
// for too few points and NumericalError on rank deficiency.
PolyFit polyfit(const std::vector<double>& x, const std::vector<double>& y, int degree);

double median(std::vector<double> v);  // ignores NaN entries; NaN if none left

struct BenchSpec {
  Family family = Family::Cycle;
  int n_max = 20;
  int points = 3;  // N
  int reps = 1;    // M
  std::uint64_t seed = 1;
  std::vector<int> fit_degrees{1, 2};
  double eps_rel = 1e-2;
  int threads = 1;  // > 1 runs the OpenMP kernels
  GeneratorLaws laws;
};

void check_spec(const BenchSpec& s);
// N equidistant sizes from the family minimum to n_max, strictly increasing.
std::vector<int> sample_sizes(const BenchSpec& s);
// Seeded permutation of all (point, rep) runs.
std::vector<std::pair<int, int>> execution_order(const BenchSpec& s);
std::uint64_t run_seed(const BenchSpec& s, int point, int rep);

struct PipelineResult {
  DynamicFlow flow;
  SolveReport report;
  int qcqp_nodes = 0;
  int qcqp_arcs = 0;
};

// Practical pipeline: build, barrier solve to eps_rel * F, keep grid-edge
// flows, drop the weaker arc of antiparallel pairs.
PipelineResult bench_pipeline(const Upgg& g, double eps_rel, const BarrierConfig& cfg);

struct RunOutcome {
  double seconds = 0.0;
  int qcqp_nodes = 0;
  int qcqp_arcs = 0;
};

using BenchRunner = std::function<RunOutcome(const Upgg&)>;

struct BenchRow {
  int n = 0;
  int nodes = 0;
  int arcs = 0;
  double median_s = 0.0;
  std::vector<double> raw;  // by repetition, NaN for failed runs
};

struct BenchResult {
  std::vector<BenchRow> rows;
  std::vector<std::pair<int, PolyFit>> fits;  // degree -> fit
  int failures = 0;
  std::vector<std::pair<int, int>> order;
};

BenchResult run_bench(const BenchSpec& s, const BenchRunner& runner = {});
std::string bench_csv(const BenchSpec& s, const BenchResult& r);
std::string fit_summary(const BenchResult& r);

}  // namespace gridflow
