#include "gridflow/bench.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "gridflow/error.hpp"
#include "gridflow/reduce.hpp"

namespace gridflow {

Family parse_family(const std::string& s) {
  if (s == "cycle") return Family::Cycle;
  if (s == "circular-ladder" || s == "ladder") return Family::CircularLadder;
  if (s == "complete") return Family::Complete;
  throw ParameterError("unknown graph family '" + s + "'");
}

std::string family_name(Family f) {
  switch (f) {
    case Family::Cycle: return "cycle";
    case Family::CircularLadder: return "circular-ladder";
    case Family::Complete: return "complete";
  }
  return "?";
}

int family_minimum(Family f) {
  switch (f) {
    case Family::Cycle: return 3;
    case Family::CircularLadder: return 6;
    case Family::Complete: return 2;
  }
  return 1;
}

int family_size(Family f, int n) {
  int m = std::max(n, family_minimum(f));
  if (f == Family::CircularLadder) m -= m % 2;
  return m;
}

Upgg generate_bench_instance(Family f, int n, std::uint64_t seed, const GeneratorLaws& laws) {
  if (n < family_minimum(f)) throw ParameterError("too few nodes for the " + family_name(f) + " family");
  if (f == Family::CircularLadder && n % 2 != 0) throw ParameterError("a circular ladder needs an even node count");
  std::mt19937_64 rng(seed);
  auto U = [&rng](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  const double T = laws.horizon;

  Upgg g;
  g.horizon = T;
  std::vector<double> bps;
  for (int i = 0; i < laws.demand_breakpoints; ++i) bps.push_back(U(0.0, T));
  std::sort(bps.begin(), bps.end());
  for (int v = 0; v < n; ++v) {
    GridNode node;
    node.id = "v" + std::to_string(v);
    std::vector<double> vals;
    for (std::size_t i = 0; i <= bps.size(); ++i) vals.push_back(U(laws.demand_lo, laws.demand_hi));
    node.demand = PiecewiseConstantFn(bps, vals, T);
    const double bhat = laws.supply_factor * T * node.demand.supremum();
    node.supply.cumulative_cap = bhat;
    double bp = U(laws.pi_bp_lo, laws.pi_bp_hi) * bhat;
    double lo = U(laws.pi_low_lo, laws.pi_low_hi), hi = U(laws.pi_high_lo, laws.pi_high_hi);
    node.supply.pi = PiecewiseConstantFn({bp}, {lo, std::max(lo, hi)}, bhat);
    g.nodes.push_back(std::move(node));
  }
  auto edge = [&](int u, int v) {
    double cap = U(laws.cap_lo, laws.cap_hi);
    double r = U(0.0, laws.r_times_u / cap);
    g.edges.push_back({"e" + std::to_string(g.edges.size()), u, v, cap, r});
  };
  switch (f) {
    case Family::Cycle:
      for (int v = 0; v < n; ++v) edge(v, (v + 1) % n);
      break;
    case Family::CircularLadder: {
      const int h = n / 2;
      for (int i = 0; i < h; ++i) edge(i, (i + 1) % h);
      for (int i = 0; i < h; ++i) edge(h + i, h + (i + 1) % h);
      for (int i = 0; i < h; ++i) edge(i, h + i);
      break;
    }
    case Family::Complete:
      for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) edge(u, v);
      break;
  }
  return g;
}

PolyFit polyfit(const std::vector<double>& x, const std::vector<double>& y, int degree) {
  if (degree < 0) throw ParameterError("degree must be >= 0");
  if (x.size() != y.size()) throw ParameterError("x and y differ in length");
  const int n = static_cast<int>(x.size());
  const int d = degree + 1;
  if (n < d) throw ParameterError("polyfit needs at least degree + 1 points");
  double xs = 0.0;
  for (double v : x) xs = std::max(xs, std::abs(v));
  if (xs == 0.0) xs = 1.0;
  Eigen::MatrixXd V(n, d);
  for (int i = 0; i < n; ++i) {
    double t = x[i] / xs, p = 1.0;
    for (int j = 0; j < d; ++j, p *= t) V(i, j) = p;
  }
  Eigen::VectorXd col = V.colwise().norm().transpose();
  for (int j = 0; j < d; ++j) {
    if (!(col[j] > 0.0)) throw NumericalError("polyfit design matrix is rank deficient");
    V.col(j) /= col[j];
  }
  Eigen::VectorXd Y = Eigen::Map<const Eigen::VectorXd>(y.data(), n);
  Eigen::MatrixXd N = V.transpose() * V;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(N);
  Eigen::VectorXd piv = ldlt.vectorD();
  if (ldlt.info() != Eigen::Success || piv.minCoeff() <= 1e-13 * piv.maxCoeff())
    throw NumericalError("polyfit design matrix is rank deficient");
  Eigen::VectorXd c = ldlt.solve(V.transpose() * Y);
  // one refinement step against the normal equations' squared conditioning
  for (int it = 0; it < 2; ++it) c += ldlt.solve(V.transpose() * (Y - V * c));
  PolyFit out;
  out.coef.resize(d);
  double scale = 1.0;
  for (int j = 0; j < d; ++j, scale *= xs) out.coef[j] = c[j] / col[j] / scale;
  out.rss = (Y - V * c).squaredNorm();
  return out;
}

double median(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double a) { return std::isnan(a); }), v.end());
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

void check_spec(const BenchSpec& s) {
  if (s.points < 2) throw ParameterError("a benchmark needs at least 2 sample points");
  if (s.reps < 1) throw ParameterError("a benchmark needs at least 1 repetition");
  if (s.n_max < family_minimum(s.family))
    throw ParameterError("n_max is below the family minimum of " + std::to_string(family_minimum(s.family)));
  if (!(s.eps_rel > 0.0)) throw ParameterError("eps_rel must be positive");
}

std::vector<int> sample_sizes(const BenchSpec& s) {
  check_spec(s);
  const int lo = family_minimum(s.family);
  const int hi = family_size(s.family, s.n_max);
  std::vector<int> out;
  for (int i = 0; i < s.points; ++i) {
    double t = static_cast<double>(i) / (s.points - 1);
    int n = family_size(s.family, static_cast<int>(std::lround(lo + t * (hi - lo))));
    if (!out.empty() && n <= out.back())
      throw ParameterError("too many sample points for the size range; sizes would repeat");
    out.push_back(n);
  }
  return out;
}

std::vector<std::pair<int, int>> execution_order(const BenchSpec& s) {
  std::vector<std::pair<int, int>> order;
  for (int p = 0; p < s.points; ++p)
    for (int r = 0; r < s.reps; ++r) order.emplace_back(p, r);
  std::mt19937_64 rng(s.seed ^ 0x5bd1e995ULL);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

std::uint64_t run_seed(const BenchSpec& s, int point, int rep) {
  std::seed_seq seq{static_cast<std::uint32_t>(s.seed), static_cast<std::uint32_t>(s.seed >> 32),
                    static_cast<std::uint32_t>(point), static_cast<std::uint32_t>(rep)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

PipelineResult bench_pipeline(const Upgg& g, double eps_rel, const BarrierConfig& cfg) {
  BuiltQcqp b = build_qcqp(g);
  InstanceConstants c = constants(b.qcqp);
  double eps = c.F > 0.0 ? eps_rel * c.F : eps_rel;
  PipelineResult out;
  out.qcqp_nodes = b.qcqp.num_nodes;
  out.qcqp_arcs = b.qcqp.num_arcs();
  out.report = barrier_solve(b.qcqp, eps, cfg);
  out.flow = to_dynamic_flow(b, out.report.flow, {.merge = false, .round = false, .bench_rule = true});
  return out;
}

namespace {

RunOutcome default_run(const Upgg& g, const BenchSpec& s) {
  BarrierConfig cfg;
  cfg.aggressive = true;
  cfg.parallel = s.threads > 1;
  auto t0 = std::chrono::steady_clock::now();
  PipelineResult r = bench_pipeline(g, s.eps_rel, cfg);
  RunOutcome o;
  o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.qcqp_nodes = r.qcqp_nodes;
  o.qcqp_arcs = r.qcqp_arcs;
  return o;
}

}  // namespace

BenchResult run_bench(const BenchSpec& s, const BenchRunner& runner) {
  std::vector<int> sizes = sample_sizes(s);
  BenchResult res;
  res.order = execution_order(s);
  res.rows.resize(sizes.size());
  for (std::size_t p = 0; p < sizes.size(); ++p) {
    res.rows[p].n = sizes[p];
    res.rows[p].raw.assign(s.reps, std::numeric_limits<double>::quiet_NaN());
  }
  const int saved_threads = omp_get_max_threads();
  if (s.threads > 1) omp_set_num_threads(s.threads);
  for (auto [p, r] : res.order) {
    Upgg g = generate_bench_instance(s.family, sizes[p], run_seed(s, p, r), s.laws);
    try {
      RunOutcome o = runner ? runner(g) : default_run(g, s);
      res.rows[p].raw[r] = o.seconds;
      if (res.rows[p].nodes == 0) {
        res.rows[p].nodes = o.qcqp_nodes;
        res.rows[p].arcs = o.qcqp_arcs;
      }
    } catch (const Error&) {
      ++res.failures;
    }
  }
  if (s.threads > 1) omp_set_num_threads(saved_threads);

  std::vector<double> xs, ys;
  for (auto& row : res.rows) {
    row.median_s = median(row.raw);
    if (!std::isnan(row.median_s)) {
      xs.push_back(row.n);
      ys.push_back(row.median_s);
    }
  }
  for (int d : s.fit_degrees)
    if (static_cast<int>(xs.size()) >= d + 1) res.fits.emplace_back(d, polyfit(xs, ys, d));
  return res;
}

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream ss;
  ss.precision(9);
  ss << v;
  return ss.str();
}

}  // namespace

std::string bench_csv(const BenchSpec& s, const BenchResult& r) {
  std::ostringstream out;
  out << "family,n,nodes,arcs,median_s,raw_times\n";
  for (const auto& row : r.rows) {
    out << family_name(s.family) << ',' << row.n << ',' << row.nodes << ',' << row.arcs << ',' << num(row.median_s)
        << ',';
    for (std::size_t i = 0; i < row.raw.size(); ++i) out << (i ? ";" : "") << num(row.raw[i]);
    out << '\n';
  }
  return out.str();
}

std::string fit_summary(const BenchResult& r) {
  std::ostringstream out;
  for (const auto& [d, f] : r.fits) {
    out << "degree " << d << ":";
    for (double c : f.coef) out << ' ' << num(c);
    out << "  rss " << num(f.rss) << '\n';
  }
  out << "failed runs: " << r.failures << '\n';
  return out.str();
}

}  // namespace gridflow
