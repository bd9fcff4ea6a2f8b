#include "gridflow/pwfun.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gridflow/error.hpp"

namespace gridflow {

PiecewiseConstantFn::PiecewiseConstantFn(std::vector<double> breakpoints,
                                         std::vector<double> values, double domain_end)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)), domain_end_(domain_end) {
  if (!(domain_end_ > 0.0) || !std::isfinite(domain_end_))
    throw ValidationError("domain_end must be positive and finite");
  if (values_.size() != breakpoints_.size() + 1)
    throw ValidationError("need exactly one more value than breakpoints");
  for (std::size_t i = 0; i < breakpoints_.size(); ++i) {
    double b = breakpoints_[i];
    if (!(b > 0.0 && b < domain_end_))
      throw ValidationError("breakpoint " + std::to_string(i) + " outside (0, domain_end)");
    if (i > 0 && !(b > breakpoints_[i - 1]))
      throw ValidationError("breakpoints must be strictly increasing");
  }
  for (double v : values_)
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("values must be finite and >= 0");
}

PiecewiseConstantFn PiecewiseConstantFn::constant(double value, double domain_end) {
  return PiecewiseConstantFn({}, {value}, domain_end);
}

std::size_t PiecewiseConstantFn::piece_index(double t) const {
  if (!(t >= 0.0 && t <= domain_end_))
    throw DomainError("t = " + std::to_string(t) + " outside [0, " + std::to_string(domain_end_) + "]");
  // first breakpoint strictly greater than t
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  return static_cast<std::size_t>(it - breakpoints_.begin());
}

double PiecewiseConstantFn::eval(double t) const { return values_[piece_index(t)]; }

double PiecewiseConstantFn::integrate(double a, double b) const {
  if (!(a >= 0.0 && b <= domain_end_ && a <= b))
    throw DomainError("integration bounds must satisfy 0 <= a <= b <= domain_end");
  if (a == b) return 0.0;
  double acc = 0.0;
  for (std::size_t i = piece_index(a); i < values_.size(); ++i) {
    double lo = std::max(a, start(i));
    double hi = std::min(b, end(i));
    if (hi <= lo) {
      if (start(i) >= b) break;
      continue;
    }
    acc += values_[i] * (hi - lo);
  }
  return acc;
}

double PiecewiseConstantFn::supremum() const {
  return *std::max_element(values_.begin(), values_.end());
}

double PiecewiseConstantFn::supremum(double a, double b) const {
  if (!(a >= 0.0 && b <= domain_end_ && a < b)) throw DomainError("bad supremum interval");
  double best = 0.0;
  for (std::size_t i = piece_index(a); i < values_.size() && start(i) < b; ++i)
    best = std::max(best, values_[i]);
  return best;
}

bool PiecewiseConstantFn::is_non_decreasing() const {
  return std::is_sorted(values_.begin(), values_.end());
}

TimeGrid::TimeGrid(std::vector<double> boundaries) : boundaries_(std::move(boundaries)) {
  if (boundaries_.size() < 2 || boundaries_.front() != 0.0)
    throw ValidationError("time grid must start at 0 and contain an interval");
  for (std::size_t i = 1; i < boundaries_.size(); ++i)
    if (!(boundaries_[i] > boundaries_[i - 1]))
      throw ValidationError("time grid intervals must have positive length");
}

std::size_t TimeGrid::shortest() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < size(); ++i)
    if (length(i) < length(best)) best = i;
  return best;
}

std::size_t TimeGrid::index_of(double t) const {
  if (!(t >= 0.0 && t <= horizon())) throw DomainError("t outside the time grid");
  auto it = std::upper_bound(boundaries_.begin() + 1, boundaries_.end() - 1, t);
  return static_cast<std::size_t>(it - (boundaries_.begin() + 1));
}

TimeGrid common_refinement(const std::vector<PiecewiseConstantFn>& fs, double horizon) {
  std::vector<double> pts;
  for (const auto& f : fs) {
    if (std::abs(f.domain_end() - horizon) > kBreakpointTolerance)
      throw ParameterError("functions do not share the horizon");
    pts.insert(pts.end(), f.breakpoints().begin(), f.breakpoints().end());
  }
  std::sort(pts.begin(), pts.end());
  std::vector<double> bounds{0.0};
  for (double p : pts)
    if (p - bounds.back() > kBreakpointTolerance && horizon - p > kBreakpointTolerance)
      bounds.push_back(p);
  bounds.push_back(horizon);
  return TimeGrid(std::move(bounds));
}

TimeGrid common_refinement(const std::vector<PiecewiseConstantFn>& fs) {
  if (fs.empty()) throw ParameterError("common_refinement needs at least one function");
  return common_refinement(fs, fs.front().domain_end());
}

long long sufficient_piece_count(double c_prime_max, double horizon, double eps,
                                 double sum_lipschitz, double iota_product) {
  if (!(eps > 0.0)) throw ParameterError("eps must be positive");
  double k = c_prime_max * horizon / (eps / 2.0) * sum_lipschitz * iota_product;
  if (!std::isfinite(k)) return std::numeric_limits<long long>::max();
  // guard against 8.000000000001 style round-up
  double c = std::ceil(k * (1.0 - 1e-12));
  return std::max(1LL, static_cast<long long>(c));
}

OverApproximation over_approximate(const std::vector<DemandCurve>& curves, double eps,
                                   const OverApproxConfig& cfg) {
  if (!(eps > 0.0)) throw ParameterError("eps must be positive");
  if (curves.empty()) throw ParameterError("no demand curves given");
  const double T = cfg.horizon;
  double sum_omega = 0.0;
  std::vector<double> splits;
  for (const auto& c : curves) {
    if (!(c.lipschitz >= 0.0) || !std::isfinite(c.lipschitz))
      throw ParameterError("Lipschitz bound must be finite and >= 0");
    sum_omega += c.lipschitz;
    for (double b : c.breakpoints)
      if (b > 0.0 && b < T) splits.push_back(b);
  }
  long long k = cfg.k_hint ? *cfg.k_hint
                           : sufficient_piece_count(cfg.c_prime_max, T, eps, sum_omega, cfg.iota_product);
  if (k < 1) throw ParameterError("piece count must be >= 1");
  if (k > cfg.k_cap)
    throw PieceCountError("required piece count " + std::to_string(k) + " exceeds cap " +
                              std::to_string(cfg.k_cap),
                          k);

  std::sort(splits.begin(), splits.end());
  std::vector<double> pieces{0.0};
  for (double s : splits)
    if (s - pieces.back() > kBreakpointTolerance) pieces.push_back(s);
  pieces.push_back(T);

  std::vector<double> bounds{0.0};
  for (std::size_t p = 0; p + 1 < pieces.size(); ++p) {
    double a = pieces[p], b = pieces[p + 1];
    auto n = static_cast<long long>(std::ceil(static_cast<double>(k) * (b - a) / T - 1e-9));
    n = std::max(1LL, n);
    if (n > cfg.k_cap)
      throw PieceCountError("piece count exceeds cap", n);
    for (long long j = 1; j <= n; ++j)
      bounds.push_back(j == n ? b : a + (b - a) * static_cast<double>(j) / static_cast<double>(n));
  }
  TimeGrid grid(std::move(bounds));

  OverApproximation out;
  out.grid = grid;
  out.k = k;
  const int s = std::max(1, cfg.samples_per_piece);
  for (const auto& c : curves) {
    std::vector<double> vals(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      double lo = grid.start(i), hi = grid.end(i);
      double h = (hi - lo) / s;
      double prev = c.fn(lo);
      double best = prev;
      for (int j = 1; j <= s; ++j) {
        double t = j == s ? hi : lo + h * j;
        double cur = c.fn(t);
        // peak of the Lipschitz envelope between two samples
        best = std::max(best, 0.5 * (prev + cur + c.lipschitz * h));
        prev = cur;
      }
      vals[i] = std::max(0.0, best);
    }
    std::vector<double> bps(grid.boundaries().begin() + 1, grid.boundaries().end() - 1);
    out.fns.emplace_back(std::move(bps), std::move(vals), T);
  }
  return out;
}

}  // namespace gridflow
