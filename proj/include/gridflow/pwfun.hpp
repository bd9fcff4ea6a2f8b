#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace gridflow {

// Right-continuous step function on [0, domain_end]. Piece i covers
// [start(i), end(i)), the last piece is closed at domain_end.
class PiecewiseConstantFn {
 public:
  PiecewiseConstantFn() = default;
  PiecewiseConstantFn(std::vector<double> breakpoints, std::vector<double> values,
                      double domain_end);

  static PiecewiseConstantFn constant(double value, double domain_end);

  double eval(double t) const;
  double integrate(double a, double b) const;
  double supremum() const;
  // Largest value attained on [a, b).
  double supremum(double a, double b) const;

  std::size_t pieces() const { return values_.size(); }
  double start(std::size_t i) const { return i == 0 ? 0.0 : breakpoints_[i - 1]; }
  double end(std::size_t i) const {
    return i + 1 == values_.size() ? domain_end_ : breakpoints_[i];
  }
  double value(std::size_t i) const { return values_[i]; }
  std::size_t piece_index(double t) const;

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& values() const { return values_; }
  double domain_end() const { return domain_end_; }

  bool is_non_decreasing() const;

  bool operator==(const PiecewiseConstantFn&) const = default;

 private:
  std::vector<double> breakpoints_;
  std::vector<double> values_{0.0};
  double domain_end_ = 1.0;
};

class TimeGrid {
 public:
  TimeGrid() = default;
  explicit TimeGrid(std::vector<double> boundaries);

  std::size_t size() const { return boundaries_.size() - 1; }
  double start(std::size_t i) const { return boundaries_[i]; }
  double end(std::size_t i) const { return boundaries_[i + 1]; }
  double length(std::size_t i) const { return boundaries_[i + 1] - boundaries_[i]; }
  double horizon() const { return boundaries_.back(); }
  std::size_t shortest() const;
  double min_length() const { return length(shortest()); }
  std::size_t index_of(double t) const;
  const std::vector<double>& boundaries() const { return boundaries_; }

  bool operator==(const TimeGrid&) const = default;

 private:
  std::vector<double> boundaries_{0.0, 1.0};
};

inline constexpr double kBreakpointTolerance = 1e-12;

TimeGrid common_refinement(const std::vector<PiecewiseConstantFn>& fs);
TimeGrid common_refinement(const std::vector<PiecewiseConstantFn>& fs, double horizon);

// A smooth demand curve given by evaluation, a Lipschitz bound and the points
// where it may fail to be differentiable.
struct DemandCurve {
  std::function<double(double)> fn;
  double lipschitz = 0.0;
  std::vector<double> breakpoints;
};

struct OverApproxConfig {
  double horizon = 1.0;
  double c_prime_max = 1.0;   // c_lin_max + 2 c_quad_max u_max of the target instance
  double iota_product = 1.0;  // prod_a iota_a^-1 of the target instance
  long long k_cap = 1'000'000;
  std::optional<long long> k_hint;
  int samples_per_piece = 16;
};

struct OverApproximation {
  TimeGrid grid;
  std::vector<PiecewiseConstantFn> fns;
  long long k = 0;
};

long long sufficient_piece_count(double c_prime_max, double horizon, double eps,
                                 double sum_lipschitz, double iota_product);

OverApproximation over_approximate(const std::vector<DemandCurve>& curves, double eps,
                                   const OverApproxConfig& cfg);

}  // namespace gridflow
