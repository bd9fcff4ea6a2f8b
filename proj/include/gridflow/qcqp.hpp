#pragma once

#include <string>
#include <vector>

#include "gridflow/sparse_program.hpp"

namespace gridflow {

// gamma(x) = rho x - r x^2, cost c(x) = c_lin x + c_quad x^2
struct QcqpArc {
  int tail = 0;
  int head = 0;
  double rho = 1.0;
  double r = 0.0;
  double u = 1.0;
  double c_lin = 0.0;
  double c_quad = 0.0;
  bool operator==(const QcqpArc&) const = default;
};

double gamma(const QcqpArc& a, double x);
double gamma_prime(const QcqpArc& a, double x);
// Smaller root of gamma(x) = y; y must lie in [0, gamma(u)].
double gamma_inverse(const QcqpArc& a, double y);
double arc_cost(const QcqpArc& a, double x);
// Minimum slope of gamma on [0, u].
double iota(const QcqpArc& a);

// Min-cost generalized flow with quadratic losses. Node ids are 0..num_nodes-1.
struct QcqpInstance {
  int num_nodes = 1;
  int source = 0;  // s*
  std::vector<QcqpArc> arcs;
  std::vector<int> sinks;
  std::vector<double> demand;  // parallel to sinks
  double hardening = 0.0;      // added to every residual

  int num_arcs() const { return static_cast<int>(arcs.size()); }
  int num_vars() const { return 2 * num_arcs(); }
  std::vector<int> transit_nodes() const;
  int num_constraints() const;
  bool operator==(const QcqpInstance&) const = default;
};

// Throws ValidationError describing the first structural problem found.
void validate_qcqp(const QcqpInstance& inst);

struct FlowPoint {
  std::vector<double> x;
  std::vector<double> y;

  static FlowPoint zeros(int arcs) { return {std::vector<double>(arcs, 0.0), std::vector<double>(arcs, 0.0)}; }
  std::size_t size() const { return x.size(); }
  bool operator==(const FlowPoint&) const = default;
};

// Variable layout: z[2a] = x_a, z[2a+1] = y_a.
inline int x_var(int a) { return 2 * a; }
inline int y_var(int a) { return 2 * a + 1; }
std::vector<double> pack(const FlowPoint& f);
FlowPoint unpack(const std::vector<double>& z, int arcs);

enum class RowFamily { Loss, Capacity, NonNegativity, Conservation, Demand };

// What a canonical constraint row refers to: the arc id for the first three
// families, the node id for conservation, the position in `sinks` for demand.
struct RowLabel {
  RowFamily family;
  int index;
};

std::vector<RowLabel> row_labels(const QcqpInstance& inst);
std::string family_name(RowFamily f);

// Canonical row order: loss, capacity, non-negativity (by arc), conservation
// (by transit node id), demand (by sink position).
SparseQcqp to_program(const QcqpInstance& inst);

struct Evaluation {
  double objective = 0.0;
  std::vector<double> residuals;
  double max_residual() const;
  bool feasible() const { return max_residual() <= 0.0; }
};

Evaluation evaluate(const QcqpInstance& inst, const FlowPoint& z);
double objective(const QcqpInstance& inst, const FlowPoint& z);

struct Derivatives {
  std::vector<double> obj_grad;
  std::vector<double> obj_hess_diag;
  // constraint gradients, CSR over canonical rows
  std::vector<int> row_ptr;
  std::vector<int> cols;
  std::vector<double> grad;
  std::vector<double> hess_diag;  // d^2 g_i / d z_col^2 for the same entries
};

Derivatives derivatives(const QcqpInstance& inst, const FlowPoint& z);

QcqpInstance harden(const QcqpInstance& inst, double eps);

// min s  s.t. g_i(z) + eps <= s. The slack variable is the last column.
struct SlackProgram {
  SparseQcqp program;
  int slack = 0;
};

SlackProgram slack_program(const SparseQcqp& p, double eps);
SlackProgram slack_program(const QcqpInstance& inst, double eps);

struct InstanceConstants {
  double sigma = 0.0;
  double W = 0.0;
  double F = 0.0;
  double iota_product = 1.0;
  double c_prime_max = 0.0;
  double c_prime_min = 0.0;
  double gamma_bound = 0.0;  // sqrt(2|A|)
  double R_bound = 0.0;      // sqrt(2|A|) u_max
  double M_bound = 0.0;      // sum_a c_a(u_a)
  double u_max = 0.0;
  double d_max = 0.0;
  double perturbation_factor = 0.0;  // c'_max (|V| + 3|A|) prod iota^-1

  double q_eps(double eps) const { return eps / (1.0 + perturbation_factor); }
};

InstanceConstants constants(const QcqpInstance& inst);

}  // namespace gridflow
