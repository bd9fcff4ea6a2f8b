#include "gridflow/qcqp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gridflow/error.hpp"
#include "gridflow/kernels.hpp"

namespace gridflow {

double gamma(const QcqpArc& a, double x) { return (a.rho - a.r * x) * x; }

double gamma_prime(const QcqpArc& a, double x) { return a.rho - 2.0 * a.r * x; }

double gamma_inverse(const QcqpArc& a, double y) {
  if (y <= 0.0) return 0.0;
  if (a.r == 0.0) return y / a.rho;
  double disc = a.rho * a.rho - 4.0 * a.r * y;
  if (disc < 0.0) disc = 0.0;
  // rationalised smaller root, stable for small r y
  return 2.0 * y / (a.rho + std::sqrt(disc));
}

double arc_cost(const QcqpArc& a, double x) { return (a.c_lin + a.c_quad * x) * x; }

double iota(const QcqpArc& a) { return a.rho - 2.0 * a.r * a.u; }

std::vector<int> QcqpInstance::transit_nodes() const {
  std::vector<char> special(num_nodes, 0);
  if (source >= 0 && source < num_nodes) special[source] = 1;
  for (int s : sinks)
    if (s >= 0 && s < num_nodes) special[s] = 1;
  std::vector<int> out;
  for (int v = 0; v < num_nodes; ++v)
    if (!special[v]) out.push_back(v);
  return out;
}

int QcqpInstance::num_constraints() const {
  return 3 * num_arcs() + static_cast<int>(transit_nodes().size()) + static_cast<int>(sinks.size());
}

void validate_qcqp(const QcqpInstance& inst) {
  if (inst.num_nodes < 1) throw ValidationError("instance needs at least the super-source");
  if (inst.source < 0 || inst.source >= inst.num_nodes) throw ValidationError("bad super-source id");
  if (inst.sinks.size() != inst.demand.size()) throw ValidationError("sinks and demands differ in length");
  if (!(inst.hardening >= 0.0)) throw ValidationError("hardening must be >= 0");
  std::vector<int> indeg(inst.num_nodes, 0), outdeg(inst.num_nodes, 0);
  for (std::size_t k = 0; k < inst.arcs.size(); ++k) {
    const auto& a = inst.arcs[k];
    std::string where = "arc " + std::to_string(k) + ": ";
    if (a.tail < 0 || a.head < 0 || a.tail >= inst.num_nodes || a.head >= inst.num_nodes)
      throw ValidationError(where + "endpoint out of range");
    if (a.tail == a.head) throw ValidationError(where + "self-loop");
    if (!(a.rho > 0.0 && a.rho <= 1.0)) throw ValidationError(where + "rho must lie in (0,1]");
    if (!(a.r >= 0.0)) throw ValidationError(where + "r must be >= 0");
    if (!(a.u > 0.0) || !std::isfinite(a.u)) throw ValidationError(where + "u must be positive and finite");
    if (!(a.c_lin >= 0.0) || !(a.c_quad >= 0.0)) throw ValidationError(where + "costs must be >= 0");
    if (!(iota(a) > 0.0)) throw ValidationError(where + "gamma not strictly increasing on [0,u]");
    ++outdeg[a.tail];
    ++indeg[a.head];
  }
  std::vector<char> is_sink(inst.num_nodes, 0);
  for (std::size_t k = 0; k < inst.sinks.size(); ++k) {
    int s = inst.sinks[k];
    if (s < 0 || s >= inst.num_nodes || s == inst.source) throw ValidationError("bad sink id");
    if (is_sink[s]) throw ValidationError("duplicate sink");
    is_sink[s] = 1;
    if (!(inst.demand[k] >= 0.0) || !std::isfinite(inst.demand[k]))
      throw ValidationError("demands must be finite and >= 0");
    if (outdeg[s] > 0) throw ValidationError("sink " + std::to_string(s) + " has out-arcs");
  }
  for (int v = 0; v < inst.num_nodes; ++v)
    if (v != inst.source && indeg[v] == 0)
      throw ValidationError("node " + std::to_string(v) + " has no in-arc");
}

std::vector<double> pack(const FlowPoint& f) {
  std::vector<double> z(2 * f.x.size());
  for (std::size_t a = 0; a < f.x.size(); ++a) {
    z[2 * a] = f.x[a];
    z[2 * a + 1] = f.y[a];
  }
  return z;
}

FlowPoint unpack(const std::vector<double>& z, int arcs) {
  FlowPoint f = FlowPoint::zeros(arcs);
  for (int a = 0; a < arcs; ++a) {
    f.x[a] = z[2 * a];
    f.y[a] = z[2 * a + 1];
  }
  return f;
}

std::vector<RowLabel> row_labels(const QcqpInstance& inst) {
  std::vector<RowLabel> out;
  const int A = inst.num_arcs();
  for (int a = 0; a < A; ++a) out.push_back({RowFamily::Loss, a});
  for (int a = 0; a < A; ++a) out.push_back({RowFamily::Capacity, a});
  for (int a = 0; a < A; ++a) out.push_back({RowFamily::NonNegativity, a});
  for (int v : inst.transit_nodes()) out.push_back({RowFamily::Conservation, v});
  for (int k = 0; k < static_cast<int>(inst.sinks.size()); ++k) out.push_back({RowFamily::Demand, k});
  return out;
}

std::string family_name(RowFamily f) {
  switch (f) {
    case RowFamily::Loss: return "loss";
    case RowFamily::Capacity: return "capacity";
    case RowFamily::NonNegativity: return "nonnegativity";
    case RowFamily::Conservation: return "conservation";
    case RowFamily::Demand: return "demand";
  }
  return "?";
}

SparseQcqp to_program(const QcqpInstance& inst) {
  const int A = inst.num_arcs();
  const double h = inst.hardening;
  SparseQcqp p(2 * A);
  for (int a = 0; a < A; ++a) {
    p.obj_lin[x_var(a)] = inst.arcs[a].c_lin;
    p.obj_quad[x_var(a)] = inst.arcs[a].c_quad;
  }
  for (int a = 0; a < A; ++a)
    p.add_row({{x_var(a), -inst.arcs[a].rho, inst.arcs[a].r}, {y_var(a), 1.0, 0.0}}, h);
  for (int a = 0; a < A; ++a) p.add_row({{x_var(a), 1.0, 0.0}}, h - inst.arcs[a].u);
  for (int a = 0; a < A; ++a) p.add_row({{y_var(a), -1.0, 0.0}}, h);

  std::vector<std::vector<int>> out(inst.num_nodes), in(inst.num_nodes);
  for (int a = 0; a < A; ++a) {
    out[inst.arcs[a].tail].push_back(a);
    in[inst.arcs[a].head].push_back(a);
  }
  for (int v : inst.transit_nodes()) {
    std::vector<SparseQcqp::Entry> row;
    for (int a : out[v]) row.push_back({x_var(a), 1.0, 0.0});
    for (int a : in[v]) row.push_back({y_var(a), -1.0, 0.0});
    p.add_row(row, h);
  }
  for (std::size_t k = 0; k < inst.sinks.size(); ++k) {
    std::vector<SparseQcqp::Entry> row;
    for (int a : in[inst.sinks[k]]) row.push_back({y_var(a), -1.0, 0.0});
    p.add_row(row, h + inst.demand[k]);
  }
  return p;
}

double Evaluation::max_residual() const {
  double m = -std::numeric_limits<double>::infinity();
  for (double r : residuals) m = std::max(m, r);
  return residuals.empty() ? 0.0 : m;
}

Evaluation evaluate(const QcqpInstance& inst, const FlowPoint& z) {
  if (static_cast<int>(z.x.size()) != inst.num_arcs() || z.y.size() != z.x.size())
    throw ParameterError("flow point dimension does not match the instance");
  SparseQcqp p = to_program(inst);
  std::vector<double> v = pack(z);
  Evaluation e;
  e.objective = p.objective(v.data());
  e.residuals.resize(p.rows());
  kernels::eval_rows_serial(p, v.data(), e.residuals.data());
  return e;
}

double objective(const QcqpInstance& inst, const FlowPoint& z) {
  double acc = 0.0;
  for (int a = 0; a < inst.num_arcs(); ++a) acc += arc_cost(inst.arcs[a], z.x[a]);
  return acc;
}

Derivatives derivatives(const QcqpInstance& inst, const FlowPoint& z) {
  SparseQcqp p = to_program(inst);
  std::vector<double> v = pack(z);
  Derivatives d;
  d.obj_grad.resize(p.n);
  d.obj_hess_diag.resize(p.n);
  for (int j = 0; j < p.n; ++j) {
    d.obj_grad[j] = p.obj_lin[j] + 2.0 * p.obj_quad[j] * v[j];
    d.obj_hess_diag[j] = 2.0 * p.obj_quad[j];
  }
  d.row_ptr = p.row_ptr;
  d.cols = p.cols;
  d.grad.resize(p.nnz());
  kernels::jacobian_values_serial(p, v.data(), d.grad.data());
  d.hess_diag.resize(p.nnz());
  for (int k = 0; k < p.nnz(); ++k) d.hess_diag[k] = 2.0 * p.quad[k];
  return d;
}

QcqpInstance harden(const QcqpInstance& inst, double eps) {
  if (!(eps >= 0.0) || !std::isfinite(eps)) throw ParameterError("hardening eps must be >= 0");
  QcqpInstance out = inst;
  out.hardening += eps;
  return out;
}

SlackProgram slack_program(const SparseQcqp& p, double eps) {
  if (!(eps >= 0.0)) throw ParameterError("slack eps must be >= 0");
  SlackProgram s{p, 0};
  s.program.shift_rows(eps);
  std::fill(s.program.obj_lin.begin(), s.program.obj_lin.end(), 0.0);
  std::fill(s.program.obj_quad.begin(), s.program.obj_quad.end(), 0.0);
  s.program.obj_const = 0.0;
  s.slack = s.program.append_column_in_all_rows(-1.0);
  s.program.obj_lin[s.slack] = 1.0;
  return s;
}

SlackProgram slack_program(const QcqpInstance& inst, double eps) {
  return slack_program(to_program(inst), eps);
}

InstanceConstants constants(const QcqpInstance& inst) {
  InstanceConstants c;
  const int A = inst.num_arcs();
  double u2 = 0.0, cl_max = 0.0, cq_max = 0.0, r_max = 0.0, log_iota = 0.0;
  c.c_prime_min = std::numeric_limits<double>::infinity();
  for (const auto& a : inst.arcs) {
    if (!(iota(a) > 0.0))
      throw InvariantError("arc with 2 r u >= rho: loss slope undefined");
    u2 += a.u * a.u;
    cl_max = std::max(cl_max, a.c_lin);
    cq_max = std::max(cq_max, a.c_quad);
    r_max = std::max(r_max, a.r);
    c.u_max = std::max(c.u_max, a.u);
    c.c_prime_max = std::max(c.c_prime_max, a.c_lin + 2.0 * a.c_quad * a.u);
    c.M_bound += arc_cost(a, a.u);
    log_iota -= std::log(iota(a));
  }
  for (double d : inst.demand) c.d_max = std::max(c.d_max, d);
  c.iota_product = std::exp(log_iota);
  c.sigma = std::sqrt(2.0 * u2);
  const double root = std::sqrt(2.0 * A);
  c.gamma_bound = root;
  c.R_bound = root * c.u_max;
  const double s = c.sigma;
  c.W = std::max({root * cl_max * s + cq_max * s * s, 2.0 * s + r_max * s * s, s + c.u_max,
                  root * s + c.d_max});

  // F: cheapest production unit times total demand
  double total_demand = 0.0;
  for (double d : inst.demand) total_demand += d;
  double cheapest = std::numeric_limits<double>::infinity();
  bool others_free = true;
  double global_min = std::numeric_limits<double>::infinity();
  for (const auto& a : inst.arcs) {
    global_min = std::min(global_min, a.c_lin);
    if (a.tail == inst.source)
      cheapest = std::min(cheapest, a.c_lin);
    else if (a.c_lin != 0.0 || a.c_quad != 0.0)
      others_free = false;
  }
  c.F = std::isfinite(cheapest) ? cheapest * total_demand : 0.0;
  if (A == 0)
    c.c_prime_min = 0.0;
  else
    c.c_prime_min = (others_free && std::isfinite(cheapest)) ? cheapest : global_min;
  const double size = static_cast<double>(inst.num_nodes + 3 * A);
  c.perturbation_factor = c.c_prime_max * size * c.iota_product;
  return c;
}

}  // namespace gridflow
