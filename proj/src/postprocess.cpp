#include "gridflow/postprocess.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

#include "gridflow/error.hpp"

namespace gridflow {

namespace {

struct Adjacency {
  std::vector<std::vector<int>> out, in;
  std::vector<double> demand;  // sink demand, 0 elsewhere
};

Adjacency adjacency(const QcqpInstance& inst) {
  Adjacency g;
  g.out.resize(inst.num_nodes);
  g.in.resize(inst.num_nodes);
  g.demand.assign(inst.num_nodes, 0.0);
  for (int a = 0; a < inst.num_arcs(); ++a) {
    g.out[inst.arcs[a].tail].push_back(a);
    g.in[inst.arcs[a].head].push_back(a);
  }
  for (std::size_t s = 0; s < inst.sinks.size(); ++s) g.demand[inst.sinks[s]] += inst.demand[s];
  return g;
}

bool small(double v, double scale) { return std::abs(v) <= kWasteTolerance * (1.0 + std::abs(scale)); }

void check_shape(const QcqpInstance& inst, const FlowPoint& z) {
  if (z.x.size() != inst.arcs.size() || z.y.size() != inst.arcs.size())
    throw PreconditionError("flow point does not match the instance's arc count");
}

}  // namespace

double max_waste(const QcqpInstance& inst, const FlowPoint& z) {
  check_shape(inst, z);
  Adjacency g = adjacency(inst);
  double worst = 0.0;
  for (int a = 0; a < inst.num_arcs(); ++a) worst = std::max(worst, gamma(inst.arcs[a], z.x[a]) - z.y[a]);
  for (int v = 0; v < inst.num_nodes; ++v) {
    if (v == inst.source) continue;
    double net = -g.demand[v];
    for (int a : g.in[v]) net += z.y[a];
    for (int a : g.out[v]) net -= z.x[a];
    worst = std::max(worst, net);
  }
  return worst;
}

FlowPoint round_waste(const QcqpInstance& inst, const FlowPoint& z, RoundStats* stats) {
  check_shape(inst, z);
  {
    QcqpInstance plain = inst;
    plain.hardening = 0.0;
    Evaluation ev = evaluate(plain, z);
    double scale = 1.0;
    for (std::size_t a = 0; a < z.size(); ++a) scale = std::max({scale, std::abs(z.x[a]), std::abs(z.y[a])});
    if (ev.max_residual() > kWasteTolerance * scale)
      throw PreconditionError("rounding needs a feasible point (max residual " +
                              std::to_string(ev.max_residual()) + ")");
  }
  const int A = inst.num_arcs();
  const int V = inst.num_nodes;
  Adjacency g = adjacency(inst);
  FlowPoint w = z;
  for (int a = 0; a < A; ++a) {
    w.x[a] = std::max(w.x[a], 0.0);
    w.y[a] = w.x[a] > 0.0 ? std::max(w.y[a], 0.0) : 0.0;
  }
  RoundStats st;
  // each event clears the waste of one arc or node, or empties an arc
  const int budget = 4 * (2 * A + V) + 16;

  std::vector<int> parent(A);
  std::vector<double> q(A);
  std::vector<char> expanded(V);

  // Lowers y_b by d, then x_b to match, and hands the x decrease upstream.
  auto reduce_y = [&](int b, double d) {
    while (b >= 0 && d > 0.0) {
      const QcqpArc& arc = inst.arcs[b];
      w.y[b] = std::max(0.0, w.y[b] - d);
      double x_new = std::min(w.x[b], gamma_inverse(arc, w.y[b]));
      double old = w.x[b];
      if (x_new <= kWasteTolerance * (1.0 + old)) x_new = 0.0, w.y[b] = 0.0;
      d = old - x_new;
      w.x[b] = x_new;
      b = parent[b];
    }
  };

  for (;;) {
    std::fill(parent.begin(), parent.end(), -1);
    std::fill(q.begin(), q.end(), 0.0);
    std::fill(expanded.begin(), expanded.end(), 0);
    std::deque<int> queue;
    for (int a : g.out[inst.source])
      if (w.x[a] > 0.0) queue.push_back(a);
    bool event = false;

    while (!queue.empty() && !event) {
      const int a = queue.front();
      queue.pop_front();
      const QcqpArc& arc = inst.arcs[a];
      const int v = arc.head;
      const int p = parent[a];
      if (p < 0) {
        q[a] = w.x[a];
      } else {
        const QcqpArc& pa = inst.arcs[p];
        double room = w.y[p] - gamma(pa, std::max(0.0, w.x[p] - q[p]));
        q[a] = std::clamp(room, 0.0, w.x[a]);
      }

      double arc_waste = w.x[a] - gamma_inverse(arc, w.y[a]);
      if (arc_waste > 0.0 && !small(arc_waste, w.x[a])) {
        double d = std::min(q[a], arc_waste);
        w.x[a] -= d;
        if (w.x[a] <= kWasteTolerance) w.x[a] = 0.0, w.y[a] = 0.0;
        if (p >= 0) reduce_y(p, d);
        event = true;
        break;
      }
      if (expanded[v]) continue;
      expanded[v] = 1;

      double in = 0.0, out = 0.0;
      for (int b : g.in[v]) in += w.y[b];
      for (int b : g.out[v]) out += w.x[b];
      double excess = in - out - g.demand[v];
      if (excess > 0.0 && !small(excess, in)) {
        double room = w.y[a] - gamma(arc, std::max(0.0, w.x[a] - q[a]));
        double d = std::min(excess, std::max(room, 0.0));
        if (d > 0.0) {
          reduce_y(a, d);
          event = true;
          break;
        }
      }
      for (int b : g.out[v])
        if (w.x[b] > 0.0) {
          parent[b] = a;
          queue.push_back(b);
        }
    }
    if (!event) break;
    ++st.events;
    ++st.restarts;
    if (st.events > budget) throw InvariantError("waste removal did not terminate within its event budget");
  }
  if (stats) *stats = st;
  return w;
}

std::vector<std::pair<int, int>> antiparallel_pairs(const QcqpInstance& inst) {
  std::map<std::pair<int, int>, std::vector<int>> by_ends;
  for (int a = 0; a < inst.num_arcs(); ++a) by_ends[{inst.arcs[a].tail, inst.arcs[a].head}].push_back(a);
  std::vector<char> used(inst.arcs.size(), 0);
  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < inst.num_arcs(); ++a) {
    if (used[a]) continue;
    auto it = by_ends.find({inst.arcs[a].head, inst.arcs[a].tail});
    if (it == by_ends.end()) continue;
    for (int b : it->second)
      if (!used[b] && b != a) {
        used[a] = used[b] = 1;
        pairs.emplace_back(a, b);
        break;
      }
  }
  return pairs;
}

FlowPoint merge_antiparallel(const QcqpInstance& inst, const FlowPoint& z) {
  check_shape(inst, z);
  FlowPoint w = z;
  for (auto [a, b] : antiparallel_pairs(inst)) {
    // a < b, so a tie zeroes a
    int lo = w.y[a] <= w.y[b] ? a : b;
    int hi = lo == a ? b : a;
    if (w.x[lo] == 0.0 && w.y[lo] == 0.0) continue;
    w.x[hi] = std::max(0.0, w.x[hi] - w.y[lo]);
    w.y[hi] = gamma(inst.arcs[hi], w.x[hi]);
    w.x[lo] = w.y[lo] = 0.0;
  }
  return w;
}

FlowPoint delete_antiparallel(const QcqpInstance& inst, const FlowPoint& z) {
  check_shape(inst, z);
  FlowPoint w = z;
  for (auto [a, b] : antiparallel_pairs(inst)) {
    if (w.y[a] > w.x[b])
      w.x[b] = w.y[b] = 0.0;
    else if (w.y[b] > w.x[a])
      w.x[a] = w.y[a] = 0.0;
  }
  return w;
}

DynamicFlow to_dynamic_flow(const BuiltQcqp& built, const FlowPoint& z, const ExtractOptions& opt) {
  const QcqpInstance& inst = built.qcqp;
  check_shape(inst, z);
  if (built.prov.arcs.size() != inst.arcs.size())
    throw PreconditionError("provenance does not match the instance");
  FlowPoint p = z;
  if (opt.bench_rule) {
    p = delete_antiparallel(inst, p);
  } else {
    if (opt.merge) p = merge_antiparallel(inst, p);
    if (opt.round) p = round_waste(inst, p);
  }
  DynamicFlow f;
  f.objective = objective(inst, p);
  for (std::size_t i = 0; i < built.grid.size(); ++i)
    f.intervals.push_back({built.grid.start(i), built.grid.end(i), {}, {}});
  for (int a = 0; a < inst.num_arcs(); ++a) {
    const Tag& t = built.prov.arcs[a];
    if (t.origin == Origin::GridEdge && t.interval >= 0) {
      if (p.x[a] > 0.0 || p.y[a] > 0.0)
        f.intervals[t.interval].arcs.push_back({t.edge, t.direction, p.x[a], p.y[a]});
    } else if (t.origin == Origin::Delegation) {
      f.intervals[t.interval].production[built.prov.node_names[t.node]] += p.y[a];
    }
  }
  return f;
}

double integrate_from_zero(const PiecewiseConstantFn& pi, double b) {
  if (b <= 0.0) return 0.0;
  double end = pi.domain_end();
  if (b <= end) return pi.integrate(0.0, b);
  return pi.integrate(0.0, end) + (b - end) * pi.value(pi.pieces() - 1);
}

namespace {

// Common view of both instance kinds for re-checking a dynamic flow.
struct FlowModel {
  double horizon = 1.0;
  bool undirected = true;
  std::vector<std::string> names;
  struct Link {
    std::string id;
    int u, v;
    double cap, r;
  };
  std::vector<Link> links;
  std::vector<const PiecewiseConstantFn*> demand;
  std::vector<Supply> supply;
};

FlowModel model(const Upgg& g) {
  FlowModel m;
  m.horizon = g.horizon;
  for (const auto& n : g.nodes) {
    m.names.push_back(n.id);
    m.demand.push_back(&n.demand);
    m.supply.push_back(n.supply);
  }
  for (const auto& e : g.edges) m.links.push_back({e.id, e.u, e.v, e.capacity, e.resistance});
  return m;
}

FlowModel model(const Spgg& g) {
  FlowModel m;
  m.horizon = g.horizon;
  m.undirected = false;
  m.names = g.nodes;
  m.demand.assign(g.nodes.size(), nullptr);
  m.supply.resize(g.nodes.size());
  for (const auto& d : g.sinks) m.demand[d.node] = &d.demand;
  for (const auto& s : g.sources) {
    m.supply[s.node].cumulative_cap = s.cumulative_cap;
    m.supply[s.node].pi = s.pi;
  }
  for (const auto& a : g.arcs) m.links.push_back({a.id, a.tail, a.head, a.capacity, a.resistance});
  return m;
}

FlowCheck check(const FlowModel& m, const DynamicFlow& f, double tol) {
  FlowCheck c;
  auto fail = [&](std::string s) {
    c.ok = false;
    c.problems.push_back(std::move(s));
  };
  const std::size_t nv = m.names.size();
  std::map<std::string, int> index;
  for (std::size_t v = 0; v < nv; ++v) index[m.names[v]] = static_cast<int>(v);
  std::vector<double> energy(nv, 0.0);

  double prev_end = 0.0;
  for (std::size_t i = 0; i < f.intervals.size(); ++i) {
    const IntervalFlow& iv = f.intervals[i];
    const std::string where = "interval " + std::to_string(i);
    if (std::abs(iv.start - prev_end) > tol || !(iv.end > iv.start)) fail(where + ": intervals do not tile the horizon");
    prev_end = iv.end;
    const double len = iv.end - iv.start;
    std::vector<double> net(nv, 0.0);
    std::map<std::pair<int, int>, double> used;  // (tail, head) -> x
    for (const auto& af : iv.arcs) {
      if (af.edge < 0 || af.edge >= static_cast<int>(m.links.size()) || af.direction < 0 || af.direction > 1 ||
          (!m.undirected && af.direction != 0)) {
        fail(where + ": unknown arc reference");
        continue;
      }
      const auto& l = m.links[af.edge];
      const std::string loc = where + " edge " + l.id;
      int tail = af.direction == 0 ? l.u : l.v;
      int head = af.direction == 0 ? l.v : l.u;
      if (af.x < -tol || af.x > l.cap + tol * (1.0 + l.cap)) fail(loc + ": flow outside [0, capacity]");
      double expect = af.x - l.r * af.x * af.x;
      if (std::abs(af.y - expect) > tol * (1.0 + std::abs(af.x))) fail(loc + ": out-flow differs from the loss law");
      if (af.x > tol) {
        if (used.count({head, tail}) && used[{head, tail}] > tol) fail(loc + ": antiparallel flows in both directions");
        used[{tail, head}] += af.x;
      }
      net[tail] -= af.x;
      net[head] += af.y;
    }
    for (const auto& [name, rate] : iv.production) {
      auto it = index.find(name);
      if (it == index.end()) {
        fail(where + ": production at unknown node " + name);
        continue;
      }
      const int v = it->second;
      const Supply& s = m.supply[v];
      if (rate < -tol) fail(where + ": negative production at " + name);
      if (s.kind() == SupplyKind::None && rate > tol) fail(where + ": production at non-supplier " + name);
      if (s.kind() == SupplyKind::Rate && rate > *s.rate_cap + tol * (1.0 + *s.rate_cap))
        fail(where + ": rate cap exceeded at " + name);
      net[v] += rate;
      energy[v] += rate * len;
    }
    for (std::size_t v = 0; v < nv; ++v) {
      double need = m.demand[v] ? m.demand[v]->supremum(iv.start, std::min(iv.end, m.demand[v]->domain_end())) : 0.0;
      if (net[v] < need - tol * (1.0 + need)) fail(where + ": demand not met at " + m.names[v]);
    }
  }
  if (!f.intervals.empty() && std::abs(prev_end - m.horizon) > tol) fail("intervals do not end at the horizon");
  for (std::size_t v = 0; v < nv; ++v) {
    const Supply& s = m.supply[v];
    if (s.kind() == SupplyKind::Cumulative && energy[v] > *s.cumulative_cap + tol * (1.0 + *s.cumulative_cap))
      fail("cumulative budget exceeded at " + m.names[v]);
  }
  return c;
}

double cost(const FlowModel& m, const DynamicFlow& f) {
  std::map<std::string, int> index;
  for (std::size_t v = 0; v < m.names.size(); ++v) index[m.names[v]] = static_cast<int>(v);
  std::vector<double> energy(m.names.size(), 0.0);
  double total = 0.0;
  for (const auto& iv : f.intervals)
    for (const auto& [name, rate] : iv.production) {
      auto it = index.find(name);
      if (it == index.end()) throw PreconditionError("production at unknown node " + name);
      const Supply& s = m.supply[it->second];
      if (s.kind() == SupplyKind::Rate)
        total += (iv.end - iv.start) * integrate_from_zero(*s.pi, rate);
      else
        energy[it->second] += (iv.end - iv.start) * rate;
    }
  for (std::size_t v = 0; v < m.names.size(); ++v)
    if (m.supply[v].kind() == SupplyKind::Cumulative) total += integrate_from_zero(*m.supply[v].pi, energy[v]);
  return total;
}

}  // namespace

FlowCheck check_dynamic_flow(const Upgg& g, const DynamicFlow& f, double tol) { return check(model(g), f, tol); }
FlowCheck check_dynamic_flow(const Spgg& g, const DynamicFlow& f, double tol) { return check(model(g), f, tol); }
double dynamic_flow_cost(const Upgg& g, const DynamicFlow& f) { return cost(model(g), f); }
double dynamic_flow_cost(const Spgg& g, const DynamicFlow& f) { return cost(model(g), f); }

}  // namespace gridflow
