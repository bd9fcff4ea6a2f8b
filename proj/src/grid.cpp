#include "gridflow/grid.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <sstream>
#include <utility>

namespace gridflow {

SupplyKind Supply::kind() const {
  if (cumulative_cap) return SupplyKind::Cumulative;
  if (rate_cap) return SupplyKind::Rate;
  return SupplyKind::None;
}

double Supply::cap() const {
  if (cumulative_cap) return *cumulative_cap;
  if (rate_cap) return *rate_cap;
  return 0.0;
}

int Upgg::node_index(const std::string& id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].id == id) return static_cast<int>(i);
  return -1;
}

int Spgg::node_index(const std::string& id) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i] == id) return static_cast<int>(i);
  return -1;
}

int Spgg::source_of(int node) const {
  for (std::size_t i = 0; i < sources.size(); ++i)
    if (sources[i].node == node) return static_cast<int>(i);
  return -1;
}

int Spgg::sink_of(int node) const {
  for (std::size_t i = 0; i < sinks.size(); ++i)
    if (sinks[i].node == node) return static_cast<int>(i);
  return -1;
}

bool ValidationReport::has_rule(const std::string& rule) const {
  return std::any_of(issues.begin(), issues.end(),
                     [&](const ValidationIssue& i) { return i.rule == rule; });
}

std::string ValidationReport::str() const {
  if (ok()) return "OK";
  std::ostringstream os;
  for (const auto& i : issues) os << i.location << ": [" << i.rule << "] " << i.message << "\n";
  return os.str();
}

namespace {

void check_line(ValidationReport& rep, const std::string& loc, double cap, double r) {
  if (!(cap > 0.0) || !std::isfinite(cap))
    rep.issues.push_back({loc, "capacity > 0", "capacity must be positive and finite"});
  if (!(r >= 0.0) || !std::isfinite(r))
    rep.issues.push_back({loc, "resistance >= 0", "resistance must be non-negative"});
  else if (!(2.0 * r * cap < 1.0))
    rep.issues.push_back({loc, "2ru < 1", "loss function not strictly increasing on [0,u]"});
}

void check_cost(ValidationReport& rep, const std::string& loc, double cap,
                const std::optional<PiecewiseConstantFn>& pi) {
  if (!(cap > 0.0) || !std::isfinite(cap))
    rep.issues.push_back({loc, "supply cap > 0", "supply cap must be positive and finite"});
  if (!pi) {
    rep.issues.push_back({loc, "pi present", "supplier without marginal cost function"});
    return;
  }
  if (std::abs(pi->domain_end() - cap) > kBreakpointTolerance * std::max(1.0, cap))
    rep.issues.push_back({loc, "pi domain", "marginal cost must be defined on [0, cap]"});
  if (!pi->is_non_decreasing())
    rep.issues.push_back({loc, "pi non-decreasing", "marginal cost must be non-decreasing"});
  for (double v : pi->values())
    if (!(v > 0.0)) {
      rep.issues.push_back({loc, "pi positive", "marginal cost must be positive"});
      break;
    }
}

void check_demand(ValidationReport& rep, const std::string& loc, const PiecewiseConstantFn& d,
                  double horizon) {
  if (std::abs(d.domain_end() - horizon) > kBreakpointTolerance * std::max(1.0, horizon))
    rep.issues.push_back({loc, "demand horizon", "demand defined on a different horizon"});
}

}  // namespace

ValidationReport validate(const Upgg& g) {
  ValidationReport rep;
  if (!(g.horizon > 0.0) || !std::isfinite(g.horizon))
    rep.issues.push_back({"instance", "horizon > 0", "horizon must be positive"});
  std::set<std::string> ids;
  for (const auto& n : g.nodes) {
    std::string loc = "node " + n.id;
    if (!ids.insert(n.id).second) rep.issues.push_back({loc, "unique ids", "duplicate node id"});
    check_demand(rep, loc, n.demand, g.horizon);
    if (n.supply.rate_cap && n.supply.cumulative_cap)
      rep.issues.push_back({loc, "rate xor cumulative", "node has both a rate and a cumulative cap"});
    if (n.supply.kind() != SupplyKind::None)
      check_cost(rep, loc, n.supply.cap(), n.supply.pi);
    else if (n.supply.pi)
      rep.issues.push_back({loc, "pi present", "marginal cost given without a supply cap"});
  }
  std::set<std::pair<int, int>> seen;
  const int nv = static_cast<int>(g.nodes.size());
  for (const auto& e : g.edges) {
    std::string loc = "edge " + e.id;
    if (e.u < 0 || e.v < 0 || e.u >= nv || e.v >= nv) {
      rep.issues.push_back({loc, "endpoints", "edge endpoint is not a node"});
      continue;
    }
    if (e.u == e.v) rep.issues.push_back({loc, "simple graph", "self-loop"});
    if (!seen.insert({std::min(e.u, e.v), std::max(e.u, e.v)}).second)
      rep.issues.push_back({loc, "simple graph", "parallel edge"});
    check_line(rep, loc, e.capacity, e.resistance);
  }
  return rep;
}

ValidationReport validate(const Spgg& g) {
  ValidationReport rep;
  if (!(g.horizon > 0.0) || !std::isfinite(g.horizon))
    rep.issues.push_back({"instance", "horizon > 0", "horizon must be positive"});
  const int nv = static_cast<int>(g.nodes.size());
  std::vector<int> role(nv, 0);  // 1 source, 2 sink
  for (const auto& s : g.sources) {
    if (s.node < 0 || s.node >= nv) {
      rep.issues.push_back({"source", "endpoints", "source is not a node"});
      continue;
    }
    std::string loc = "node " + g.nodes[s.node];
    if (role[s.node] == 1) rep.issues.push_back({loc, "unique source", "node listed twice as source"});
    role[s.node] = 1;
    check_cost(rep, loc, s.cumulative_cap, s.pi);
  }
  for (const auto& d : g.sinks) {
    if (d.node < 0 || d.node >= nv) {
      rep.issues.push_back({"sink", "endpoints", "sink is not a node"});
      continue;
    }
    std::string loc = "node " + g.nodes[d.node];
    if (role[d.node] == 1) rep.issues.push_back({loc, "S and sinks disjoint", "node is source and sink"});
    role[d.node] = 2;
    check_demand(rep, loc, d.demand, g.horizon);
  }
  std::vector<std::vector<int>> out(nv);
  for (const auto& a : g.arcs) {
    std::string loc = "arc " + a.id;
    if (a.tail < 0 || a.head < 0 || a.tail >= nv || a.head >= nv) {
      rep.issues.push_back({loc, "endpoints", "arc endpoint is not a node"});
      continue;
    }
    if (a.tail == a.head) rep.issues.push_back({loc, "simple graph", "self-loop"});
    if (role[a.head] == 1) rep.issues.push_back({loc, "source without in-arcs", "arc enters a source"});
    if (role[a.tail] == 2) rep.issues.push_back({loc, "sink without out-arcs", "arc leaves a sink"});
    check_line(rep, loc, a.capacity, a.resistance);
    out[a.tail].push_back(a.head);
  }
  std::vector<char> seen(nv, 0);
  std::queue<int> q;
  for (const auto& s : g.sources)
    if (s.node >= 0 && s.node < nv && !seen[s.node]) {
      seen[s.node] = 1;
      q.push(s.node);
    }
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (int w : out[v])
      if (!seen[w]) {
        seen[w] = 1;
        q.push(w);
      }
  }
  for (int v = 0; v < nv; ++v)
    if (!seen[v])
      rep.issues.push_back({"node " + g.nodes[v], "reachable from S", "node not reachable from any source"});
  return rep;
}

bool trivial_self_supply_check(const Upgg& g) {
  for (const auto& n : g.nodes) {
    double peak = n.demand.supremum();
    switch (n.supply.kind()) {
      case SupplyKind::None:
        if (peak > 0.0) return false;
        break;
      case SupplyKind::Rate:
        if (*n.supply.rate_cap < peak) return false;
        break;
      case SupplyKind::Cumulative: {
        double need = n.demand.integrate(0.0, n.demand.domain_end());
        if (*n.supply.cumulative_cap < need) return false;
        if (n.supply.pi && n.supply.pi->domain_end() < need) return false;
        break;
      }
    }
  }
  return true;
}

}  // namespace gridflow
