#include "gridflow/reduce.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "gridflow/error.hpp"

namespace gridflow {

std::string origin_name(Origin o) {
  switch (o) {
    case Origin::SuperSource: return "super-source";
    case Origin::GridNode: return "grid-node";
    case Origin::SinkNode: return "sink-node";
    case Origin::SourceNode: return "source-node";
    case Origin::PieceNode: return "piece-node";
    case Origin::GridEdge: return "grid-edge";
    case Origin::NodeSink: return "node-sink";
    case Origin::NodeSource: return "node-source";
    case Origin::Production: return "production";
    case Origin::Delegation: return "delegation";
  }
  return "?";
}

namespace {

std::vector<char> reach(int n, const std::vector<std::pair<int, int>>& arcs, const std::vector<int>& seeds,
                        bool forward) {
  std::vector<std::vector<int>> adj(n);
  for (auto [t, h] : arcs) {
    if (forward)
      adj[t].push_back(h);
    else
      adj[h].push_back(t);
  }
  std::vector<char> seen(n, 0);
  std::queue<int> q;
  for (int s : seeds)
    if (!seen[s]) {
      seen[s] = 1;
      q.push(s);
    }
  while (!q.empty()) {
    int v = q.front();
    q.pop();
    for (int w : adj[v])
      if (!seen[w]) {
        seen[w] = 1;
        q.push(w);
      }
  }
  return seen;
}

}  // namespace

Simplified simplify_constant(const Upgg& g) {
  ValidationReport rep = validate(g);
  if (!rep.ok()) throw ValidationError("invalid grid instance:\n" + rep.str());

  std::vector<PiecewiseConstantFn> demands;
  for (const auto& n : g.nodes) demands.push_back(n.demand);
  TimeGrid grid = demands.empty() ? TimeGrid({0.0, g.horizon}) : common_refinement(demands, g.horizon);
  const double t_min = grid.min_length();

  double total_peak = 0.0;
  double loss_factor = 1.0;
  for (const auto& n : g.nodes) total_peak += n.demand.supremum();
  for (const auto& e : g.edges) loss_factor /= (1.0 - 2.0 * e.resistance * e.capacity);

  // full graph before pruning
  std::vector<std::string> names;
  std::vector<Tag> node_tags;
  std::vector<GridArc> arcs;
  std::vector<Tag> arc_tags;
  std::vector<SpggSource> sources;
  std::vector<SpggSink> sinks;
  std::vector<int> sink_of_node(g.nodes.size(), -1);

  for (std::size_t v = 0; v < g.nodes.size(); ++v) {
    names.push_back(g.nodes[v].id);
    node_tags.push_back({.origin = Origin::GridNode, .node = static_cast<int>(v)});
  }
  auto add_node = [&](const std::string& name, Tag tag) {
    names.push_back(name);
    node_tags.push_back(tag);
    return static_cast<int>(names.size() - 1);
  };
  for (std::size_t ei = 0; ei < g.edges.size(); ++ei) {
    const auto& e = g.edges[ei];
    int id = static_cast<int>(ei);
    arcs.push_back({e.id + ">", e.u, e.v, e.capacity, e.resistance});
    arc_tags.push_back({.origin = Origin::GridEdge, .edge = id, .direction = 0});
    arcs.push_back({e.id + "<", e.v, e.u, e.capacity, e.resistance});
    arc_tags.push_back({.origin = Origin::GridEdge, .edge = id, .direction = 1});
  }
  for (std::size_t vi = 0; vi < g.nodes.size(); ++vi) {
    const auto& n = g.nodes[vi];
    const int v = static_cast<int>(vi);
    switch (n.supply.kind()) {
      case SupplyKind::Cumulative: {
        int s = add_node(n.id + "^s", {.origin = Origin::SourceNode, .node = v});
        double cap = std::min(*n.supply.cumulative_cap / t_min, 2.0 * total_peak * loss_factor);
        sources.push_back({s, *n.supply.cumulative_cap, *n.supply.pi});
        arcs.push_back({n.id + "^s>", s, v, cap, 0.0});
        arc_tags.push_back({.origin = Origin::NodeSource, .node = v});
        break;
      }
      case SupplyKind::Rate: {
        const auto& pi = *n.supply.pi;
        for (std::size_t j = 0; j < pi.pieces(); ++j) {
          const int jj = static_cast<int>(j);
          double len = pi.end(j) - pi.start(j);
          int s = add_node(n.id + "^I" + std::to_string(j),
                           {.origin = Origin::SourceNode, .node = v, .source_piece = jj});
          sources.push_back({s, len * g.horizon, PiecewiseConstantFn::constant(pi.value(j), len * g.horizon)});
          arcs.push_back({n.id + "^I" + std::to_string(j) + ">", s, v, len, 0.0});
          arc_tags.push_back({.origin = Origin::NodeSource, .node = v, .source_piece = jj});
        }
        break;
      }
      case SupplyKind::None:
        break;
    }
    double peak = n.demand.supremum();
    if (peak > 0.0) {
      int d = add_node(n.id + "^d", {.origin = Origin::SinkNode, .node = v});
      sink_of_node[vi] = d;
      sinks.push_back({d, n.demand});
      arcs.push_back({n.id + "^d<", v, d, 2.0 * peak, 0.0});
      arc_tags.push_back({.origin = Origin::NodeSink, .node = v});
    }
  }

  const int n_all = static_cast<int>(names.size());
  std::vector<std::pair<int, int>> ends;
  for (const auto& a : arcs) ends.emplace_back(a.tail, a.head);
  std::vector<int> src_nodes, sink_nodes;
  for (const auto& s : sources) src_nodes.push_back(s.node);
  for (const auto& d : sinks) sink_nodes.push_back(d.node);
  auto fwd = reach(n_all, ends, src_nodes, true);
  auto bwd = reach(n_all, ends, sink_nodes, false);

  for (std::size_t v = 0; v < g.nodes.size(); ++v)
    if (sink_of_node[v] >= 0 && !fwd[sink_of_node[v]])
      throw ReductionError("demand at node " + g.nodes[v].id + " cannot be reached from any supplier");

  std::vector<int> remap(n_all, -1);
  Simplified out;
  out.grid = grid;
  out.spgg.horizon = g.horizon;
  for (int v = 0; v < n_all; ++v)
    if (fwd[v] && bwd[v]) {
      remap[v] = static_cast<int>(out.spgg.nodes.size());
      out.spgg.nodes.push_back(names[v]);
      out.prov.nodes.push_back(node_tags[v]);
    }
  for (std::size_t a = 0; a < arcs.size(); ++a) {
    int t = remap[arcs[a].tail], h = remap[arcs[a].head];
    if (t < 0 || h < 0) continue;
    GridArc arc = arcs[a];
    arc.tail = t;
    arc.head = h;
    out.spgg.arcs.push_back(arc);
    out.prov.arcs.push_back(arc_tags[a]);
  }
  for (const auto& s : sources)
    if (remap[s.node] >= 0) out.spgg.sources.push_back({remap[s.node], s.cumulative_cap, s.pi});
  for (const auto& d : sinks)
    if (remap[d.node] >= 0) out.spgg.sinks.push_back({remap[d.node], d.demand});
  for (const auto& n : g.nodes) out.prov.node_names.push_back(n.id);
  for (const auto& e : g.edges) out.prov.edge_names.push_back(e.id);

  ValidationReport srep = validate(out.spgg);
  if (!srep.ok()) throw InvariantError("simplified graph violates its assumptions:\n" + srep.str());
  return out;
}

ProvenanceMap identity_provenance(const Spgg& g) {
  ProvenanceMap p;
  p.node_names = g.nodes;
  for (std::size_t v = 0; v < g.nodes.size(); ++v) {
    int vi = static_cast<int>(v);
    Origin o = g.source_of(vi) >= 0 ? Origin::SourceNode
               : g.sink_of(vi) >= 0 ? Origin::SinkNode
                                    : Origin::GridNode;
    p.nodes.push_back({.origin = o, .node = vi});
  }
  for (std::size_t a = 0; a < g.arcs.size(); ++a) {
    p.edge_names.push_back(g.arcs[a].id);
    p.arcs.push_back({.origin = Origin::GridEdge, .edge = static_cast<int>(a), .direction = 0});
  }
  return p;
}

Expanded time_expand(const Spgg& g, const TimeGrid& grid) {
  ValidationReport rep = validate(g);
  if (!rep.ok()) throw ValidationError("invalid simplified grid:\n" + rep.str());
  if (std::abs(grid.horizon() - g.horizon) > kBreakpointTolerance * std::max(1.0, g.horizon))
    throw ParameterError("time grid horizon differs from the instance horizon");

  const int k = static_cast<int>(grid.size());
  const int nv = static_cast<int>(g.nodes.size());
  const double t_min = grid.min_length();
  Expanded out;
  out.grid = grid;
  out.prov.node_names = g.nodes;
  for (const auto& a : g.arcs) out.prov.edge_names.push_back(a.id);

  QcqpInstance& q = out.qcqp;
  auto copy = [nv](int v, int i) { return i * nv + v; };
  for (int i = 0; i < k; ++i)
    for (int v = 0; v < nv; ++v) {
      Origin o = g.source_of(v) >= 0 ? Origin::SourceNode
                 : g.sink_of(v) >= 0 ? Origin::SinkNode
                                     : Origin::GridNode;
      out.prov.nodes.push_back({.origin = o, .node = v, .interval = i});
    }
  q.source = k * nv;
  out.prov.nodes.push_back({.origin = Origin::SuperSource});
  int next = k * nv + 1;

  for (int i = 0; i < k; ++i)
    for (std::size_t a = 0; a < g.arcs.size(); ++a) {
      const auto& arc = g.arcs[a];
      q.arcs.push_back({copy(arc.tail, i), copy(arc.head, i), 1.0, arc.resistance, arc.capacity, 0.0, 0.0});
      out.prov.arcs.push_back(
          {.origin = Origin::GridEdge, .edge = static_cast<int>(a), .direction = 0, .interval = i});
    }
  for (std::size_t si = 0; si < g.sources.size(); ++si) {
    const auto& s = g.sources[si];
    const int sidx = static_cast<int>(si);
    for (std::size_t I = 0; I < s.pi.pieces(); ++I) {
      const int pI = static_cast<int>(I);
      const double len = s.pi.end(I) - s.pi.start(I);
      const int node = next++;
      out.prov.nodes.push_back({.origin = Origin::PieceNode, .node = s.node, .piece = pI, .source = sidx});
      q.arcs.push_back({q.source, node, 1.0, 0.0, len / t_min, s.pi.value(I) * t_min, 0.0});
      out.prov.arcs.push_back({.origin = Origin::Production, .node = s.node, .piece = pI, .source = sidx});
      for (int i = 0; i < k; ++i) {
        q.arcs.push_back({node, copy(s.node, i), t_min / grid.length(i), 0.0, len / t_min, 0.0, 0.0});
        out.prov.arcs.push_back(
            {.origin = Origin::Delegation, .node = s.node, .interval = i, .piece = pI, .source = sidx});
      }
    }
  }
  q.num_nodes = next;
  for (int i = 0; i < k; ++i)
    for (const auto& d : g.sinks) {
      q.sinks.push_back(copy(d.node, i));
      q.demand.push_back(d.demand.eval(grid.start(i)));
    }
  return out;
}

namespace {

Tag compose(const Tag& inner, const ProvenanceMap& outer) {
  Tag t = inner;
  switch (inner.origin) {
    case Origin::SuperSource:
      return t;
    case Origin::GridNode:
    case Origin::SinkNode:
    case Origin::SourceNode: {
      Tag o = outer.nodes[inner.node];
      o.interval = inner.interval;
      return o;
    }
    case Origin::PieceNode:
    case Origin::Production:
    case Origin::Delegation: {
      const Tag& o = outer.nodes[inner.node];
      t.node = o.node;
      t.source_piece = o.source_piece;
      return t;
    }
    case Origin::GridEdge: {
      Tag o = outer.arcs[inner.edge];
      o.interval = inner.interval;
      return o;
    }
    default:
      throw InvariantError("unexpected tag during provenance composition");
  }
}

BuiltQcqp finish(Spgg spgg, const ProvenanceMap& outer, const TimeGrid& grid) {
  Expanded ex = time_expand(spgg, grid);
  BuiltQcqp out;
  out.qcqp = std::move(ex.qcqp);
  out.grid = grid;
  out.prov.node_names = outer.node_names;
  out.prov.edge_names = outer.edge_names;
  for (const auto& t : ex.prov.nodes) out.prov.nodes.push_back(compose(t, outer));
  for (const auto& t : ex.prov.arcs) out.prov.arcs.push_back(compose(t, outer));
  out.spgg = std::move(spgg);
  validate_qcqp(out.qcqp);
  return out;
}

}  // namespace

BuiltQcqp build_qcqp(const Upgg& g) {
  Simplified s = simplify_constant(g);
  return finish(std::move(s.spgg), s.prov, s.grid);
}

BuiltQcqp build_qcqp(const Spgg& g) {
  std::vector<PiecewiseConstantFn> demands;
  for (const auto& d : g.sinks) demands.push_back(d.demand);
  TimeGrid grid = demands.empty() ? TimeGrid({0.0, g.horizon}) : common_refinement(demands, g.horizon);
  return finish(g, identity_provenance(g), grid);
}

ExpansionCounts expected_counts(const Spgg& g, std::size_t k) {
  long long pieces = 0;
  for (const auto& s : g.sources) pieces += static_cast<long long>(s.pi.pieces());
  const auto kk = static_cast<long long>(k);
  return {kk * static_cast<long long>(g.nodes.size()) + 1 + pieces,
          kk * static_cast<long long>(g.arcs.size()) + pieces * (1 + kk)};
}

}  // namespace gridflow
