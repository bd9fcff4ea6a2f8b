#pragma once

#include <compare>
#include <string>
#include <vector>

#include "gridflow/grid.hpp"
#include "gridflow/pwfun.hpp"
#include "gridflow/qcqp.hpp"

namespace gridflow {

enum class Origin {
  SuperSource,
  GridNode,    // original node
  SinkNode,    // v^d
  SourceNode,  // v^s (cumulative) or v^I (rate piece)
  PieceNode,   // one cost piece of a source after time expansion
  GridEdge,    // one direction of an original edge
  NodeSink,    // v -> v^d
  NodeSource,  // v^s -> v
  Production,  // s* -> piece node
  Delegation,  // piece node -> source copy
};

std::string origin_name(Origin o);

// Where a produced node or arc came from. Unused fields stay -1.
// `node` indexes ProvenanceMap::node_names, `edge` indexes edge_names.
struct Tag {
  Origin origin = Origin::GridNode;
  int node = -1;
  int edge = -1;
  int direction = -1;     // 0: edge.u -> edge.v, 1: reverse
  int interval = -1;
  int source_piece = -1;  // rate-cap piece of the supplier, -1 for cumulative
  int piece = -1;         // marginal-cost piece after time expansion
  int source = -1;        // source index in the simplified graph

  auto operator<=>(const Tag&) const = default;
  bool operator==(const Tag&) const = default;
};

struct ProvenanceMap {
  std::vector<Tag> nodes;
  std::vector<Tag> arcs;
  std::vector<std::string> node_names;  // names of the user-facing nodes
  std::vector<std::string> edge_names;  // names of the user-facing edges/arcs
};

struct Simplified {
  Spgg spgg;
  ProvenanceMap prov;  // relative to the input grid, interval = -1
  TimeGrid grid;       // common refinement of all demands
};

// Undirected grid -> simplified directed grid with dedicated sources/sinks,
// pruned to nodes and arcs on some source-sink path.
Simplified simplify_constant(const Upgg& g);

// Provenance of an SPGG read directly from a file: every arc is an edge.
ProvenanceMap identity_provenance(const Spgg& g);

struct Expanded {
  QcqpInstance qcqp;
  ProvenanceMap prov;  // relative to the simplified graph
  TimeGrid grid;
};

// k copies of g plus super-source and cost-piece nodes. Never prunes.
Expanded time_expand(const Spgg& g, const TimeGrid& grid);

struct BuiltQcqp {
  QcqpInstance qcqp;
  ProvenanceMap prov;  // relative to the user's instance
  TimeGrid grid;
  Spgg spgg;
};

BuiltQcqp build_qcqp(const Upgg& g);
BuiltQcqp build_qcqp(const Spgg& g);

// Counts the pre-pruning formula predicts for time_expand.
struct ExpansionCounts {
  long long nodes;
  long long arcs;
};
ExpansionCounts expected_counts(const Spgg& g, std::size_t k);

}  // namespace gridflow
