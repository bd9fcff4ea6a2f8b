#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gridflow/pwfun.hpp"

namespace gridflow {

enum class SupplyKind { None, Rate, Cumulative };

// A node's production settings. Exactly one of the caps is set for a supplier;
// both being set is representable so that validate() can report it.
struct Supply {
  std::optional<double> rate_cap;        // b_v
  std::optional<double> cumulative_cap;  // bhat_v
  std::optional<PiecewiseConstantFn> pi; // marginal cost over [0, cap]

  SupplyKind kind() const;
  double cap() const;
  bool operator==(const Supply&) const = default;
};

struct GridNode {
  std::string id;
  PiecewiseConstantFn demand;
  Supply supply;
  bool operator==(const GridNode&) const = default;
};

struct GridEdge {
  std::string id;
  int u = 0;
  int v = 0;
  double capacity = 0.0;
  double resistance = 0.0;
  bool operator==(const GridEdge&) const = default;
};

// Undirected power grid graph.
struct Upgg {
  double horizon = 1.0;
  std::vector<GridNode> nodes;
  std::vector<GridEdge> edges;

  int node_index(const std::string& id) const;  // -1 if absent
  bool operator==(const Upgg&) const = default;
};

struct GridArc {
  std::string id;
  int tail = 0;
  int head = 0;
  double capacity = 0.0;
  double resistance = 0.0;
  bool operator==(const GridArc&) const = default;
};

struct SpggSource {
  int node = 0;
  double cumulative_cap = 0.0;
  PiecewiseConstantFn pi;
  bool operator==(const SpggSource&) const = default;
};

struct SpggSink {
  int node = 0;
  PiecewiseConstantFn demand;
  bool operator==(const SpggSink&) const = default;
};

// Simplified directed grid: cumulative sources without in-arcs, sinks
// without out-arcs.
struct Spgg {
  double horizon = 1.0;
  std::vector<std::string> nodes;
  std::vector<GridArc> arcs;
  std::vector<SpggSource> sources;
  std::vector<SpggSink> sinks;

  int node_index(const std::string& id) const;
  int source_of(int node) const;  // index into sources, -1 if none
  int sink_of(int node) const;
  bool operator==(const Spgg&) const = default;
};

struct ValidationIssue {
  std::string location;  // e.g. "edge a-b", "node v"
  std::string rule;      // short assumption tag, e.g. "2ru < 1"
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
  bool has_rule(const std::string& rule) const;
  std::string str() const;
};

ValidationReport validate(const Upgg& g);
ValidationReport validate(const Spgg& g);

// True iff every node can serve its own demand from its own supply.
bool trivial_self_supply_check(const Upgg& g);

}  // namespace gridflow
