#include "gridflow/io.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "gridflow/error.hpp"

namespace gridflow {

using nlohmann::json;

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ParameterError("cannot write " + path);
  out << text;
  if (!out) throw ParameterError("write failed for " + path);
}

namespace {

std::string child(const std::string& ptr, const std::string& key) { return ptr + "/" + key; }
std::string child(const std::string& ptr, std::size_t i) { return ptr + "/" + std::to_string(i); }

const json& need(const json& j, const std::string& key, const std::string& ptr) {
  if (!j.is_object()) throw SchemaError(ptr, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(child(ptr, key), "missing required field");
  return *it;
}

double number(const json& j, const std::string& ptr) {
  if (!j.is_number()) throw SchemaError(ptr, "expected a number");
  return j.get<double>();
}

std::string text(const json& j, const std::string& ptr) {
  if (!j.is_string()) throw SchemaError(ptr, "expected a string");
  return j.get<std::string>();
}

std::vector<double> numbers(const json& j, const std::string& ptr) {
  if (!j.is_array()) throw SchemaError(ptr, "expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], child(ptr, i)));
  return out;
}

PiecewiseConstantFn step_fn(const json& j, double domain_end, const std::string& ptr) {
  std::vector<double> bps = j.contains("breakpoints") ? numbers(j["breakpoints"], child(ptr, "breakpoints"))
                                                      : std::vector<double>{};
  std::vector<double> vals = numbers(need(j, "values", ptr), child(ptr, "values"));
  try {
    return PiecewiseConstantFn(bps, vals, domain_end);
  } catch (const Error& e) {
    throw SchemaError(ptr, e.what());
  }
}

json step_json(const PiecewiseConstantFn& f) {
  return {{"breakpoints", f.breakpoints()}, {"values", f.values()}};
}

struct NodeSpec {
  std::string id;
  std::optional<PiecewiseConstantFn> demand;
  Supply supply;
};

NodeSpec node_spec(const json& j, double horizon, const std::string& ptr) {
  NodeSpec n;
  n.id = text(need(j, "id", ptr), child(ptr, "id"));
  if (j.contains("demand")) n.demand = step_fn(j["demand"], horizon, child(ptr, "demand"));
  if (j.contains("supply")) {
    const std::string sp = child(ptr, "supply");
    const json& s = j["supply"];
    std::string kind = text(need(s, "kind", sp), child(sp, "kind"));
    if (kind == "none") return n;
    if (kind != "rate" && kind != "cumulative")
      throw SchemaError(child(sp, "kind"), "kind must be rate, cumulative or none");
    double cap = number(need(s, "cap", sp), child(sp, "cap"));
    if (!(cap > 0.0)) throw SchemaError(child(sp, "cap"), "supply cap of node " + n.id + " must be positive");
    n.supply.pi = step_fn(need(s, "pi", sp), cap, child(sp, "pi"));
    if (kind == "rate")
      n.supply.rate_cap = cap;
    else
      n.supply.cumulative_cap = cap;
  }
  return n;
}

json node_json(const std::string& id, const PiecewiseConstantFn* demand, const Supply& s) {
  json n = {{"id", id}};
  if (demand) n["demand"] = step_json(*demand);
  switch (s.kind()) {
    case SupplyKind::None:
      n["supply"] = {{"kind", "none"}};
      break;
    case SupplyKind::Rate:
      n["supply"] = {{"kind", "rate"}, {"cap", *s.rate_cap}, {"pi", step_json(*s.pi)}};
      break;
    case SupplyKind::Cumulative:
      n["supply"] = {{"kind", "cumulative"}, {"cap", *s.cumulative_cap}, {"pi", step_json(*s.pi)}};
      break;
  }
  return n;
}

struct LinkSpec {
  std::string id;
  int u, v;
  double capacity, resistance;
};

LinkSpec link_spec(const json& j, const std::map<std::string, int>& index, const std::string& ptr) {
  LinkSpec l;
  std::string u = text(need(j, "u", ptr), child(ptr, "u"));
  std::string v = text(need(j, "v", ptr), child(ptr, "v"));
  l.id = j.contains("id") ? text(j["id"], child(ptr, "id")) : u + "-" + v;
  auto iu = index.find(u), iv = index.find(v);
  if (iu == index.end()) throw SchemaError(child(ptr, "u"), "edge " + l.id + " names unknown node " + u);
  if (iv == index.end()) throw SchemaError(child(ptr, "v"), "edge " + l.id + " names unknown node " + v);
  l.u = iu->second;
  l.v = iv->second;
  l.capacity = number(need(j, "capacity", ptr), child(ptr, "capacity"));
  l.resistance = j.contains("resistance") ? number(j["resistance"], child(ptr, "resistance")) : 0.0;
  if (!(l.capacity > 0.0)) throw SchemaError(child(ptr, "capacity"), "edge " + l.id + " needs a positive capacity");
  if (!(l.resistance >= 0.0))
    throw SchemaError(child(ptr, "resistance"), "edge " + l.id + " has a negative resistance");
  return l;
}

SolverOptions solver_options(const json& j, const std::string& ptr) {
  SolverOptions o;
  if (!j.is_object()) throw SchemaError(ptr, "expected an object");
  if (j.contains("engine")) o.engine = text(j["engine"], child(ptr, "engine"));
  if (j.contains("eps_rel")) o.eps_rel = number(j["eps_rel"], child(ptr, "eps_rel"));
  if (j.contains("eps_abs")) o.eps_abs = number(j["eps_abs"], child(ptr, "eps_abs"));
  if (j.contains("mu")) o.mu = number(j["mu"], child(ptr, "mu"));
  if (j.contains("aggressive")) {
    if (!j["aggressive"].is_boolean()) throw SchemaError(child(ptr, "aggressive"), "expected a boolean");
    o.aggressive = j["aggressive"].get<bool>();
  }
  return o;
}

json solver_json(const SolverOptions& o) {
  json j = json::object();
  if (o.engine) j["engine"] = *o.engine;
  if (o.eps_rel) j["eps_rel"] = *o.eps_rel;
  if (o.eps_abs) j["eps_abs"] = *o.eps_abs;
  if (o.mu) j["mu"] = *o.mu;
  if (o.aggressive) j["aggressive"] = *o.aggressive;
  return j;
}

}  // namespace

InstanceFile parse_instance(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError("", std::string("not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("", "top level must be an object");
  InstanceFile f;
  std::string mode = j.contains("mode") ? text(j["mode"], "/mode") : "upgg";
  if (mode == "spgg")
    f.mode = InstanceMode::Spgg;
  else if (mode != "upgg")
    throw SchemaError("/mode", "mode must be upgg or spgg");
  const double horizon = number(need(j, "horizon", ""), "/horizon");
  if (!(horizon > 0.0)) throw SchemaError("/horizon", "horizon must be positive");

  const json& nodes = need(j, "nodes", "");
  if (!nodes.is_array()) throw SchemaError("/nodes", "expected an array");
  std::vector<NodeSpec> specs;
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    specs.push_back(node_spec(nodes[i], horizon, child("/nodes", i)));
    if (!index.emplace(specs.back().id, static_cast<int>(i)).second)
      throw SchemaError(child(child("/nodes", i), "id"), "duplicate node id " + specs.back().id);
  }
  const std::string links_key = f.mode == InstanceMode::Upgg ? "edges" : "arcs";
  std::vector<LinkSpec> links;
  if (j.contains(links_key)) {
    const json& ls = j[links_key];
    if (!ls.is_array()) throw SchemaError("/" + links_key, "expected an array");
    for (std::size_t i = 0; i < ls.size(); ++i) links.push_back(link_spec(ls[i], index, child("/" + links_key, i)));
  }
  if (j.contains("solver")) f.solver = solver_options(j["solver"], "/solver");

  if (f.mode == InstanceMode::Upgg) {
    f.upgg.horizon = horizon;
    for (auto& n : specs)
      f.upgg.nodes.push_back(
          {n.id, n.demand ? *n.demand : PiecewiseConstantFn::constant(0.0, horizon), n.supply});
    for (auto& l : links) f.upgg.edges.push_back({l.id, l.u, l.v, l.capacity, l.resistance});
  } else {
    f.spgg.horizon = horizon;
    for (std::size_t i = 0; i < specs.size(); ++i) {
      const auto& n = specs[i];
      const int v = static_cast<int>(i);
      f.spgg.nodes.push_back(n.id);
      if (n.supply.kind() == SupplyKind::Rate)
        throw SchemaError(child(child("/nodes", i), "supply"), "spgg mode allows cumulative supply only");
      if (n.supply.kind() == SupplyKind::Cumulative)
        f.spgg.sources.push_back({v, *n.supply.cumulative_cap, *n.supply.pi});
      if (n.demand) f.spgg.sinks.push_back({v, *n.demand});
    }
    for (auto& l : links) f.spgg.arcs.push_back({l.id, l.u, l.v, l.capacity, l.resistance});
  }
  return f;
}

InstanceFile load_instance(const std::string& path) { return parse_instance(read_text(path)); }

std::string emit_instance(const InstanceFile& f) {
  json j;
  json nodes = json::array(), links = json::array();
  if (f.mode == InstanceMode::Upgg) {
    j["mode"] = "upgg";
    j["horizon"] = f.upgg.horizon;
    for (const auto& n : f.upgg.nodes) nodes.push_back(node_json(n.id, &n.demand, n.supply));
    for (const auto& e : f.upgg.edges)
      links.push_back({{"id", e.id},
                       {"u", f.upgg.nodes[e.u].id},
                       {"v", f.upgg.nodes[e.v].id},
                       {"capacity", e.capacity},
                       {"resistance", e.resistance}});
    j["nodes"] = nodes;
    j["edges"] = links;
  } else {
    const Spgg& g = f.spgg;
    j["mode"] = "spgg";
    j["horizon"] = g.horizon;
    for (std::size_t v = 0; v < g.nodes.size(); ++v) {
      int s = g.source_of(static_cast<int>(v)), d = g.sink_of(static_cast<int>(v));
      Supply sup;
      if (s >= 0) {
        sup.cumulative_cap = g.sources[s].cumulative_cap;
        sup.pi = g.sources[s].pi;
      }
      nodes.push_back(node_json(g.nodes[v], d >= 0 ? &g.sinks[d].demand : nullptr, sup));
    }
    for (const auto& a : g.arcs)
      links.push_back({{"id", a.id},
                       {"u", g.nodes[a.tail]},
                       {"v", g.nodes[a.head]},
                       {"capacity", a.capacity},
                       {"resistance", a.resistance}});
    j["nodes"] = nodes;
    j["arcs"] = links;
  }
  json s = solver_json(f.solver);
  if (!s.empty()) j["solver"] = s;
  return j.dump(2) + "\n";
}

void save_instance(const std::string& path, const InstanceFile& f) { write_text(path, emit_instance(f)); }

SolutionFile make_solution(const DynamicFlow& flow, const SolveReport& report,
                           const std::vector<std::string>& edge_names) {
  SolutionFile s;
  s.flow = flow;
  s.edge_names = edge_names;
  s.engine = report.engine;
  s.eps_target = report.eps_target;
  s.eps_prime = report.eps_prime;
  s.duality_gap = report.duality_gap;
  s.max_residual = report.max_residual;
  s.newton_steps = report.newton_phase1 + report.newton_phase2;
  s.wall_time = report.wall_time;
  return s;
}

std::string emit_solution(const SolutionFile& s) {
  json j;
  json intervals = json::array();
  for (const auto& iv : s.flow.intervals) {
    json arcs = json::array();
    for (const auto& a : iv.arcs) {
      json e = {{"edge_index", a.edge}, {"direction", a.direction}, {"x", a.x}, {"y", a.y}};
      if (a.edge >= 0 && a.edge < static_cast<int>(s.edge_names.size())) e["edge"] = s.edge_names[a.edge];
      arcs.push_back(e);
    }
    json prod = json::object();
    for (const auto& [k, v] : iv.production) prod[k] = v;
    intervals.push_back({{"start", iv.start}, {"end", iv.end}, {"arc_flows", arcs}, {"production", prod}});
  }
  j["intervals"] = intervals;
  j["objective"] = s.flow.objective;
  j["edge_names"] = s.edge_names;
  if (s.raw) j["raw"] = {{"x", s.raw->x}, {"y", s.raw->y}};
  j["report"] = {{"engine", s.engine},           {"eps_target", s.eps_target},
                 {"eps_prime", s.eps_prime},     {"duality_gap", s.duality_gap},
                 {"max_residual", s.max_residual}, {"newton_steps", s.newton_steps},
                 {"wall_time", s.wall_time}};
  return j.dump(2) + "\n";
}

SolutionFile parse_solution(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SchemaError("", std::string("not valid JSON: ") + e.what());
  }
  SolutionFile s;
  try {
    s.flow.objective = j.at("objective").get<double>();
    s.edge_names = j.value("edge_names", std::vector<std::string>{});
    for (const auto& iv : j.at("intervals")) {
      IntervalFlow f;
      f.start = iv.at("start").get<double>();
      f.end = iv.at("end").get<double>();
      for (const auto& a : iv.at("arc_flows"))
        f.arcs.push_back({a.at("edge_index").get<int>(), a.at("direction").get<int>(), a.at("x").get<double>(),
                          a.at("y").get<double>()});
      for (const auto& [k, v] : iv.at("production").items()) f.production[k] = v.get<double>();
      s.flow.intervals.push_back(std::move(f));
    }
    if (j.contains("raw"))
      s.raw = FlowPoint{j["raw"].at("x").get<std::vector<double>>(), j["raw"].at("y").get<std::vector<double>>()};
    const json& r = j.at("report");
    s.engine = r.at("engine").get<std::string>();
    s.eps_target = r.at("eps_target").get<double>();
    s.eps_prime = r.at("eps_prime").get<double>();
    s.duality_gap = r.at("duality_gap").get<double>();
    s.max_residual = r.at("max_residual").get<double>();
    s.newton_steps = r.at("newton_steps").get<long long>();
    s.wall_time = r.at("wall_time").get<double>();
  } catch (const json::exception& e) {
    throw SchemaError("", std::string("malformed solution file: ") + e.what());
  }
  return s;
}

void save_solution(const std::string& path, const SolutionFile& s) { write_text(path, emit_solution(s)); }
SolutionFile load_solution(const std::string& path) { return parse_solution(read_text(path)); }

}  // namespace gridflow
