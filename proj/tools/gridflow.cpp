#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gridflow/bench.hpp"
#include "gridflow/error.hpp"
#include "gridflow/io.hpp"
#include "gridflow/postprocess.hpp"
#include "gridflow/reduce.hpp"
#include "gridflow/sensitivity.hpp"
#include "gridflow/solver.hpp"

using namespace gridflow;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kError = 1, kInfeasible = 2, kNotStrict = 3 };

struct SolveFlags {
  std::string input;
  std::string output;
  std::optional<double> eps_rel;
  std::optional<double> eps_abs;
  std::optional<std::string> engine;
  bool raw = false;
};

struct Loaded {
  InstanceFile file;
  BuiltQcqp built;
};

Loaded load_and_build(const std::string& path) {
  Loaded l;
  l.file = load_instance(path);
  ValidationReport rep = l.file.mode == InstanceMode::Upgg ? validate(l.file.upgg) : validate(l.file.spgg);
  if (!rep.ok()) throw ValidationError("instance violates model assumptions:\n" + rep.str());
  l.built = l.file.mode == InstanceMode::Upgg ? build_qcqp(l.file.upgg) : build_qcqp(l.file.spgg);
  return l;
}

SolverConfig solver_config(const InstanceFile& f, const std::optional<std::string>& engine) {
  SolverConfig cfg;
  if (engine)
    cfg.engine = parse_engine(*engine);
  else if (f.solver.engine)
    cfg.engine = parse_engine(*f.solver.engine);
  if (f.solver.mu) cfg.barrier.mu = *f.solver.mu;
  if (f.solver.aggressive) cfg.barrier.aggressive = *f.solver.aggressive;
  return cfg;
}

double cost_of(const InstanceFile& f, const DynamicFlow& flow) {
  return f.mode == InstanceMode::Upgg ? dynamic_flow_cost(f.upgg, flow) : dynamic_flow_cost(f.spgg, flow);
}

FlowCheck check_of(const InstanceFile& f, const DynamicFlow& flow) {
  return f.mode == InstanceMode::Upgg ? check_dynamic_flow(f.upgg, flow) : check_dynamic_flow(f.spgg, flow);
}

int cmd_solve(const SolveFlags& fl) {
  Loaded l = load_and_build(fl.input);
  SolverConfig cfg = solver_config(l.file, fl.engine);
  std::optional<double> eps_abs = fl.eps_abs ? fl.eps_abs : l.file.solver.eps_abs;
  double eps_rel = fl.eps_rel.value_or(l.file.solver.eps_rel.value_or(1e-2));

  SolveReport rep;
  std::string mode;
  if (eps_abs) {
    rep = feasible_eps_solution(l.built.qcqp, *eps_abs, cfg);
    mode = "absolute";
  } else {
    try {
      rep = relative_fptas(l.built.qcqp, eps_rel, cfg);
      mode = "relative";
    } catch (const DegenerateInstanceError&) {
      rep = feasible_eps_solution(l.built.qcqp, eps_rel, cfg);
      mode = "absolute (F = 0)";
    }
  }
  ExtractOptions opt;
  if (fl.raw) opt.merge = opt.round = false;
  DynamicFlow flow = to_dynamic_flow(l.built, rep.flow, opt);
  SolutionFile sol = make_solution(flow, rep, l.built.prov.edge_names);
  if (fl.raw) sol.raw = rep.flow;

  const double cost = cost_of(l.file, flow);
  std::cout << "engine: " << rep.engine << "  mode: " << mode << "  eps: " << rep.eps_target
            << "  eps': " << rep.eps_prime << "\n";
  std::cout << "objective: " << flow.objective << "  schedule cost: " << cost
            << "  max residual: " << rep.max_residual << "\n";
  for (std::size_t i = 0; i < flow.intervals.size(); ++i) {
    const auto& iv = flow.intervals[i];
    std::cout << "  [" << iv.start << ", " << iv.end << ")";
    for (const auto& [node, rate] : iv.production) std::cout << "  " << node << "=" << rate;
    std::cout << "\n";
  }
  if (!fl.raw) {
    FlowCheck chk = check_of(l.file, flow);
    if (!chk.ok) {
      for (const auto& p : chk.problems) std::cerr << "feasibility check: " << p << "\n";
      throw InvariantError("mapped solution fails the instance's feasibility check");
    }
  }
  if (!fl.output.empty()) save_solution(fl.output, sol);
  return kOk;
}

// "name=delta"
std::pair<std::string, double> split_atom(const std::string& s) {
  auto eq = s.rfind('=');
  if (eq == std::string::npos || eq == 0) throw ParameterError("expected NAME=DELTA, got '" + s + "'");
  try {
    return {s.substr(0, eq), std::stod(s.substr(eq + 1))};
  } catch (const std::exception&) {
    throw ParameterError("bad delta in '" + s + "'");
  }
}

struct SensFlags {
  std::string input;
  std::string output;
  std::vector<std::string> demand;
  std::vector<std::string> capacity;
  std::optional<double> eps_rel;
  std::optional<double> eps_abs;
};

int cmd_sensitivity(const SensFlags& fl) {
  Loaded l = load_and_build(fl.input);
  const QcqpInstance& q = l.built.qcqp;
  const ProvenanceMap& prov = l.built.prov;
  double eps;
  if (fl.eps_abs) {
    eps = *fl.eps_abs;
  } else {
    double F = constants(q).F;
    double rel = fl.eps_rel.value_or(1e-4);
    eps = F > 0.0 ? rel * F : rel;
  }
  SolverConfig cfg = solver_config(l.file, std::nullopt);
  json out;
  out["eps"] = eps;

  json atoms = json::array();
  json bounds = json::array();
  auto emit = [&](const std::string& kind, const std::string& name, double delta, const std::vector<Atom>& parts) {
    PerturbationBound b = composite_bound(q, parts);
    bounds.push_back({{"kind", kind}, {"target", name}, {"delta", delta}, {"lower", b.lower}, {"upper", b.upper},
                      {"qcqp_atoms", parts.size()}});
    std::cout << kind << " " << name << " " << delta << ": [" << b.lower << ", " << b.upper << "]\n";
  };
  for (const auto& s : fl.demand) {
    auto [name, delta] = split_atom(s);
    std::vector<Atom> parts;
    for (std::size_t i = 0; i < q.sinks.size(); ++i) {
      const Tag& t = prov.nodes[q.sinks[i]];
      if (t.node >= 0 && prov.node_names[t.node] == name)
        parts.push_back({AtomKind::Demand, static_cast<int>(i), delta});
    }
    if (parts.empty()) throw ParameterError("node '" + name + "' has no demand in the built program");
    emit("demand", name, delta, parts);
  }
  for (const auto& s : fl.capacity) {
    auto [name, delta] = split_atom(s);
    std::vector<Atom> parts;
    for (int a = 0; a < q.num_arcs(); ++a) {
      const Tag& t = prov.arcs[a];
      if (t.origin == Origin::GridEdge && prov.edge_names[t.edge] == name)
        parts.push_back({AtomKind::Capacity, a, delta});
    }
    if (parts.empty()) throw ParameterError("edge '" + name + "' does not appear in the built program");
    emit("capacity", name, delta, parts);
  }
  out["bounds"] = bounds;

  SolveReport rep = barrier_solve(q, eps, cfg.barrier);
  LocalSensitivities loc = local_sensitivities(q, rep);
  out["objective"] = rep.objective;
  out["duality_gap"] = loc.gap;
  json local = json::array();
  for (int a = 0; a < q.num_arcs(); ++a) {
    const Tag& t = prov.arcs[a];
    if (t.origin != Origin::GridEdge) continue;
    local.push_back({{"edge", prov.edge_names[t.edge]},
                     {"direction", t.direction},
                     {"interval", t.interval},
                     {"capacity", loc.capacity[a]},
                     {"capacity_one_sided", static_cast<bool>(loc.capacity_one_sided[a])},
                     {"resistance", loc.resistance[a]},
                     {"resistance_note", "assumes the optimum moves continuously with r"}});
  }
  for (std::size_t i = 0; i < q.sinks.size(); ++i) {
    const Tag& t = prov.nodes[q.sinks[i]];
    local.push_back({{"node", t.node >= 0 ? prov.node_names[t.node] : std::string("?")},
                     {"interval", t.interval},
                     {"demand", loc.demand[i]}});
  }
  out["local"] = local;
  std::cout << "objective " << rep.objective << "  duality gap " << loc.gap << "\n";
  if (!fl.output.empty()) write_text(fl.output, out.dump(2) + "\n");
  return kOk;
}

struct BenchFlags {
  BenchSpec spec;
  std::string family = "cycle";
  std::vector<int> fit{1, 2};
  std::string output;
};

int cmd_bench(BenchFlags fl) {
  fl.spec.family = parse_family(fl.family);
  fl.spec.fit_degrees = fl.fit;
  if (const char* env = std::getenv("GRIDFLOW_THREADS")) fl.spec.threads = std::max(1, std::atoi(env));
  BenchResult r = run_bench(fl.spec);
  std::string csv = bench_csv(fl.spec, r);
  if (fl.output.empty())
    std::cout << csv;
  else
    write_text(fl.output, csv);
  std::cout << fit_summary(r);
  return kOk;
}

int cmd_validate(const std::string& input) {
  InstanceFile f = load_instance(input);
  ValidationReport rep = f.mode == InstanceMode::Upgg ? validate(f.upgg) : validate(f.spgg);
  if (rep.ok()) {
    std::cout << "ok\n";
    if (f.mode == InstanceMode::Upgg && trivial_self_supply_check(f.upgg))
      std::cout << "every node can serve its own demand\n";
    return kOk;
  }
  std::cout << rep.str();
  return kError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gridflow: dynamic power-flow solver"};
  app.require_subcommand(1);

  SolveFlags sf;
  auto* solve = app.add_subcommand("solve", "solve an instance");
  solve->add_option("--input,-i", sf.input, "instance JSON")->required();
  solve->add_option("--output,-o", sf.output, "solution JSON");
  solve->add_option("--eps-rel", sf.eps_rel, "relative error (default 1e-2)");
  solve->add_option("--eps-abs", sf.eps_abs, "absolute error; overrides --eps-rel");
  solve->add_option("--engine", sf.engine, "barrier | pathfollow");
  solve->add_flag("--raw", sf.raw, "emit the strictly feasible vectors without rounding");

  SensFlags sens;
  auto* sensitivity = app.add_subcommand("sensitivity", "local and global sensitivities");
  sensitivity->add_option("--input,-i", sens.input, "instance JSON")->required();
  sensitivity->add_option("--output,-o", sens.output, "report JSON");
  sensitivity->add_option("--demand", sens.demand, "NODE=DELTA (repeatable)");
  sensitivity->add_option("--capacity", sens.capacity, "EDGE=DELTA (repeatable)");
  sensitivity->add_option("--eps-rel", sens.eps_rel, "relative solve precision (default 1e-4)");
  sensitivity->add_option("--eps-abs", sens.eps_abs, "absolute solve precision");

  BenchFlags bf;
  auto* bench = app.add_subcommand("bench", "timing benchmark on generated instances");
  bench->add_option("--family", bf.family, "cycle | circular-ladder | complete");
  bench->add_option("--nmax", bf.spec.n_max, "largest node count");
  bench->add_option("--points", bf.spec.points, "number of sampled sizes (N)");
  bench->add_option("--reps", bf.spec.reps, "repetitions per size (M)");
  bench->add_option("--seed", bf.spec.seed, "random seed");
  bench->add_option("--fit", bf.fit, "polynomial fit degrees")->delimiter(',');
  bench->add_option("--eps-rel", bf.spec.eps_rel, "relative precision of every solve");
  bench->add_option("--output,-o", bf.output, "CSV path (stdout if absent)");

  std::string vinput;
  auto* val = app.add_subcommand("validate", "check an instance file");
  val->add_option("--input,-i", vinput, "instance JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kError;
  }

  try {
    if (*solve) return cmd_solve(sf);
    if (*sensitivity) return cmd_sensitivity(sens);
    if (*bench) return cmd_bench(bf);
    if (*val) return cmd_validate(vinput);
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    std::cerr << "certificate: slack optimum >= " << e.certificate.slack_lower_bound
              << " (slack " << e.certificate.slack_value << ", gap " << e.certificate.duality_gap << ")\n";
    return kInfeasible;
  } catch (const NotStrictlyFeasibleError& e) {
    std::cerr << "not strictly feasible: " << e.what() << " (last eps' " << e.last_eps_prime << ")\n";
    return kNotStrict;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}
