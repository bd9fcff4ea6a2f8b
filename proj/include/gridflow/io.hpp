#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gridflow/grid.hpp"
#include "gridflow/postprocess.hpp"
#include "gridflow/solver.hpp"

namespace gridflow {

// Optional "solver" block of an instance file.
struct SolverOptions {
  std::optional<std::string> engine;
  std::optional<double> eps_rel;
  std::optional<double> eps_abs;
  std::optional<double> mu;
  std::optional<bool> aggressive;
  bool operator==(const SolverOptions&) const = default;
};

enum class InstanceMode { Upgg, Spgg };

struct InstanceFile {
  InstanceMode mode = InstanceMode::Upgg;
  Upgg upgg;  // set in upgg mode
  Spgg spgg;  // set in spgg mode
  SolverOptions solver;
  bool operator==(const InstanceFile&) const = default;
};

// Throws SchemaError with a JSON-pointer location on malformed input.
InstanceFile parse_instance(const std::string& json_text);
InstanceFile load_instance(const std::string& path);
std::string emit_instance(const InstanceFile& f);
void save_instance(const std::string& path, const InstanceFile& f);

struct SolutionFile {
  DynamicFlow flow;
  std::vector<std::string> edge_names;
  std::optional<FlowPoint> raw;  // strictly feasible QCQP vectors (--raw)
  // report summary
  std::string engine;
  double eps_target = 0.0;
  double eps_prime = 0.0;
  double duality_gap = 0.0;
  double max_residual = 0.0;
  long long newton_steps = 0;
  double wall_time = 0.0;
  bool operator==(const SolutionFile&) const = default;
};

SolutionFile make_solution(const DynamicFlow& flow, const SolveReport& report,
                           const std::vector<std::string>& edge_names);
std::string emit_solution(const SolutionFile& s);
SolutionFile parse_solution(const std::string& json_text);
void save_solution(const std::string& path, const SolutionFile& s);
SolutionFile load_solution(const std::string& path);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

}  // namespace gridflow
