#pragma once
// Run configuration and the train / compare / sweep-inner / diagnose drivers
// behind the command-line tool.
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "subnewton/baselines.hpp"
#include "subnewton/dataset.hpp"
#include "subnewton/prox_newton.hpp"
#include "subnewton/self_concordance.hpp"

namespace subnewton {

enum class Command { train, compare, sweep_inner, diagnose };
Command parse_command(std::string_view name);
std::string_view to_string(Command command);

enum class SolverKind { prox_newton, svrg, saga, fista };
SolverKind parse_solver(std::string_view name);
std::string_view to_string(SolverKind kind);

// "n=200,d=10,density=0.5,noise=0.1,seed=3"; unspecified keys keep defaults.
SyntheticSpec parse_synthetic(std::string_view text);

struct RunConfig {
  Command command = Command::train;
  std::string data_path;
  std::optional<SyntheticSpec> synthetic;
  bool bias = false;
  LossKind loss = LossKind::logistic;
  double lambda1 = 1e-3;
  double gamma = 1e-3;
  SolverKind solver = SolverKind::prox_newton;
  std::vector<SolverKind> solvers = {SolverKind::prox_newton, SolverKind::svrg, SolverKind::saga,
                                     SolverKind::fista};
  OuterConfig outer;
  BaselineConfig baseline;
  std::vector<std::size_t> inner_list = {1, 2, 3, 4, 5, 6};
  double gap = 1e-8;            // compare / sweep-inner: stop once F - F* <= gap
  double reference_tol = 1e-12;
  std::size_t trials = 1000;    // diagnose
  double radius = 0.3;          // diagnose
  std::string trace_path;
  std::string summary_path;
  std::string output_path;
  std::uint64_t seed = 1;
  void validate() const;
};

// Overlays the keys present in `j` onto `config` (unknown keys are errors).
void apply_json(RunConfig& config, const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& config);

SparseDataset load_data(const RunConfig& config);
Problem make_problem(const RunConfig& config, const SparseDataset& data);

// One solver run in the common trace shape.
struct RunResult {
  SolverKind solver = SolverKind::prox_newton;
  std::vector<double> w;
  std::vector<TraceRecord> trace;
  WorkCounters work;
  double objective = 0.0;
  std::size_t iterations = 0;
  std::string status;
};
// Stops early once F <= stop_objective (when given).
RunResult run_solver(const Problem& problem, const RunConfig& config, SolverKind solver,
                     std::optional<double> stop_objective = std::nullopt);

// First trace row with F - F* <= gap, if any.
std::optional<TraceRecord> first_within(const std::vector<TraceRecord>& trace, double f_star, double gap);

// Worker count for parallel runs: SUBNEWTON_THREADS if set, else the hardware count.
std::size_t thread_cap();

struct CompareResult {
  double f_star = 0.0;
  std::vector<RunResult> runs;  // in the requested solver order
};
CompareResult compare(const Problem& problem, const RunConfig& config);
// Long format: solver,metric,x,F_minus_Fstar with metric in {evals, ms}.
void write_compare_csv(std::ostream& out, const CompareResult& result);

struct SweepRun {
  std::size_t inner = 0;
  RunResult run;
};
struct SweepResult {
  double f_star = 0.0;
  std::vector<SweepRun> runs;
};
// Fixed-inner prox-newton with SVRG epochs of ceil(0.01 n) steps, one run per
// entry of config.inner_list.
SweepResult sweep_inner(const Problem& problem, const RunConfig& config);
// inner column followed by the trace columns and F_minus_Fstar.
void write_sweep_csv(std::ostream& out, const SweepResult& result);

nlohmann::json diagnose(const Problem& problem, const RunConfig& config);

// Command entry points used by the CLI. Return the process exit code:
// 0 ok, 1 usage, 2 data, 3 numeric.
int run_command(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace subnewton
