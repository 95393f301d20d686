#include "subnewton/bench.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <ostream>
#include <sstream>
#include <thread>

#include "subnewton/error.hpp"
#include "subnewton/trace.hpp"

namespace subnewton {

namespace {

// Newton's own stopping rule is switched off when a harness stops on the gap.
constexpr double kHarnessTol = 1e-300;

template <class T>
T number(const nlohmann::json& v, std::string_view key) {
  if (!v.is_number()) throw ConfigError("config key '" + std::string(key) + "' must be a number");
  return v.get<T>();
}

std::size_t ceil_fraction(std::size_t n, double f) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(f * static_cast<double>(n))));
}

}  // namespace

Command parse_command(std::string_view name) {
  if (name == "train") return Command::train;
  if (name == "compare") return Command::compare;
  if (name == "sweep-inner") return Command::sweep_inner;
  if (name == "diagnose") return Command::diagnose;
  throw ConfigError("unknown command '" + std::string(name) + "'");
}

std::string_view to_string(Command command) {
  switch (command) {
    case Command::train: return "train";
    case Command::compare: return "compare";
    case Command::sweep_inner: return "sweep-inner";
    case Command::diagnose: return "diagnose";
  }
  return "?";
}

SolverKind parse_solver(std::string_view name) {
  if (name == "prox-newton") return SolverKind::prox_newton;
  if (name == "svrg") return SolverKind::svrg;
  if (name == "saga") return SolverKind::saga;
  if (name == "fista") return SolverKind::fista;
  throw ConfigError("unknown solver '" + std::string(name) + "'");
}

std::string_view to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::prox_newton: return "prox-newton";
    case SolverKind::svrg: return "svrg";
    case SolverKind::saga: return "saga";
    case SolverKind::fista: return "fista";
  }
  return "?";
}

SyntheticSpec parse_synthetic(std::string_view text) {
  SyntheticSpec spec;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string_view item = text.substr(pos, comma - pos);
    pos = comma + 1;
    if (item.empty()) continue;
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) throw ConfigError("synthetic spec item '" + std::string(item) + "' lacks '='");
    const std::string key(item.substr(0, eq));
    const std::string value(item.substr(eq + 1));
    char* end = nullptr;
    const double x = std::strtod(value.c_str(), &end);
    if (value.empty() || *end != '\0') throw ConfigError("synthetic spec value for '" + key + "' is not a number");
    auto count = [&] {
      if (x < 0 || x != std::floor(x)) throw ConfigError("synthetic '" + key + "' must be a nonnegative integer");
      return static_cast<std::size_t>(x);
    };
    if (key == "n") spec.n = count();
    else if (key == "d") spec.d = count();
    else if (key == "density") spec.density = x;
    else if (key == "noise") spec.label_noise = x;
    else if (key == "seed") spec.seed = count();
    else throw ConfigError("unknown synthetic key '" + key + "'");
  }
  if (spec.n == 0 || spec.d == 0) throw ConfigError("synthetic n and d must be >= 1");
  if (!(spec.density > 0.0 && spec.density <= 1.0)) throw ConfigError("synthetic density must lie in (0, 1]");
  if (!(spec.label_noise >= 0.0 && spec.label_noise <= 1.0)) throw ConfigError("synthetic noise must lie in [0, 1]");
  return spec;
}

void RunConfig::validate() const {
  if (data_path.empty() == !synthetic.has_value()) throw ConfigError("give exactly one of --data or --synthetic");
  if (!(lambda1 >= 0.0)) throw ConfigError("lambda1 must be >= 0");
  if (!(gamma > 0.0)) throw ConfigError("gamma must be > 0");
  if (solvers.empty()) throw ConfigError("solver list is empty");
  if (inner_list.empty()) throw ConfigError("inner list is empty");
  for (std::size_t k : inner_list)
    if (k == 0) throw ConfigError("inner iteration counts must be >= 1");
  if (!(gap > 0.0)) throw ConfigError("gap must be > 0");
  if (!(reference_tol > 0.0)) throw ConfigError("reference tolerance must be > 0");
  if (trials == 0) throw ConfigError("trials must be >= 1");
  if (!(radius > 0.0 && radius < 1.0)) throw ConfigError("radius must lie in (0, 1)");
  outer.validate();
  baseline.validate();
}

void apply_json(RunConfig& c, const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");
  for (const auto& [key, v] : j.items()) {
    auto str = [&]() -> std::string {
      if (!v.is_string()) throw ConfigError("config key '" + key + "' must be a string");
      return v.get<std::string>();
    };
    if (key == "command") continue;  // echoed by to_json; the command line decides
    if (key == "data") c.data_path = str();
    else if (key == "synthetic") {
      // A spec string, or the object form written by to_json.
      if (v.is_object()) {
        std::string spec;
        for (const auto& [k, x] : v.items()) spec += k + "=" + x.dump() + ",";
        c.synthetic = parse_synthetic(spec);
      } else {
        c.synthetic = parse_synthetic(str());
      }
    }
    else if (key == "bias") c.bias = v.get<bool>();
    else if (key == "loss") c.loss = parse_loss(str());
    else if (key == "lambda1") c.lambda1 = number<double>(v, key);
    else if (key == "gamma") c.gamma = number<double>(v, key);
    else if (key == "solver") c.solver = parse_solver(str());
    else if (key == "solvers") {
      c.solvers.clear();
      for (const auto& s : v) c.solvers.push_back(parse_solver(s.get<std::string>()));
    } else if (key == "theta") c.outer.theta = number<double>(v, key);
    else if (key == "beta") c.outer.beta = number<double>(v, key);
    else if (key == "lambda_bar") c.outer.lambda_bar = number<double>(v, key);
    else if (key == "inner") {
      if (v.is_string() && v.get<std::string>() == "certificate") {
        c.outer.inner.mode = InnerMode::certificate;
      } else {
        c.outer.inner.mode = InnerMode::fixed_epochs;
        c.outer.inner.epochs = number<std::size_t>(v, key);
      }
    } else if (key == "sample_c") c.outer.c_b = number<double>(v, key);
    else if (key == "mix_nu") c.outer.nu = number<double>(v, key);
    else if (key == "tol") c.outer.tol = number<double>(v, key);
    else if (key == "max_outer") c.outer.max_outer = number<std::size_t>(v, key);
    else if (key == "leverage") c.outer.leverage = parse_leverage_method(str());
    else if (key == "catalyst") c.outer.inner.catalyst = v.get<bool>();
    else if (key == "exact_hessian") c.outer.exact_hessian_mode = v.get<bool>();
    else if (key == "epochs") c.baseline.epochs = number<std::size_t>(v, key);
    else if (key == "step") c.baseline.step = number<double>(v, key);
    else if (key == "epoch_length") c.baseline.epoch_length = number<std::size_t>(v, key);
    else if (key == "inner_list") c.inner_list = v.get<std::vector<std::size_t>>();
    else if (key == "gap") c.gap = number<double>(v, key);
    else if (key == "reference_tol") c.reference_tol = number<double>(v, key);
    else if (key == "trials") c.trials = number<std::size_t>(v, key);
    else if (key == "radius") c.radius = number<double>(v, key);
    else if (key == "seed") c.seed = number<std::uint64_t>(v, key);
    else if (key == "trace") c.trace_path = str();
    else if (key == "summary") c.summary_path = str();
    else if (key == "output") c.output_path = str();
    else throw ConfigError("unknown config key '" + key + "'");
  }
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["command"] = to_string(c.command);
  if (c.synthetic) {
    const SyntheticSpec& s = *c.synthetic;
    j["synthetic"] = {{"n", s.n}, {"d", s.d}, {"density", s.density}, {"noise", s.label_noise}, {"seed", s.seed}};
  } else {
    j["data"] = c.data_path;
  }
  j["bias"] = c.bias;
  j["loss"] = to_string(c.loss);
  j["lambda1"] = c.lambda1;
  j["gamma"] = c.gamma;
  j["solver"] = to_string(c.solver);
  j["theta"] = c.outer.theta;
  j["beta"] = c.outer.beta;
  j["lambda_bar"] = c.outer.lambda_bar;
  if (c.outer.inner.mode == InnerMode::certificate) j["inner"] = "certificate";
  else j["inner"] = c.outer.inner.epochs;
  j["catalyst"] = c.outer.inner.catalyst;
  j["sample_c"] = c.outer.c_b;
  j["mix_nu"] = c.outer.nu;
  j["tol"] = c.outer.tol;
  j["max_outer"] = c.outer.max_outer;
  j["exact_hessian"] = c.outer.exact_hessian_mode;
  j["epochs"] = c.baseline.epochs;
  j["step"] = c.baseline.step;
  j["epoch_length"] = c.baseline.epoch_length;
  j["seed"] = c.seed;
  return j;
}

SparseDataset load_data(const RunConfig& config) {
  SparseDataset data = config.synthetic ? generate_synthetic(*config.synthetic).data : load_libsvm(config.data_path);
  data.require_nonempty();
  if (config.loss == LossKind::logistic) data.require_binary_labels();
  return config.bias ? data.with_bias() : data;
}

Problem make_problem(const RunConfig& config, const SparseDataset& data) {
  Problem p;
  p.data = &data;
  p.loss = config.loss;
  p.reg = Regularizer::lasso(config.lambda1);
  p.ridge.gamma = config.gamma;
  return p;
}

RunResult run_solver(const Problem& problem, const RunConfig& config, SolverKind solver,
                     std::optional<double> stop_objective) {
  RunResult out;
  out.solver = solver;
  if (solver == SolverKind::prox_newton) {
    OuterConfig oc = config.outer;
    oc.seed = config.seed;
    if (stop_objective) {
      oc.target_objective = *stop_objective;
      oc.tol = kHarnessTol;
    }
    SolveResult r = solve(problem, oc);
    out.w = std::move(r.w);
    out.trace = std::move(r.trace);
    out.work = r.work;
    out.objective = r.objective;
    out.iterations = out.trace.size();
    out.status = r.status == SolveStatus::numeric_error ? r.message : std::string(to_string(r.status));
    if (r.status == SolveStatus::numeric_error) throw NumericError(r.message);
    return out;
  }
  BaselineConfig bc = config.baseline;
  bc.seed = config.seed;
  bc.algorithm = solver == SolverKind::svrg ? BaselineKind::svrg
                 : solver == SolverKind::saga ? BaselineKind::saga
                                              : BaselineKind::fista;
  if (stop_objective) bc.target_objective = *stop_objective;
  BaselineResult r = run_baseline(problem, bc);
  out.w = std::move(r.w);
  out.trace = std::move(r.trace);
  out.work = r.work;
  out.objective = r.objective;
  out.iterations = r.iterations;
  out.status = out.objective <= bc.target_objective ? "target" : "budget";
  return out;
}

std::optional<TraceRecord> first_within(const std::vector<TraceRecord>& trace, double f_star, double gap) {
  for (const TraceRecord& rec : trace)
    if (rec.F - f_star <= gap) return rec;
  return std::nullopt;
}

std::size_t thread_cap() {
  if (const char* env = std::getenv("SUBNEWTON_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*env != '\0' && *end == '\0' && v >= 1) return static_cast<std::size_t>(v);
    throw ConfigError("SUBNEWTON_THREADS must be a positive integer");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

// Runs jobs 0..count-1 on at most thread_cap() threads; rethrows the first failure.
template <class Job>
void parallel_for(std::size_t count, Job job) {
  const std::size_t workers = std::min(thread_cap(), count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    for (std::size_t k = next++; k < count; k = next++) {
      try {
        job(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(body);
  body();
  for (std::thread& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

CompareResult compare(const Problem& problem, const RunConfig& config) {
  CompareResult result;
  result.f_star = reference_solve(problem, config.reference_tol).objective;
  result.runs.resize(config.solvers.size());
  parallel_for(config.solvers.size(), [&](std::size_t k) {
    result.runs[k] = run_solver(problem, config, config.solvers[k], result.f_star + config.gap);
  });
  return result;
}

void write_compare_csv(std::ostream& out, const CompareResult& result) {
  out << "solver,metric,x,F_minus_Fstar\n";
  for (const RunResult& run : result.runs)
    for (const TraceRecord& rec : run.trace)
      out << to_string(run.solver) << ",evals," << rec.comp_grad_evals << ',' << format_double(rec.F - result.f_star)
          << '\n';
  for (const RunResult& run : result.runs)
    for (const TraceRecord& rec : run.trace)
      out << to_string(run.solver) << ",ms," << format_double(rec.wall_ms) << ','
          << format_double(rec.F - result.f_star) << '\n';
}

SweepResult sweep_inner(const Problem& problem, const RunConfig& config) {
  for (std::size_t k : config.inner_list)
    if (k == 0) throw ConfigError("inner iteration counts must be >= 1");
  SweepResult result;
  result.f_star = reference_solve(problem, config.reference_tol).objective;
  result.runs.resize(config.inner_list.size());
  parallel_for(config.inner_list.size(), [&](std::size_t k) {
    RunConfig c = config;
    c.outer.inner.mode = InnerMode::fixed_epochs;
    c.outer.inner.epochs = config.inner_list[k];
    c.outer.inner.epoch_length = ceil_fraction(problem.X().n(), 0.01);
    result.runs[k].inner = config.inner_list[k];
    result.runs[k].run = run_solver(problem, c, SolverKind::prox_newton, result.f_star + config.gap);
  });
  return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "inner," << trace_header() << ",F_minus_Fstar\n";
  for (const SweepRun& s : result.runs)
    for (const TraceRecord& rec : s.run.trace)
      out << s.inner << ',' << trace_row(rec) << ',' << format_double(rec.F - result.f_star) << '\n';
}

nlohmann::json diagnose(const Problem& problem, const RunConfig& config) {
  const DatasetStats stats = describe(problem.X());
  nlohmann::json j;
  j["dataset"] = {{"n", stats.n},
                  {"d", stats.d},
                  {"nnz", stats.nnz},
                  {"density", stats.density},
                  {"max_row_norm", stats.max_row_norm},
                  {"positives", stats.positives}};
  j["smooth_lipschitz"] = smooth_lipschitz(problem);
  j["max_component_lipschitz"] = max_component_lipschitz(problem);
  const SelfConcordanceReport sc =
      selfconcordance_check(problem.X(), problem.loss, RidgeSplit{problem.gamma()}, config.trials, config.radius,
                            config.seed);
  j["self_concordance"] = {{"scale", sc.scale},
                           {"trials", sc.trials},
                           {"radius", config.radius},
                           {"max_radius", sc.max_radius},
                           {"hessian_violations", sc.hessian_violations},
                           {"gradient_violations", sc.gradient_violations},
                           {"value_violations", sc.value_violations},
                           {"violations", sc.violations()}};
  return j;
}

namespace {

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) out << text;
  else write_file_atomic(path, text);
}

int run_train(const Problem& problem, const RunConfig& config, std::ostream& out) {
  RunResult r;
  int code = 0;
  std::string failure;
  try {
    r = run_solver(problem, config, config.solver);
  } catch (const NumericError& e) {
    failure = e.what();
    code = 3;
  }
  if (!config.trace_path.empty()) {
    std::ostringstream csv;
    write_trace_csv(csv, r.trace);
    write_file_atomic(config.trace_path, csv.str());
  }
  nlohmann::json summary;
  summary["solver"] = to_string(config.solver);
  summary["final_F"] = r.trace.empty() ? nlohmann::json() : nlohmann::json(r.objective);
  summary["iterations"] = r.iterations;
  summary["status"] = code == 0 ? r.status : failure;
  summary["counters"] = to_json(r.work);
  summary["config"] = to_json(config);
  if (!config.summary_path.empty()) write_file_atomic(config.summary_path, summary.dump(2) + "\n");
  if (code != 0) throw NumericError(failure);
  out << "final F = " << format_double(r.objective) << "\niterations = " << r.iterations << "\nstatus = " << r.status
      << '\n';
  return 0;
}

}  // namespace

int run_command(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    config.validate();
    const SparseDataset data = load_data(config);
    const Problem problem = make_problem(config, data);
    switch (config.command) {
      case Command::train: return run_train(problem, config, out);
      case Command::compare: {
        const CompareResult r = compare(problem, config);
        std::ostringstream csv;
        write_compare_csv(csv, r);
        emit(config.output_path, csv.str(), out);
        if (!config.summary_path.empty()) {
          nlohmann::json s;
          s["f_star"] = r.f_star;
          s["gap"] = config.gap;
          for (const RunResult& run : r.runs) {
            const auto hit = first_within(run.trace, r.f_star, config.gap);
            s["solvers"][std::string(to_string(run.solver))] = {
                {"final_F", run.objective},
                {"evals_to_gap", hit ? nlohmann::json(hit->comp_grad_evals) : nlohmann::json()},
                {"counters", to_json(run.work)}};
          }
          s["config"] = to_json(config);
          write_file_atomic(config.summary_path, s.dump(2) + "\n");
        }
        return 0;
      }
      case Command::sweep_inner: {
        const SweepResult r = sweep_inner(problem, config);
        std::ostringstream csv;
        write_sweep_csv(csv, r);
        emit(config.output_path, csv.str(), out);
        return 0;
      }
      case Command::diagnose: {
        const nlohmann::json j = diagnose(problem, config);
        emit(config.summary_path, j.dump(2) + "\n", out);
        return 0;
      }
    }
    return 1;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace subnewton
