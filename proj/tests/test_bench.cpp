#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "subnewton/bench.hpp"
#include "subnewton/error.hpp"
#include "subnewton/trace.hpp"

using namespace subnewton;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "subnewton_test_bench";
  fs::create_directories(dir);
  return dir / name;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(SUBNEWTON_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Trace text with the wall_ms column removed.
std::string without_wall(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

RunConfig small_config() {
  RunConfig c;
  SyntheticSpec s;
  s.n = 300;
  s.d = 8;
  s.label_noise = 0.1;
  s.seed = 4;
  c.synthetic = s;
  c.lambda1 = 1e-3;
  c.gamma = 1e-3;
  return c;
}

}  // namespace

TEST_CASE("names and synthetic spec parsing") {
  CHECK(parse_command("sweep-inner") == Command::sweep_inner);
  CHECK(parse_solver("prox-newton") == SolverKind::prox_newton);
  CHECK(to_string(SolverKind::saga) == "saga");
  CHECK_THROWS_AS(parse_solver("lbfgs"), ConfigError);
  const SyntheticSpec s = parse_synthetic("n=200,d=10,density=0.5,noise=0.1,seed=3");
  CHECK(s.n == 200);
  CHECK(s.d == 10);
  CHECK(s.density == 0.5);
  CHECK(s.label_noise == 0.1);
  CHECK(s.seed == 3);
  CHECK_THROWS_AS(parse_synthetic("n=200,q=1"), ConfigError);
  CHECK_THROWS_AS(parse_synthetic("n=abc"), ConfigError);
}

TEST_CASE("format_double round-trips") {
  for (double x : {0.0, -1.5, 0.1, 1e-300, 3.141592653589793, 123456789.125}) CHECK(parse_double(format_double(x)) == x);
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(std::isnan(parse_double(format_double(std::nan("")))));
}

TEST_CASE("trace schema round-trip") {
  std::vector<TraceRecord> trace(3);
  for (std::size_t t = 0; t < 3; ++t) {
    trace[t].t = t;
    trace[t].phase = t == 2 ? Phase::unit : Phase::damped;
    trace[t].lambda_tilde = 0.1 / static_cast<double>(t + 1);
    trace[t].F = 0.3 + 1e-17 * static_cast<double>(t);
    trace[t].eta = 0.75;
    trace[t].inner_epochs = t + 2;
    trace[t].certified = t != 1;
    trace[t].comp_grad_evals = 1000 * (t + 1);
    trace[t].full_grad_evals = t + 1;
    trace[t].wall_ms = 1.25 * static_cast<double>(t);
  }
  std::ostringstream out;
  write_trace_csv(out, trace);
  std::istringstream header_in(out.str());
  std::string header;
  std::getline(header_in, header);
  std::string expect;
  for (std::string_view c : kTraceColumns) expect += std::string(c) + ",";
  expect.pop_back();
  CHECK(header == expect);

  std::istringstream in(out.str());
  const auto back = read_trace_csv(in);
  REQUIRE(back.size() == 3);
  for (std::size_t t = 0; t < 3; ++t) {
    CHECK(back[t].t == trace[t].t);
    CHECK(back[t].phase == trace[t].phase);
    CHECK(back[t].lambda_tilde == trace[t].lambda_tilde);
    CHECK(back[t].F == trace[t].F);
    CHECK(back[t].certified == trace[t].certified);
    CHECK(back[t].comp_grad_evals == trace[t].comp_grad_evals);
    CHECK(back[t].wall_ms == trace[t].wall_ms);
  }
  std::istringstream bad("t,phase,F\n0,I,1\n");
  CHECK_THROWS_AS(read_trace_csv(bad), DataError);
}

TEST_CASE("json config overlay") {
  RunConfig c;
  apply_json(c, nlohmann::json::parse(R"({"synthetic": "n=50,d=4", "lambda1": 0.5, "inner": 3, "solver": "saga"})"));
  REQUIRE(c.synthetic.has_value());
  CHECK(c.synthetic->n == 50);
  CHECK(c.lambda1 == 0.5);
  CHECK(c.outer.inner.mode == InnerMode::fixed_epochs);
  CHECK(c.outer.inner.epochs == 3);
  CHECK(c.solver == SolverKind::saga);
  CHECK_THROWS_AS(apply_json(c, nlohmann::json::parse(R"({"lamda1": 0.5})")), ConfigError);

  RunConfig echo;
  apply_json(echo, to_json(c));
  CHECK(echo.lambda1 == c.lambda1);
  CHECK(echo.outer.inner.epochs == 3);
  CHECK(echo.synthetic->n == 50);
}

TEST_CASE("validation") {
  RunConfig c = small_config();
  CHECK_NOTHROW(c.validate());
  c.inner_list = {1, 0, 2};
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.data_path = "x.svm";
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.gamma = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("first_within picks the first qualifying row") {
  std::vector<TraceRecord> trace(4);
  const double F[] = {1.0, 0.5, 0.1000001, 0.1};
  for (std::size_t t = 0; t < 4; ++t) {
    trace[t].F = F[t];
    trace[t].comp_grad_evals = 10 * t;
  }
  const auto hit = first_within(trace, 0.1, 1e-6);
  REQUIRE(hit.has_value());
  CHECK(hit->comp_grad_evals == 20);
  CHECK_FALSE(first_within(trace, 0.0, 1e-3).has_value());
}

TEST_CASE("compare shares one reference optimum") {
  RunConfig c = small_config();
  c.solvers = {SolverKind::fista, SolverKind::prox_newton};
  c.gap = 1e-8;
  const SparseDataset data = load_data(c);
  const Problem p = make_problem(c, data);
  const CompareResult r = compare(p, c);
  REQUIRE(r.runs.size() == 2);
  CHECK(r.runs[0].solver == SolverKind::fista);
  for (const RunResult& run : r.runs) {
    CHECK(run.objective - r.f_star <= 1e-8);
    CHECK(first_within(run.trace, r.f_star, 1e-8).has_value());
  }
  std::ostringstream out;
  write_compare_csv(out, r);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("solver,metric,x,F_minus_Fstar", 0) == 0);
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows >= 4);
}

TEST_CASE("sweep runs one trace per inner count") {
  RunConfig c = small_config();
  c.inner_list = {1, 2};
  c.gap = 1e-6;
  const SparseDataset data = load_data(c);
  const Problem p = make_problem(c, data);
  const SweepResult r = sweep_inner(p, c);
  REQUIRE(r.runs.size() == 2);
  CHECK(r.runs[0].inner == 1);
  CHECK(r.runs[1].inner == 2);
  for (const SweepRun& s : r.runs)
    for (const TraceRecord& rec : s.run.trace) CHECK(rec.inner_epochs == s.inner);
}

TEST_CASE("cli: train smoke test and exit codes") {
  const fs::path trace = scratch("fista.csv"), summary = scratch("fista.json");
  CHECK(cli("train --synthetic n=200,d=10 --solver fista --epochs 50 --trace " + trace.string() +
            " --summary " + summary.string()) == 0);
  std::ifstream in(trace);
  const auto rows = read_trace_csv(in);
  CHECK(rows.size() >= 1);
  const auto j = nlohmann::json::parse(slurp(summary));
  CHECK(j["solver"] == "fista");
  CHECK(j["final_F"].is_number());

  CHECK(cli("train --data " + scratch("does_not_exist.svm").string()) == 2);
  CHECK(cli("train --synthetic n=200,d=10 --gamma -1") == 1);
  CHECK(cli("train --synthetic n=200,d=10 --inner 0") == 1);
  CHECK(cli("sweep-inner --synthetic n=200,d=10 --inner-list 1,0") == 1);
  CHECK(cli("frobnicate") == 1);
  CHECK(cli("--help") == 0);
}

TEST_CASE("cli: reruns are identical apart from wall time") {
  for (const std::string solver : {"prox-newton", "saga"}) {
    const fs::path a = scratch(solver + "_a.csv"), b = scratch(solver + "_b.csv");
    const std::string args = "train --synthetic n=300,d=10,noise=0.1 --solver " + solver + " --seed 7 --epochs 5 --trace ";
    REQUIRE(cli(args + a.string()) == 0);
    REQUIRE(cli(args + b.string()) == 0);
    const std::string ta = slurp(a), tb = slurp(b);
    CHECK(ta.size() > 0);
    CHECK(without_wall(ta) == without_wall(tb));
  }
}

TEST_CASE("cli: flags override the json config") {
  const fs::path cfg = scratch("config.json"), summary = scratch("override.json");
  {
    std::ofstream out(cfg);
    out << R"({"synthetic": "n=100,d=5", "lambda1": 0.5, "solver": "fista", "epochs": 20})";
  }
  REQUIRE(cli("train --config " + cfg.string() + " --lambda1 0.25 --summary " + summary.string()) == 0);
  const auto j = nlohmann::json::parse(slurp(summary));
  CHECK(j["config"]["lambda1"] == 0.25);
  CHECK(j["config"]["solver"] == "fista");
  CHECK(j["config"]["synthetic"]["n"] == 100);

  const fs::path data = scratch("tiny.svm");
  {
    std::ofstream out(data);
    out << "1 1:1 2:0.5\n-1 1:-1 3:2\n1 2:1\n";
  }
  REQUIRE(cli("train --config " + cfg.string() + " --data " + data.string() + " --summary " + summary.string()) == 0);
  const auto k = nlohmann::json::parse(slurp(summary));
  CHECK(k["config"]["data"] == data.string());
}

TEST_CASE("cli: compare and diagnose write their outputs") {
  const fs::path out = scratch("compare.csv"), diag = scratch("diag.json");
  REQUIRE(cli("compare --synthetic n=200,d=6 --solvers fista,saga --gap 1e-6 --output " + out.string()) == 0);
  CHECK(slurp(out).rfind("solver,metric,x,F_minus_Fstar", 0) == 0);
  REQUIRE(cli("diagnose --synthetic n=200,d=6 --trials 50 --summary " + diag.string()) == 0);
  const auto j = nlohmann::json::parse(slurp(diag));
  CHECK(j["dataset"]["n"] == 200);
  CHECK(j["self_concordance"]["trials"] == 50);
}
