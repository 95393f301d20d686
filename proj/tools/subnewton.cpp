// subnewton: train / compare / sweep-inner / diagnose from the command line.
#include <cstring>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "subnewton/bench.hpp"
#include "subnewton/error.hpp"

using namespace subnewton;

namespace {

// --config must be applied before the flags so that flags win.
std::string find_config(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--config") == 0 && i + 1 < argc) return argv[i + 1];
    if (std::strncmp(argv[i], "--config=", 9) == 0) return argv[i] + 9;
  }
  return {};
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  for (char ch : text) {
    if (ch == ',') {
      if (!item.empty()) out.push_back(item);
      item.clear();
    } else {
      item += ch;
    }
  }
  if (!item.empty()) out.push_back(item);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  try {
    const std::string config_path = find_config(argc, argv);
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) {
        std::cerr << "error: cannot open config file '" << config_path << "'\n";
        return 1;
      }
      apply_json(cfg, nlohmann::json::parse(in));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  CLI::App app{"Subsampled proximal Newton solver and benchmark harness"};
  app.fallthrough();
  app.require_subcommand(1);
  CLI::App* train = app.add_subcommand("train", "Run one solver and write its trace");
  CLI::App* cmp = app.add_subcommand("compare", "Run several solvers against a reference optimum");
  CLI::App* sweep = app.add_subcommand("sweep-inner", "Prox-newton with fixed inner epoch counts");
  CLI::App* diag = app.add_subcommand("diagnose", "Dataset statistics and the self-concordance sweep");

  std::string config_path, synthetic, loss, solver, solvers, inner, leverage, inner_list;
  app.add_option("--config", config_path, "JSON config; flags override its keys");
  app.add_option("--data", cfg.data_path, "LIBSVM file (.gz accepted)");
  app.add_option("--synthetic", synthetic, "n=..,d=..,density=..,noise=..,seed=..");
  app.add_flag("--bias", cfg.bias, "Append a constant feature");
  app.add_option("--loss", loss, "logistic | squared");
  app.add_option("--lambda1", cfg.lambda1, "l1 weight");
  app.add_option("--gamma", cfg.gamma, "ridge weight in the smooth part");
  app.add_option("--solver", solver, "prox-newton | svrg | saga | fista");
  app.add_option("--solvers", solvers, "comma list for compare");
  app.add_option("--theta", cfg.outer.theta, "forcing coefficient in (0, 1]");
  app.add_option("--beta", cfg.outer.beta, "Hessian approximation slack");
  app.add_option("--lambda-bar", cfg.outer.lambda_bar, "phase threshold");
  app.add_option("--inner", inner, "certificate | N fixed epochs");
  app.add_option("--catalyst", cfg.outer.inner.catalyst, "wrap SVRG in Catalyst (true/false)");
  app.add_option("--sample-c", cfg.outer.c_b, "sample-size constant");
  app.add_option("--mix-nu", cfg.outer.nu, "uniform mixing weight");
  app.add_option("--leverage", leverage, "exact | row-norm | automatic");
  app.add_flag("--exact-hessian", cfg.outer.exact_hessian_mode, "keep every row with its exact weight");
  app.add_option("--tol", cfg.outer.tol, "decrement stopping tolerance");
  app.add_option("--max-outer", cfg.outer.max_outer, "outer iteration cap");
  app.add_option("--epochs", cfg.baseline.epochs, "baseline epochs (FISTA: iterations)");
  app.add_option("--step", cfg.baseline.step, "baseline step size (0: auto)");
  app.add_option("--epoch-length", cfg.baseline.epoch_length, "SVRG baseline inner steps (0: 0.01 n)");
  app.add_option("--inner-list", inner_list, "comma list for sweep-inner");
  app.add_option("--gap", cfg.gap, "target F - F* for compare and sweep-inner");
  app.add_option("--reference-tol", cfg.reference_tol, "gradient-mapping tolerance of the F* run");
  app.add_option("--trials", cfg.trials, "diagnose: random pairs");
  app.add_option("--radius", cfg.radius, "diagnose: local-norm radius");
  app.add_option("--seed", cfg.seed, "random seed");
  app.add_option("--trace", cfg.trace_path, "trace CSV path");
  app.add_option("--summary", cfg.summary_path, "JSON summary path");
  app.add_option("--output", cfg.output_path, "CSV output for compare / sweep-inner (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (train->parsed()) cfg.command = Command::train;
    if (cmp->parsed()) cfg.command = Command::compare;
    if (sweep->parsed()) cfg.command = Command::sweep_inner;
    if (diag->parsed()) cfg.command = Command::diagnose;
    if (!synthetic.empty()) cfg.synthetic = parse_synthetic(synthetic);
    if (app.count("--data") && app.count("--synthetic")) throw ConfigError("give exactly one of --data or --synthetic");
    if (app.count("--data")) cfg.synthetic.reset();
    if (app.count("--synthetic")) cfg.data_path.clear();
    if (!loss.empty()) cfg.loss = parse_loss(loss);
    if (!solver.empty()) cfg.solver = parse_solver(solver);
    if (!solvers.empty()) {
      cfg.solvers.clear();
      for (const std::string& s : split_list(solvers)) cfg.solvers.push_back(parse_solver(s));
    }
    if (!inner.empty()) {
      if (inner == "certificate") {
        cfg.outer.inner.mode = InnerMode::certificate;
      } else {
        std::size_t pos = 0;
        const long long k = std::stoll(inner, &pos);
        if (pos != inner.size() || k < 1) throw ConfigError("--inner must be 'certificate' or a positive integer");
        cfg.outer.inner.mode = InnerMode::fixed_epochs;
        cfg.outer.inner.epochs = static_cast<std::size_t>(k);
      }
    }
    if (!leverage.empty()) cfg.outer.leverage = parse_leverage_method(leverage);
    if (!inner_list.empty()) {
      cfg.inner_list.clear();
      for (const std::string& s : split_list(inner_list)) {
        std::size_t pos = 0;
        const long long k = std::stoll(s, &pos);
        if (pos != s.size() || k < 1) throw ConfigError("inner list entries must be positive integers");
        cfg.inner_list.push_back(static_cast<std::size_t>(k));
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return run_command(cfg, std::cout, std::cerr);
}
