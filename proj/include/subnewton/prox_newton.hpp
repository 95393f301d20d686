#pragma once
// Inexact subsampled proximal Newton outer loop.
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "subnewton/inner.hpp"
#include "subnewton/leverage.hpp"
#include "subnewton/models.hpp"

namespace subnewton {

// zeta(x) = x - log(1 + x) for x >= 0; zeta_star(x) = -x - log(1 - x) for 0 <= x < 1.
double zeta(double x);
double zeta_star(double x);

// Damped step (theta - beta) / (1 + (theta - beta) lambda / sqrt(1 - beta)).
double phase1_step(double theta, double beta, double lambda_tilde);

struct InnerTarget {
  double dual = 0.0;       // bound on ||r||* in the B_t metric
  double value_gap = 0.0;  // eps_t, the matching bound on f_sub(v) - f_sub*
};
// dual = (1 - theta) lambda / sqrt(1 + beta); value_gap = mu L / (2 (L^2 - mu^2)) dual^2,
// or 0 when L <= mu.
InnerTarget inner_target(double theta, double lambda_tilde, double beta, double lip, double mu);

enum class Phase { damped, unit, none };  // none: first-order baselines
std::string_view to_string(Phase phase);  // "I" / "II" / "-"

struct OuterConfig {
  double theta = 0.9;
  double beta = 0.05;
  double lambda_bar = 1.0 / 6.0;
  double tol = 1e-8;
  std::size_t max_outer = 100;
  double nu = 0.1;
  double c_b = 4.0;
  LeverageMethod leverage = LeverageMethod::automatic;
  bool allow_oversample = false;
  InnerConfig inner;
  std::uint64_t seed = 1;
  // Every row kept with its exact weight; beta is treated as 0 in the step logic.
  bool exact_hessian_mode = false;
  // Harness hook: also stop once F(w_t) <= target_objective.
  double target_objective = -std::numeric_limits<double>::infinity();
  void validate() const;
};

struct TraceRecord {
  std::size_t t = 0;
  Phase phase = Phase::damped;
  double lambda_tilde = 0.0;
  double F = 0.0;  // objective after the step
  double eta = 0.0;
  std::size_t inner_epochs = 0;
  bool certified = false;
  std::uint64_t comp_grad_evals = 0;  // cumulative single-row evaluations
  std::uint64_t full_grad_evals = 0;  // cumulative full passes
  double wall_ms = 0.0;
};

// Everything an observer may want to inspect about iteration t.
struct IterationView {
  std::size_t t = 0;
  std::span<const double> w;       // anchor w_t
  const SubsampledQuadratic* model = nullptr;
  std::span<const double> v_init;  // warm start handed to the inner solver
  std::span<const double> v;       // accepted step
  double lambda_tilde = 0.0;
  double beta = 0.0;               // beta used by the step logic (0 in exact mode)
  Phase phase = Phase::damped;
  double eta = 0.0;
  double F_before = 0.0;
  double F_after = 0.0;
  const InnerReport* inner = nullptr;
};
using Observer = std::function<void(const IterationView&)>;

enum class SolveStatus { converged, max_iterations, numeric_error };
std::string_view to_string(SolveStatus status);

struct SolveResult {
  std::vector<double> w;
  std::vector<TraceRecord> trace;
  WorkCounters work;
  SolveStatus status = SolveStatus::max_iterations;
  double objective = 0.0;
  std::size_t descent_violations = 0;  // certified damped steps that failed to decrease F
  std::string message;
};

SolveResult solve(const Problem& problem, const OuterConfig& config, const Observer& observer = {});

}  // namespace subnewton
