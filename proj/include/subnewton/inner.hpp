#pragma once

// Prox-SVRG on the finite-sum model and the Catalyst acceleration wrapper.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "subnewton/subproblem.hpp"

namespace subnewton {

// Row-level work, the machine-independent cost axis.
struct WorkCounters {
  std::uint64_t component_grads = 0;  // single-row gradient evaluations
  std::uint64_t hessian_rows = 0;     // single-row terms of B_t v products
  std::uint64_t full_grads = 0;       // full passes over the data

  std::uint64_t row_evals() const { return component_grads + hessian_rows; }
  WorkCounters& operator+=(const WorkCounters& o) {
    component_grads += o.component_grads;
    hessian_rows += o.hessian_rows;
    full_grads += o.full_grads;
    return *this;
  }
};

struct LipschitzEstimate {
  double top = 0.0;        // L_B, largest eigenvalue of B_t (power iteration)
  double floor = 0.0;      // mu_B = gamma
  double component = 0.0;  // max_k K c_k ||x_k||^2 + gamma, smoothness of each phi_k
  std::size_t iterations = 0;
};

// 30 power iterations at most, stopping at relative change < 1e-3. The start
// vector is drawn from `seed`.
LipschitzEstimate estimate_lipschitz(const SubsampledQuadratic& q, std::uint64_t seed = 0x1f,
                                     WorkCounters* work = nullptr);
// max_k K c_k ||x_k||^2 + gamma, closed form.
double component_lipschitz(const SubsampledQuadratic& q);

enum class InnerMode { fixed_epochs, certificate };

struct InnerConfig {
  InnerMode mode = InnerMode::certificate;
  // Fixed mode: epochs to run. Certificate mode: epoch budget of the first
  // attempt; each retry doubles it.
  std::size_t epochs = 10;
  std::size_t retries = 3;
  std::size_t epoch_length = 0;  // 0: one pass over the K slots
  double step = 0.0;             // 0: auto, 1 / (4 L_component)
  bool catalyst = true;
  double catalyst_zeta = -1.0;   // < 0: auto, max(L_component / K - mu_B, 0)
  std::size_t catalyst_stage_epochs = 1;
  // Certified when ||r||* <= target + relative * dec + quadratic * dec^2,
  // dec being the model decrement of the certified step.
  double target = 0.0;
  double relative_target = 0.0;
  double quadratic_target = 0.0;
  double certificate_step = 0.0;  // 0: 1 / L_B
  double cg_tol = 1e-2;
  std::size_t cg_max_iter = 50;
  double failure_budget = 0.05;   // per-call failure probability, echoed in reports
  // Optional monitor, called after every epoch (or Catalyst stage) with the
  // current iterate; returning true stops the solve.
  std::function<bool(std::span<const double>)> stop_when;

  void validate() const;
};

struct InnerReport {
  std::vector<double> v_out;
  std::size_t epochs = 0;
  std::size_t stages = 0;
  WorkCounters work;
  bool certified = false;
  double dual_norm = std::numeric_limits<double>::quiet_NaN();
  double decrement = std::numeric_limits<double>::quiet_NaN();
  double target = std::numeric_limits<double>::quiet_NaN();
  double step = 0.0;
  double zeta = 0.0;
  LipschitzEstimate lipschitz;
};

InnerReport prox_svrg(const SubsampledQuadratic& q, const Regularizer& reg,
                      std::span<const double> v0, const InnerConfig& config, Rng& rng);

// Universal Catalyst around prox_svrg. Falls back to plain prox_svrg when the
// smoothing parameter is zero.
InnerReport catalyst_solve(const SubsampledQuadratic& q, const Regularizer& reg,
                           std::span<const double> v0, const InnerConfig& config, Rng& rng);

// Next Catalyst weight: positive root of a^2 = (1 - a) alpha^2 + q alpha.
double catalyst_next_alpha(double alpha, double q);

// Dispatches on config.catalyst.
InnerReport inner_solve(const SubsampledQuadratic& q, const Regularizer& reg,
                        std::span<const double> v0, const InnerConfig& config, Rng& rng);

}  // namespace subnewton
