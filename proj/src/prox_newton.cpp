#include "subnewton/prox_newton.hpp"

#include <chrono>
#include <algorithm>
#include <cmath>
#include <string>

#include "subnewton/error.hpp"
#include "subnewton/subproblem.hpp"

namespace subnewton {

namespace {

// Absolute floor on the certificate so a zero decrement still terminates.
constexpr double kCertificateFloor = 1e-13;
// With theta = 1 an exact solve is demanded; the certificate asks for a
// residual quadratically small in the decrement instead.
constexpr double kExactSolveForcing = 1e-3;

}  // namespace

double zeta(double x) {
  if (x < 0.0) throw ConfigError("zeta needs x >= 0");
  return x - std::log1p(x);
}

double zeta_star(double x) {
  if (!(x >= 0.0 && x < 1.0)) throw ConfigError("zeta_star needs 0 <= x < 1");
  return -x - std::log1p(-x);
}

double phase1_step(double theta, double beta, double lambda_tilde) {
  const double gap = theta - beta;
  return gap / (1.0 + gap * lambda_tilde / std::sqrt(1.0 - beta));
}

InnerTarget inner_target(double theta, double lambda_tilde, double beta, double lip, double mu) {
  InnerTarget out;
  out.dual = (1.0 - theta) * lambda_tilde / std::sqrt(1.0 + beta);
  if (lip > mu) out.value_gap = mu * lip / (2.0 * (lip * lip - mu * mu)) * out.dual * out.dual;
  return out;
}

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::damped: return "I";
    case Phase::unit: return "II";
    case Phase::none: return "-";
  }
  return "?";
}

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iterations: return "max_iterations";
    case SolveStatus::numeric_error: return "numeric_error";
  }
  return "unknown";
}

void OuterConfig::validate() const {
  if (!(theta > 0.0 && theta <= 1.0)) throw ConfigError("theta must lie in (0, 1]");
  if (!exact_hessian_mode && !(beta > 0.0 && beta < std::min(theta, 1.0 / 3.0)))
    throw ConfigError("beta must lie in (0, min(theta, 1/3))");
  if (!(lambda_bar > 0.0)) throw ConfigError("lambda-bar must be > 0");
  if (!(tol > 0.0)) throw ConfigError("tolerance must be > 0");
  if (max_outer == 0) throw ConfigError("max outer iterations must be >= 1");
  if (!(nu >= 0.0 && nu < 1.0)) throw ConfigError("mixing weight nu must lie in [0, 1)");
  if (!(c_b > 0.0)) throw ConfigError("sample constant must be > 0");
  InnerConfig probe = inner;
  if (probe.mode == InnerMode::certificate) probe.target = 1.0;
  probe.validate();
}

SolveResult solve(const Problem& problem, const OuterConfig& config, const Observer& observer) {
  problem.validate();
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const SparseDataset& data = problem.X();
  const std::size_t n = data.n();
  const std::size_t d = data.d();
  const double gamma = problem.gamma();
  const double beta = config.exact_hessian_mode ? 0.0 : config.beta;

  SolveResult result;
  result.w.assign(d, 0.0);
  std::vector<double> u = margins(data, result.w);
  SmoothEval smooth = smooth_eval(data, problem.loss, gamma, result.w, u);
  double F = smooth.value + problem.reg.value(result.w);
  result.work.component_grads += n;
  ++result.work.full_grads;
  result.objective = F;

  std::vector<double> w_plus_prev;
  for (std::size_t t = 0; t < config.max_outer; ++t) {
    const std::vector<double>& w = result.w;
    const CurvatureDiag curv = curvature_from_margins(data, problem.loss, u);
    SubsampledQuadratic q;
    if (config.exact_hessian_mode) {
      q = exact_quadratic(data, curv, smooth.gradient, gamma, w);
    } else {
      const std::vector<double> scores = sampling_scores(data, curv, config.leverage);
      const SamplingPlan plan = sampling_plan(scores, config.beta, config.nu, config.c_b, d, n,
                                              config.allow_oversample);
      Rng draw_rng = make_stream(config.seed, t, 1);
      q = draw_subsample(data, plan, curv, smooth.gradient, gamma, w, draw_rng);
    }

    std::vector<double> v_init(d, 0.0);
    if (!w_plus_prev.empty())
      for (std::size_t j = 0; j < d; ++j) v_init[j] = w_plus_prev[j] - w[j];

    InnerConfig inner = config.inner;
    if (inner.mode == InnerMode::certificate) {
      inner.relative_target = (1.0 - config.theta) / std::sqrt(1.0 + beta);
      if (config.theta == 1.0) inner.quadratic_target = kExactSolveForcing;
      inner.target = std::max(inner.target, kCertificateFloor);
    }
    Rng inner_rng = make_stream(config.seed, t, 2);
    const InnerReport report = inner_solve(q, problem.reg, v_init, inner, inner_rng);
    result.work += report.work;
    const std::vector<double>& v = report.v_out;

    const double lambda = newton_decrement(q, v);
    result.work.hessian_rows += q.size();
    const Phase phase = lambda / std::sqrt(1.0 - beta) > config.lambda_bar ? Phase::damped : Phase::unit;
    const double eta = phase == Phase::damped ? phase1_step(config.theta, beta, lambda) : 1.0;

    std::vector<double> w_plus(w);
    kernels::axpy(1.0, v, w_plus);
    std::vector<double> w_next(w);
    kernels::axpy(eta, v, w_next);
    std::vector<double> u_next = margins(data, w_next);
    SmoothEval smooth_next = smooth_eval(data, problem.loss, gamma, w_next, u_next);
    const double F_next = smooth_next.value + problem.reg.value(w_next);
    result.work.component_grads += n;
    ++result.work.full_grads;

    if (phase == Phase::damped && report.certified && !(F_next < F)) ++result.descent_violations;

    if (observer) {
      IterationView view;
      view.t = t;
      view.w = w;
      view.model = &q;
      view.v_init = v_init;
      view.v = v;
      view.lambda_tilde = lambda;
      view.beta = beta;
      view.phase = phase;
      view.eta = eta;
      view.F_before = F;
      view.F_after = F_next;
      view.inner = &report;
      observer(view);
    }

    TraceRecord rec;
    rec.t = t;
    rec.phase = phase;
    rec.lambda_tilde = lambda;
    rec.F = F_next;
    rec.eta = eta;
    rec.inner_epochs = report.epochs;
    rec.certified = report.certified;
    rec.comp_grad_evals = result.work.row_evals();
    rec.full_grad_evals = result.work.full_grads;
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    result.trace.push_back(rec);

    if (!std::isfinite(F_next)) {
      result.status = SolveStatus::numeric_error;
      result.message = "objective became non-finite at outer iteration " + std::to_string(t);
      return result;
    }

    result.w = std::move(w_next);
    u = std::move(u_next);
    smooth = std::move(smooth_next);
    F = F_next;
    result.objective = F;
    w_plus_prev = std::move(w_plus);

    if (lambda * lambda / (1.0 - beta) <= config.tol || F <= config.target_objective) {
      result.status = SolveStatus::converged;
      break;
    }
  }
  return result;
}

}  // namespace subnewton
