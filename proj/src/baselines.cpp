#include "subnewton/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "subnewton/error.hpp"

namespace subnewton {

namespace {

constexpr double kSpectralSafety = 1.02;
constexpr std::size_t kSpectralIterations = 100;

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

TraceRecord make_record(std::size_t t, double F, double eta, const WorkCounters& work,
                        Clock::time_point start) {
  TraceRecord rec;
  rec.t = t;
  rec.phase = Phase::none;
  rec.lambda_tilde = std::numeric_limits<double>::quiet_NaN();
  rec.F = F;
  rec.eta = eta;
  rec.inner_epochs = 0;
  rec.certified = false;
  rec.comp_grad_evals = work.row_evals();
  rec.full_grad_evals = work.full_grads;
  rec.wall_ms = elapsed_ms(start);
  return rec;
}

// (1/n) X^T coef + gamma w
std::vector<double> gradient_from_derivs(const SparseDataset& data, std::span<const double> derivs,
                                         double gamma, std::span<const double> w) {
  std::vector<double> g(w.begin(), w.end());
  for (double& x : g) x *= gamma;
  const double inv_n = 1.0 / static_cast<double>(data.n());
  std::vector<double> scaled(derivs.begin(), derivs.end());
  for (double& x : scaled) x *= inv_n;
  accumulate_rows(data, scaled, g);
  return g;
}

double derivative(const Problem& p, double u, std::size_t i) {
  return loss_point(p.loss, u, p.X().label(i)).first;
}

}  // namespace

BaselineKind parse_baseline(std::string_view name) {
  if (name == "svrg") return BaselineKind::svrg;
  if (name == "saga") return BaselineKind::saga;
  if (name == "fista") return BaselineKind::fista;
  throw ConfigError("unknown baseline '" + std::string(name) + "'");
}

std::string_view to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::svrg: return "svrg";
    case BaselineKind::saga: return "saga";
    case BaselineKind::fista: return "fista";
  }
  return "?";
}

void BaselineConfig::validate() const {
  if (step < 0.0) throw ConfigError("baseline step must be > 0 (or 0 for auto)");
  if (epochs == 0) throw ConfigError("baseline epochs must be >= 1");
  if (tol < 0.0) throw ConfigError("baseline tolerance must be >= 0");
}

double data_spectral_bound(const SparseDataset& data, std::uint64_t seed) {
  const std::size_t d = data.d();
  if (d == 0 || data.n() == 0) return 0.0;
  Rng rng = make_stream(seed, 0x51);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(d);
  for (double& x : v) x = normal(rng);
  double norm = std::sqrt(kernels::squared_norm(v));
  for (double& x : v) x /= norm;
  const double inv_n = 1.0 / static_cast<double>(data.n());
  std::vector<double> u(data.n());
  double top = 0.0;
  double prev = 0.0;
  for (std::size_t it = 0; it < kSpectralIterations; ++it) {
    margins_into(data, v, u);
    for (double& x : u) x *= inv_n;
    std::vector<double> xv(d, 0.0);
    accumulate_rows(data, u, xv);
    top = std::max(top, kernels::dot(v, xv));
    norm = std::sqrt(kernels::squared_norm(xv));
    if (!(norm > 0.0)) break;
    for (std::size_t j = 0; j < d; ++j) v[j] = xv[j] / norm;
    if (it > 0 && std::fabs(top - prev) < 1e-6 * top) break;
    prev = top;
  }
  return kSpectralSafety * top;
}

double smooth_lipschitz(const Problem& problem) {
  return curvature_bound(problem.loss) * data_spectral_bound(problem.X()) + problem.gamma();
}

double max_component_lipschitz(const Problem& problem) {
  return curvature_bound(problem.loss) * problem.X().max_row_squared_norm() + problem.gamma();
}

BaselineResult fista_solve(const Problem& problem, const BaselineConfig& config) {
  problem.validate();
  config.validate();
  const auto start = Clock::now();
  const SparseDataset& data = problem.X();
  const std::size_t n = data.n();
  const std::size_t d = data.d();
  const double gamma = problem.gamma();

  BaselineResult res;
  res.step = config.step > 0.0 ? config.step : 1.0 / smooth_lipschitz(problem);
  const double eta = res.step;

  std::vector<double> x(d, 0.0);
  std::vector<double> ux(n, 0.0);  // margins of x
  double F = smooth_value(data, problem.loss, gamma, x, ux) + problem.reg.value(x);
  res.work.component_grads += n;
  std::vector<double> y = x;
  std::vector<double> uy = ux;
  double momentum = 1.0;
  res.trace.push_back(make_record(0, F, eta, res.work, start));

  for (std::size_t it = 1; it <= config.epochs; ++it) {
    const SmoothEval at_y = smooth_eval(data, problem.loss, gamma, y, uy);
    res.work.component_grads += n;
    ++res.work.full_grads;
    std::vector<double> x_new(y);
    kernels::axpy(-eta, at_y.gradient, x_new);
    prox_inplace(problem.reg, x_new, eta);
    std::vector<double> u_new = margins(data, x_new);
    const double F_new = smooth_value(data, problem.loss, gamma, x_new, u_new) + problem.reg.value(x_new);
    res.work.component_grads += n;

    double gm = 0.0;
    for (std::size_t j = 0; j < d; ++j) gm += (y[j] - x_new[j]) * (y[j] - x_new[j]);
    res.grad_mapping = std::sqrt(gm) / eta;
    res.iterations = it;

    if (config.restart && F_new > F && momentum > 1.0) {
      // Objective went up: drop the momentum and restart from x.
      y = x;
      uy = ux;
      momentum = 1.0;
      res.trace.push_back(make_record(it, F, eta, res.work, start));
      continue;
    }
    const double next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    const double beta = (momentum - 1.0) / next;
    for (std::size_t j = 0; j < d; ++j) y[j] = x_new[j] + beta * (x_new[j] - x[j]);
    for (std::size_t i = 0; i < n; ++i) uy[i] = u_new[i] + beta * (u_new[i] - ux[i]);
    momentum = next;
    x = std::move(x_new);
    ux = std::move(u_new);
    F = F_new;
    res.trace.push_back(make_record(it, F, eta, res.work, start));
    if (!std::isfinite(F)) throw NumericError("FISTA objective became non-finite");
    if (res.grad_mapping <= config.tol || F <= config.target_objective) break;
  }
  res.w = std::move(x);
  res.objective = F;
  return res;
}

BaselineResult prox_svrg_full(const Problem& problem, const BaselineConfig& config, Rng& rng) {
  problem.validate();
  config.validate();
  const auto start = Clock::now();
  const SparseDataset& data = problem.X();
  const std::size_t n = data.n();
  const std::size_t d = data.d();
  const double gamma = problem.gamma();

  BaselineResult res;
  res.step = config.step > 0.0 ? config.step : 1.0 / (3.0 * max_component_lipschitz(problem));
  const double eta = res.step;
  const std::size_t m = config.epoch_length > 0
                            ? config.epoch_length
                            : static_cast<std::size_t>(std::ceil(0.01 * static_cast<double>(n)));

  std::vector<double> w(d, 0.0);
  std::vector<double> snap(d);
  std::vector<double> snap_derivs(n);
  std::vector<double> u(n);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);

  margins_into(data, w, u);
  res.trace.push_back(make_record(0, smooth_value(data, problem.loss, gamma, w, u) + problem.reg.value(w), eta,
                                  res.work, start));
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    snap = w;
    for (std::size_t i = 0; i < n; ++i) snap_derivs[i] = derivative(problem, u[i], i);
    const std::vector<double> snap_grad = gradient_from_derivs(data, snap_derivs, gamma, snap);
    res.work.component_grads += n;
    ++res.work.full_grads;
    for (std::size_t s = 0; s < m; ++s) {
      const std::size_t i = pick(rng);
      const RowView r = data.row(i);
      const double coef = derivative(problem, kernels::sparse_dot(r.idx, r.val, w), i) - snap_derivs[i];
      kernels::vr_dense_step(w, snap, snap_grad, eta, gamma);
      kernels::sparse_axpy(-eta * coef, r.idx, r.val, w);
      prox_inplace(problem.reg, w, eta);
      ++res.work.component_grads;
    }
    margins_into(data, w, u);  // reused by the next snapshot
    const double F = smooth_value(data, problem.loss, gamma, w, u) + problem.reg.value(w);
    res.iterations = epoch;
    res.trace.push_back(make_record(epoch, F, eta, res.work, start));
    if (!std::isfinite(F)) throw NumericError("SVRG objective became non-finite");
    if (F <= config.target_objective) break;
  }
  res.objective = res.trace.back().F;
  res.w = std::move(w);
  return res;
}

SagaState::SagaState(const Problem& problem, std::span<const double> w0)
    : problem_(problem), gamma_(problem.gamma()), w_(w0.begin(), w0.end()) {
  const SparseDataset& data = problem.X();
  const std::vector<double> u = margins(data, w_);
  table_.resize(data.n());
  for (std::size_t i = 0; i < data.n(); ++i) table_[i] = derivative(problem, u[i], i);
  avg_ = recomputed_average();
}

std::vector<double> SagaState::recomputed_average() const {
  const SparseDataset& data = problem_.X();
  std::vector<double> avg(data.d(), 0.0);
  std::vector<double> scaled(table_);
  const double inv_n = 1.0 / static_cast<double>(data.n());
  for (double& x : scaled) x *= inv_n;
  accumulate_rows(data, scaled, avg);
  return avg;
}

std::vector<double> SagaState::direction(std::size_t j) const {
  const RowView r = problem_.X().row(j);
  const double a = derivative(problem_, kernels::sparse_dot(r.idx, r.val, w_), j);
  std::vector<double> out(avg_);
  kernels::axpy(gamma_, w_, out);
  kernels::sparse_axpy(a - table_[j], r.idx, r.val, out);
  return out;
}

void SagaState::step(std::size_t j, double eta) {
  const RowView r = problem_.X().row(j);
  const double a = derivative(problem_, kernels::sparse_dot(r.idx, r.val, w_), j);
  const double delta = a - table_[j];
  kernels::vr_dense_step(w_, {}, avg_, eta, gamma_);
  kernels::sparse_axpy(-eta * delta, r.idx, r.val, w_);
  prox_inplace(problem_.reg, w_, eta);
  kernels::sparse_axpy(delta / static_cast<double>(problem_.X().n()), r.idx, r.val, avg_);
  table_[j] = a;
}

BaselineResult saga_solve(const Problem& problem, const BaselineConfig& config, Rng& rng) {
  problem.validate();
  config.validate();
  const auto start = Clock::now();
  const SparseDataset& data = problem.X();
  const std::size_t n = data.n();
  const double gamma = problem.gamma();

  BaselineResult res;
  res.step = config.step > 0.0 ? config.step : 1.0 / (3.0 * max_component_lipschitz(problem));
  const double eta = res.step;

  std::vector<double> w0(data.d(), 0.0);
  SagaState state(problem, w0);
  res.work.component_grads += n;
  ++res.work.full_grads;
  std::vector<double> u = margins(data, state.w());
  res.trace.push_back(make_record(0, smooth_value(data, problem.loss, gamma, state.w(), u) +
                                         problem.reg.value(state.w()),
                                  eta, res.work, start));
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t s = 0; s < n; ++s) state.step(pick(rng), eta);
    res.work.component_grads += n;
    margins_into(data, state.w(), u);
    const double F = smooth_value(data, problem.loss, gamma, state.w(), u) + problem.reg.value(state.w());
    res.iterations = epoch;
    res.trace.push_back(make_record(epoch, F, eta, res.work, start));
    if (!std::isfinite(F)) throw NumericError("SAGA objective became non-finite");
    if (F <= config.target_objective) break;
  }
  res.objective = res.trace.back().F;
  res.w.assign(state.w().begin(), state.w().end());
  return res;
}

BaselineResult run_baseline(const Problem& problem, const BaselineConfig& config) {
  Rng rng = make_stream(config.seed, 0xba5e);
  switch (config.algorithm) {
    case BaselineKind::fista: return fista_solve(problem, config);
    case BaselineKind::svrg: return prox_svrg_full(problem, config, rng);
    case BaselineKind::saga: return saga_solve(problem, config, rng);
  }
  throw ConfigError("unknown baseline");
}

BaselineResult reference_solve(const Problem& problem, double tol, std::size_t max_iter) {
  BaselineConfig cfg;
  cfg.algorithm = BaselineKind::fista;
  cfg.tol = tol;
  cfg.epochs = max_iter;
  return fista_solve(problem, cfg);
}

}  // namespace subnewton
