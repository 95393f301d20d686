#include "subnewton/inner.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

#include "subnewton/error.hpp"

namespace subnewton {

namespace {

constexpr double kAutoStepScale = 0.25;
constexpr std::size_t kPowerIterations = 30;
constexpr double kPowerTolerance = 1e-3;

std::uint64_t rows(const SubsampledQuadratic& q) { return static_cast<std::uint64_t>(q.size()); }

}  // namespace

void InnerConfig::validate() const {
  if (epochs == 0) throw ConfigError("inner epochs must be >= 1");
  if (step < 0.0) throw ConfigError("inner step must be > 0 (or 0 for auto)");
  if (catalyst_stage_epochs == 0) throw ConfigError("catalyst stage epochs must be >= 1");
  if (mode == InnerMode::certificate && !(target > 0.0 || relative_target > 0.0 || quadratic_target > 0.0))
    throw ConfigError("certificate mode needs a positive target");
  if (!(failure_budget > 0.0 && failure_budget < 1.0))
    throw ConfigError("failure budget must lie in (0, 1)");
}

double component_lipschitz(const SubsampledQuadratic& q) {
  double top = 0.0;
  const double k = static_cast<double>(q.size());
  for (const Slot& s : *q.slots) top = std::max(top, k * s.weight * q.data->row_squared_norm(s.row));
  return top + q.gamma;
}

LipschitzEstimate estimate_lipschitz(const SubsampledQuadratic& q, std::uint64_t seed,
                                     WorkCounters* work) {
  LipschitzEstimate est;
  est.floor = q.gamma;
  est.component = component_lipschitz(q);
  const std::size_t d = q.dim();
  if (d == 0) return est;

  Rng rng = make_stream(seed, 0x9e3);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(d);
  for (double& x : v) x = normal(rng);
  double norm = std::sqrt(kernels::squared_norm(v));
  for (double& x : v) x /= norm;

  std::vector<double> bv(d);
  double prev = 0.0;
  for (std::size_t it = 0; it < kPowerIterations; ++it) {
    quad_matvec_into(q, v, bv);
    if (work) work->hessian_rows += rows(q);
    est.iterations = it + 1;
    const double rayleigh = kernels::dot(v, bv);
    est.top = std::max(est.top, rayleigh);
    norm = std::sqrt(kernels::squared_norm(bv));
    if (!(norm > 0.0)) break;
    for (std::size_t j = 0; j < d; ++j) v[j] = bv[j] / norm;
    if (it > 0 && std::fabs(rayleigh - prev) < kPowerTolerance * rayleigh) break;
    prev = rayleigh;
  }
  est.top = std::max(est.top, q.gamma);
  return est;
}

namespace {

// One SVRG epoch at a time on a fixed model.
class SvrgEngine {
 public:
  SvrgEngine(const SubsampledQuadratic& q, const Regularizer& reg, double step, std::size_t length)
      : q_(q), reg_(reg), step_(step), length_(length), snap_(q.dim()), grad_(q.dim()),
        snap_margins_(q.size()) {}

  void epoch(std::vector<double>& v, Rng& rng, WorkCounters& work) {
    const SparseDataset& data = *q_.data;
    const std::size_t slots = q_.size();
    snap_ = v;
    quad_matvec_into(q_, snap_, grad_);
    for (std::size_t j = 0; j < grad_.size(); ++j) grad_[j] = q_.g[j] + grad_[j];
    for (std::size_t k = 0; k < slots; ++k) {
      const RowView r = data.row(q_.slot(k).row);
      snap_margins_[k] = kernels::sparse_dot(r.idx, r.val, snap_);
    }
    work.component_grads += slots;

    const double scale = static_cast<double>(slots);
    std::uniform_int_distribution<std::size_t> pick(0, slots == 0 ? 0 : slots - 1);
    for (std::size_t t = 0; t < length_; ++t) {
      double coef = 0.0;
      RowView r{};
      if (slots > 0) {
        const std::size_t k = pick(rng);
        r = data.row(q_.slot(k).row);
        const double u = kernels::sparse_dot(r.idx, r.val, v);
        coef = scale * q_.slot(k).weight * (u - snap_margins_[k]);
      }
      kernels::vr_dense_step(v, snap_, grad_, step_, q_.gamma);
      if (slots > 0) kernels::sparse_axpy(-step_ * coef, r.idx, r.val, v);
      shifted_prox_inplace(reg_, q_.anchor, v, step_);
      ++work.component_grads;
    }
  }

 private:
  const SubsampledQuadratic& q_;
  const Regularizer& reg_;
  double step_;
  std::size_t length_;
  std::vector<double> snap_;
  std::vector<double> grad_;
  std::vector<double> snap_margins_;
};

struct CertificateCheck {
  bool ok = false;
  std::vector<double> v_post;
  double dual = 0.0;
  double decrement = 0.0;
  double target = 0.0;
};

class Certifier {
 public:
  Certifier(const SubsampledQuadratic& q, const Regularizer& reg, const InnerConfig& cfg,
            const LipschitzEstimate& lip)
      : q_(q), reg_(reg), cfg_(cfg),
        alpha_(cfg.certificate_step > 0.0 ? cfg.certificate_step : 1.0 / lip.top) {}

  CertificateCheck check(std::span<const double> v, WorkCounters& work) const {
    CertificateCheck out;
    ResidualCertificate cert = residual_certificate(q_, reg_, v, alpha_);
    work.hessian_rows += 2 * rows(q_);
    const DualNormResult dual = dual_norm_estimate(q_, cert.r, cfg_.cg_tol, cfg_.cg_max_iter);
    work.hessian_rows += dual.iterations * rows(q_);
    out.decrement = newton_decrement(q_, cert.v_post);
    work.hessian_rows += rows(q_);
    out.dual = dual.value;
    out.target = cfg_.target + cfg_.relative_target * out.decrement +
                 cfg_.quadratic_target * out.decrement * out.decrement;
    out.ok = out.dual <= out.target;
    out.v_post = std::move(cert.v_post);
    return out;
  }

 private:
  const SubsampledQuadratic& q_;
  const Regularizer& reg_;
  const InnerConfig& cfg_;
  double alpha_;
};

void record(InnerReport& report, CertificateCheck&& c) {
  report.certified = c.ok;
  report.dual_norm = c.dual;
  report.decrement = c.decrement;
  report.target = c.target;
  report.v_out = std::move(c.v_post);
}

std::size_t total_budget(const InnerConfig& cfg) {
  std::size_t total = 0;
  std::size_t budget = cfg.epochs;
  for (std::size_t a = 0; a <= cfg.retries; ++a, budget *= 2) total += budget;
  return total;
}

}  // namespace

InnerReport prox_svrg(const SubsampledQuadratic& q, const Regularizer& reg,
                      std::span<const double> v0, const InnerConfig& config, Rng& rng) {
  config.validate();
  if (v0.size() != q.dim()) throw ConfigError("inner initial point dimension mismatch");
  InnerReport report;
  report.lipschitz.floor = q.gamma;
  report.lipschitz.component = component_lipschitz(q);
  report.step = config.step > 0.0 ? config.step : kAutoStepScale / report.lipschitz.component;
  const std::size_t length = config.epoch_length > 0 ? config.epoch_length : std::max<std::size_t>(q.size(), 1);
  SvrgEngine engine(q, reg, report.step, length);
  std::vector<double> v(v0.begin(), v0.end());

  if (config.mode == InnerMode::fixed_epochs) {
    for (std::size_t e = 0; e < config.epochs; ++e) {
      engine.epoch(v, rng, report.work);
      ++report.epochs;
      if (config.stop_when && config.stop_when(v)) break;
    }
    report.v_out = std::move(v);
    return report;
  }

  report.lipschitz = estimate_lipschitz(q, 0x1f, &report.work);
  const Certifier certifier(q, reg, config, report.lipschitz);
  CertificateCheck c = certifier.check(v, report.work);
  std::size_t budget = config.epochs;
  for (std::size_t attempt = 0; attempt <= config.retries && !c.ok; ++attempt, budget *= 2) {
    for (std::size_t e = 0; e < budget && !c.ok; ++e) {
      engine.epoch(v, rng, report.work);
      ++report.epochs;
      c = certifier.check(v, report.work);
      if (config.stop_when && config.stop_when(v)) break;
    }
  }
  record(report, std::move(c));
  return report;
}

double catalyst_next_alpha(double alpha, double q) {
  // a^2 + alpha^2 a - (alpha^2 + q alpha) = 0
  const double a2 = alpha * alpha;
  const double c = a2 + q * alpha;
  return 0.5 * (-a2 + std::sqrt(a2 * a2 + 4.0 * c));
}

InnerReport catalyst_solve(const SubsampledQuadratic& q, const Regularizer& reg,
                           std::span<const double> v0, const InnerConfig& config, Rng& rng) {
  config.validate();
  if (v0.size() != q.dim()) throw ConfigError("inner initial point dimension mismatch");
  const double mu = q.gamma;
  const double comp = component_lipschitz(q);
  const double slots = static_cast<double>(std::max<std::size_t>(q.size(), 1));
  const double zeta = config.catalyst_zeta >= 0.0 ? config.catalyst_zeta : std::max(comp / slots - mu, 0.0);
  if (zeta == 0.0) {
    InnerReport plain = prox_svrg(q, reg, v0, config, rng);
    plain.zeta = 0.0;
    return plain;
  }

  InnerReport report;
  report.zeta = zeta;
  report.lipschitz.floor = mu;
  report.lipschitz.component = comp;

  std::optional<Certifier> certifier;
  CertificateCheck c;
  std::vector<double> x(v0.begin(), v0.end());
  if (config.mode == InnerMode::certificate) {
    report.lipschitz = estimate_lipschitz(q, 0x1f, &report.work);
    certifier.emplace(q, reg, config, report.lipschitz);
    c = certifier->check(x, report.work);
    if (c.ok) {
      record(report, std::move(c));
      return report;
    }
  }

  SubsampledQuadratic stage = q;
  stage.gamma = mu + zeta;
  InnerConfig stage_cfg;
  stage_cfg.mode = InnerMode::fixed_epochs;
  stage_cfg.epochs = config.catalyst_stage_epochs;
  stage_cfg.epoch_length = config.epoch_length;
  stage_cfg.step = config.step;
  report.step = config.step > 0.0 ? config.step : kAutoStepScale / (comp + zeta);

  const double ratio = mu / (mu + zeta);
  double alpha = std::sqrt(ratio);
  std::vector<double> y = x;
  const std::size_t cap = config.mode == InnerMode::fixed_epochs ? config.epochs : total_budget(config);

  std::vector<double> y_prev = y;
  std::vector<double> start(x.size());
  const double shift = zeta / (mu + zeta);
  while (report.epochs < cap) {
    for (std::size_t j = 0; j < stage.g.size(); ++j) stage.g[j] = q.g[j] - zeta * y[j];
    // Warm start: follow the move of the prox center.
    for (std::size_t j = 0; j < x.size(); ++j) start[j] = x[j] + shift * (y[j] - y_prev[j]);
    InnerReport inner = prox_svrg(stage, reg, start, stage_cfg, rng);
    report.work += inner.work;
    report.epochs += inner.epochs;
    ++report.stages;

    const double next = catalyst_next_alpha(alpha, ratio);
    const double beta = alpha * (1.0 - alpha) / (alpha * alpha + next);
    y_prev = y;
    for (std::size_t j = 0; j < y.size(); ++j)
      y[j] = inner.v_out[j] + beta * (inner.v_out[j] - x[j]);
    x = std::move(inner.v_out);
    alpha = next;

    if (certifier) {
      c = certifier->check(x, report.work);
      if (c.ok) break;
    }
    if (config.stop_when && config.stop_when(x)) break;
  }

  if (certifier) {
    record(report, std::move(c));
  } else {
    report.v_out = std::move(x);
  }
  return report;
}

InnerReport inner_solve(const SubsampledQuadratic& q, const Regularizer& reg,
                        std::span<const double> v0, const InnerConfig& config, Rng& rng) {
  return config.catalyst ? catalyst_solve(q, reg, v0, config, rng) : prox_svrg(q, reg, v0, config, rng);
}

}  // namespace subnewton
