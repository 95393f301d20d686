#include "subnewton/models.hpp"

#include <cmath>

#include "subnewton/error.hpp"

namespace subnewton {

LossKind parse_loss(std::string_view name) {
  if (name == "logistic") return LossKind::logistic;
  if (name == "squared") return LossKind::squared;
  throw ConfigError("unknown loss '" + std::string(name) + "'");
}

std::string_view to_string(LossKind kind) {
  return kind == LossKind::logistic ? "logistic" : "squared";
}

LossPoint loss_point(LossKind loss, double u, double y) {
  if (loss == LossKind::squared) {
    const double r = u - y;
    return {0.5 * r * r, r, 1.0};
  }
  // z = y u; value log(1 + e^{-z}), derivative -y sigma(-z), curvature sigma(z) sigma(-z).
  const double z = y * u;
  const double e = std::exp(-std::fabs(z));
  const double value = z > 0.0 ? std::log1p(e) : -z + std::log1p(e);
  const double sig_neg = z >= 0.0 ? e / (1.0 + e) : 1.0 / (1.0 + e);
  const double curvature = e / ((1.0 + e) * (1.0 + e));
  return {value, -y * sig_neg, curvature};
}

double curvature_bound(LossKind loss) { return loss == LossKind::logistic ? 0.25 : 1.0; }

double Regularizer::value(std::span<const double> w) const {
  const double lam = threshold_weight();
  if (lam == 0.0) return 0.0;
  double s = 0.0;
  for (double v : w) s += std::fabs(v);
  return lam * s;
}

RidgeSplit smooth_ridge(RidgeSplit ridge, const Regularizer& reg) {
  if (reg.kind == RegKind::elastic_net) ridge.gamma += reg.l2;
  return ridge;
}

void Problem::validate() const {
  if (data == nullptr) throw ConfigError("problem has no dataset");
  data->require_nonempty();
  if (loss == LossKind::logistic) data->require_binary_labels();
  if (!(ridge.gamma > 0.0) && !(reg.kind == RegKind::elastic_net && reg.l2 > 0.0))
    throw ConfigError("ridge gamma must be > 0");
  if (reg.l1 < 0.0 || reg.l2 < 0.0) throw ConfigError("regularization weights must be >= 0");
}

double smooth_value(const SparseDataset& data, LossKind loss, double gamma,
                    std::span<const double> w, std::span<const double> u) {
  double s = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) s += loss_point(loss, u[i], data.label(i)).value;
  const double mean = data.n() == 0 ? 0.0 : s / static_cast<double>(data.n());
  return mean + 0.5 * gamma * kernels::squared_norm(w);
}

SmoothEval smooth_eval(const SparseDataset& data, LossKind loss, double gamma,
                       std::span<const double> w, std::span<const double> u) {
  const std::size_t n = data.n();
  SmoothEval out;
  out.gradient.assign(data.d(), 0.0);
  std::vector<double> coef(n);
  double s = 0.0;
  const double inv_n = n == 0 ? 0.0 : 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const LossPoint lp = loss_point(loss, u[i], data.label(i));
    s += lp.value;
    coef[i] = lp.first * inv_n;
  }
  accumulate_rows(data, coef, out.gradient);
  kernels::axpy(gamma, w, out.gradient);
  out.value = s * inv_n + 0.5 * gamma * kernels::squared_norm(w);
  return out;
}

double full_objective(const SparseDataset& data, LossKind loss, const Regularizer& reg,
                      RidgeSplit ridge, std::span<const double> w) {
  const std::vector<double> u = margins(data, w);
  return smooth_value(data, loss, smooth_ridge(ridge, reg).gamma, w, u) + reg.value(w);
}

double full_objective(const Problem& p, std::span<const double> w) {
  return full_objective(p.X(), p.loss, p.reg, p.ridge, w);
}

std::vector<double> full_gradient(const SparseDataset& data, LossKind loss, RidgeSplit ridge,
                                  std::span<const double> w) {
  const std::vector<double> u = margins(data, w);
  return smooth_eval(data, loss, ridge.gamma, w, u).gradient;
}

void prox_inplace(const Regularizer& reg, std::span<double> z, double alpha) {
  if (!(alpha > 0.0)) throw ConfigError("prox step must be > 0");
  const double thr = alpha * reg.threshold_weight();
  if (thr == 0.0) return;
  kernels::soft_threshold(z, thr, z);
}

std::vector<double> prox(const Regularizer& reg, std::span<const double> z, double alpha) {
  std::vector<double> out(z.begin(), z.end());
  prox_inplace(reg, out, alpha);
  return out;
}

void shifted_prox_inplace(const Regularizer& reg, std::span<const double> anchor, std::span<double> z,
                          double alpha) {
  if (!(alpha > 0.0)) throw ConfigError("prox step must be > 0");
  const double thr = alpha * reg.threshold_weight();
  if (thr == 0.0) return;
  kernels::shifted_soft_threshold(anchor, thr, z);
}

std::vector<double> shifted_prox(const Regularizer& reg, std::span<const double> anchor,
                                 std::span<const double> z, double alpha) {
  std::vector<double> out(z.begin(), z.end());
  shifted_prox_inplace(reg, anchor, out, alpha);
  return out;
}

}  // namespace subnewton
