#pragma once

// Scalar losses, the nonsmooth regularizer with its proximal map, and the
// mean-normalized objective
//
//   F(w) = (1/n) sum_i f_i(x_i^T w) + (gamma/2) ||w||^2 + R(w).
//
// The ridge gamma belongs to the smooth part so that f is strongly convex
// with modulus at least gamma; an elastic-net l2 weight is folded into it.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "subnewton/dataset.hpp"

namespace subnewton {

enum class LossKind { logistic, squared };

LossKind parse_loss(std::string_view name);
std::string_view to_string(LossKind kind);

struct LossPoint {
  double value;
  double first;
  double curvature;
};

// (f_i(u), f_i'(u), f_i''(u)). Logistic: log(1 + exp(-y u)); squared: (u - y)^2 / 2.
LossPoint loss_point(LossKind loss, double u, double y);
// Global bound on f_i'': 1/4 for logistic, 1 for squared.
double curvature_bound(LossKind loss);

enum class RegKind { none, l1, elastic_net };

struct Regularizer {
  RegKind kind = RegKind::l1;
  double l1 = 0.0;  // weight on ||w||_1
  double l2 = 0.0;  // elastic-net quadratic weight, routed into the ridge

  static Regularizer none() { return {RegKind::none, 0.0, 0.0}; }
  static Regularizer lasso(double l1) { return {RegKind::l1, l1, 0.0}; }
  static Regularizer elastic(double l1, double l2) { return {RegKind::elastic_net, l1, l2}; }

  double threshold_weight() const { return kind == RegKind::none ? 0.0 : l1; }
  // R(w); the elastic-net l2 term is excluded because it lives in the ridge.
  double value(std::span<const double> w) const;
};

// Strong-convexity ridge counted in the smooth part. Must be > 0 for the
// solvers; 0 is accepted only by evaluation helpers.
struct RidgeSplit {
  double gamma = 1e-3;
};

// gamma plus the elastic-net l2 weight.
RidgeSplit smooth_ridge(RidgeSplit ridge, const Regularizer& reg);

// Bundle passed to every solver.
struct Problem {
  const SparseDataset* data = nullptr;
  LossKind loss = LossKind::logistic;
  Regularizer reg;
  RidgeSplit ridge;

  const SparseDataset& X() const { return *data; }
  double gamma() const { return smooth_ridge(ridge, reg).gamma; }
  void validate() const;
};

double full_objective(const SparseDataset& data, LossKind loss, const Regularizer& reg,
                      RidgeSplit ridge, std::span<const double> w);
double full_objective(const Problem& p, std::span<const double> w);

// (1/n) sum_i f_i'(u_i) x_i + gamma w
std::vector<double> full_gradient(const SparseDataset& data, LossKind loss, RidgeSplit ridge,
                                  std::span<const double> w);

// Value and gradient of the smooth part from precomputed margins u = Xw.
struct SmoothEval {
  double value = 0.0;  // (1/n) sum f_i + (gamma/2)||w||^2
  std::vector<double> gradient;
};
SmoothEval smooth_eval(const SparseDataset& data, LossKind loss, double gamma,
                       std::span<const double> w, std::span<const double> u);
double smooth_value(const SparseDataset& data, LossKind loss, double gamma,
                    std::span<const double> w, std::span<const double> u);

// prox_{alpha R}(z)
std::vector<double> prox(const Regularizer& reg, std::span<const double> z, double alpha);
void prox_inplace(const Regularizer& reg, std::span<double> z, double alpha);
// argmin_u R(anchor + u) + ||u - z||^2 / (2 alpha) = prox(anchor + z) - anchor
std::vector<double> shifted_prox(const Regularizer& reg, std::span<const double> anchor,
                                 std::span<const double> z, double alpha);
void shifted_prox_inplace(const Regularizer& reg, std::span<const double> anchor, std::span<double> z,
                          double alpha);

}  // namespace subnewton
