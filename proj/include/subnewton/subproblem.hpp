#pragma once

// Operations on the quadratic model
//
//   f_sub(v) = g^T v + (1/2) v^T B_t v + R(w_t + v)
//
// in the step variable v = w - w_t, and on its finite-sum split into one
// component per slot.

#include <cstddef>
#include <span>
#include <vector>

#include "subnewton/leverage.hpp"
#include "subnewton/models.hpp"

namespace subnewton {

// B_t v in O(sum of sampled row nnz).
std::vector<double> quad_matvec(const SubsampledQuadratic& q, std::span<const double> v);
void quad_matvec_into(const SubsampledQuadratic& q, std::span<const double> v, std::span<double> out);

// g + B_t v
std::vector<double> model_gradient(const SubsampledQuadratic& q, std::span<const double> v);

double subproblem_value(const SubsampledQuadratic& q, const Regularizer& reg,
                        std::span<const double> v);

// Gradient of phi_k(v) = g^T v + (K c_k / 2)(x_k^T v)^2 + (gamma/2)||v||^2 with
// K = q.size(); the K-average of these equals g + B_t v.
std::vector<double> component_gradient(const SubsampledQuadratic& q, std::size_t k,
                                       std::span<const double> v);

// sqrt(v^T B_t v). Throws NumericError on a radicand below -1e-12.
double newton_decrement(const SubsampledQuadratic& q, std::span<const double> v);

struct ResidualCertificate {
  std::vector<double> v_post;  // one proximal-gradient step from v_in
  std::vector<double> r;       // r in g + B_t v_post + dR(w_t + v_post)
};

// v_post = shifted_prox(w_t, v_in - alpha (g + B_t v_in), alpha),
// r = (v_in - v_post) / alpha - B_t (v_in - v_post).
ResidualCertificate residual_certificate(const SubsampledQuadratic& q, const Regularizer& reg,
                                         std::span<const double> v_in, double alpha);

struct DualNormResult {
  double value = 0.0;
  std::size_t iterations = 0;
  bool fallback = false;  // CG stalled; value is ||r|| / sqrt(gamma)
};

// Upper estimate of ||r||*_{B_t} = sqrt(r^T B_t^{-1} r) by conjugate gradients
// on B_t z = r to relative residual `tol`. Returns sqrt(r^T z + ||res||^2 / gamma),
// which bounds the exact dual norm from above (exact arithmetic).
DualNormResult dual_norm_estimate(const SubsampledQuadratic& q, std::span<const double> r,
                                  double tol = 1e-2, std::size_t max_iter = 50);

// The accepted inexact step with its certificate.
struct Direction {
  std::vector<double> v;
  double decrement = 0.0;
  std::vector<double> r;
  double residual_dual_norm = 0.0;
};

}  // namespace subnewton
