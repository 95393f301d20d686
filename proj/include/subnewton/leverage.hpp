#pragma once

// Hessian curvature coefficients, leverage scores of D^{1/2} X, the sampling
// distribution, and the subsampled quadratic model
//
//   B_t = sum_{slots k} c_k x_k x_k^T + gamma I,   c_k = dvals_k / (b p_k)
//
// summed over the b draws (duplicates merged). B_t is never materialized.

#include <cstddef>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "subnewton/dataset.hpp"
#include "subnewton/models.hpp"
#include "subnewton/rng.hpp"

namespace subnewton {

// dvals_i = f_i''(u_i) / n, the diagonal D in grad^2 f(w) = X^T D X + gamma I.
struct CurvatureDiag {
  std::vector<double> dvals;
};

CurvatureDiag curvature(const SparseDataset& data, LossKind loss, std::span<const double> w);
CurvatureDiag curvature_from_margins(const SparseDataset& data, LossKind loss,
                                     std::span<const double> u);

// Exact scores: squared row norms of an orthonormal basis of range(D^{1/2} X),
// from a column-pivoted thin QR. Sum equals the numerical rank. Throws
// NumericError when every dvals entry is zero.
std::vector<double> leverage_scores(const SparseDataset& data, const CurvatureDiag& curv);

// Cheap surrogate dvals_i ||x_i||^2, rescaled to sum to min(n, d).
std::vector<double> row_norm_scores(const SparseDataset& data, const CurvatureDiag& curv);

enum class LeverageMethod { exact, row_norm, automatic };
LeverageMethod parse_leverage_method(std::string_view name);

// `automatic` switches to row norms when n d^2 exceeds this many flops.
inline constexpr double kExactLeverageBudget = 2e10;
std::vector<double> sampling_scores(const SparseDataset& data, const CurvatureDiag& curv,
                                    LeverageMethod method);

struct SamplingPlan {
  std::vector<double> scores;
  std::vector<double> probs;
  double nu = 0.0;
  std::size_t b = 0;
  double eps_sketch = 0.0;
};

// eps_sketch = beta / (1 - beta); b = ceil(c_b d ln(d+1) / eps_sketch^2),
// capped at n unless `allow_oversample`; p_i = (1 - nu) l_i / sum(l) + nu / n.
// Requires beta in (0, 1/3] and nu in [0, 1).
SamplingPlan sampling_plan(std::span<const double> scores, double beta, double nu, double c_b,
                           std::size_t d, std::size_t n, bool allow_oversample = false);

struct Slot {
  std::size_t row;
  double weight;  // c_k >= 0
};

// The quadratic model at anchor w_t: gradient, sampled rank-one terms, ridge.
struct SubsampledQuadratic {
  const SparseDataset* data = nullptr;
  std::vector<double> g;       // exact full gradient at the anchor
  std::shared_ptr<const std::vector<Slot>> slots;
  double gamma = 0.0;          // never subsampled
  std::vector<double> anchor;  // w_t
  std::size_t draws = 0;       // multinomial draws before merging

  std::size_t dim() const { return g.size(); }
  std::size_t size() const { return slots ? slots->size() : 0; }
  const Slot& slot(std::size_t k) const { return (*slots)[k]; }
};

// b i.i.d. draws from `plan.probs`, merged by row, weights dvals_i / (b p_i).
SubsampledQuadratic draw_subsample(const SparseDataset& data, const SamplingPlan& plan,
                                   const CurvatureDiag& curv, std::vector<double> g, double gamma,
                                   std::span<const double> anchor, Rng& rng);

// Every row with weight dvals_i: B_t equals the exact Hessian.
SubsampledQuadratic exact_quadratic(const SparseDataset& data, const CurvatureDiag& curv,
                                    std::vector<double> g, double gamma,
                                    std::span<const double> anchor);

// Model with explicit slots (tests and synthetic models).
SubsampledQuadratic make_quadratic(const SparseDataset& data, std::vector<Slot> slots,
                                   std::vector<double> g, double gamma,
                                   std::span<const double> anchor);

}  // namespace subnewton
