#pragma once
// Numerical sweep of the self-concordance inequalities on a scaled smooth part.
#include <cstddef>
#include <cstdint>

#include "subnewton/models.hpp"

namespace subnewton {

struct SelfConcordanceReport {
  double scale = 1.0;  // s in s * f, s = M^2 / 4 with M = max_i ||x_i|| / sqrt(gamma)
  std::size_t trials = 0;
  std::size_t hessian_violations = 0;
  std::size_t gradient_violations = 0;
  std::size_t value_violations = 0;
  double max_radius = 0.0;  // largest local-norm distance sampled
  std::size_t violations() const { return hessian_violations + gradient_violations + value_violations; }
};

// Draws `trials` pairs (x, x + delta) with local norm ||delta||_x in (0, radius]
// under s * f and counts violations of the Hessian, gradient and function-value
// bounds beyond `slack`. Dense Hessians: d must be at most 50; radius in (0, 1).
SelfConcordanceReport selfconcordance_check(const SparseDataset& data, LossKind loss, RidgeSplit ridge,
                                            std::size_t trials, double radius, std::uint64_t seed,
                                            double slack = 1e-8);

}  // namespace subnewton
