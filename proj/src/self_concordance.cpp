#include "subnewton/self_concordance.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "subnewton/error.hpp"
#include "subnewton/prox_newton.hpp"
#include "subnewton/rng.hpp"

namespace subnewton {

namespace {

constexpr std::size_t kMaxDenseDim = 50;

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

Mat dense(const SparseDataset& data) {
  Mat X = Mat::Zero(static_cast<Eigen::Index>(data.n()), static_cast<Eigen::Index>(data.d()));
  for (std::size_t i = 0; i < data.n(); ++i) {
    const RowView r = data.row(i);
    for (std::size_t k = 0; k < r.nnz(); ++k) X(static_cast<Eigen::Index>(i), r.idx[k]) = r.val[k];
  }
  return X;
}

bool exceeds(double lhs, double rhs, double slack) {
  return lhs > rhs + slack * std::max(1.0, std::fabs(rhs));
}

}  // namespace

SelfConcordanceReport selfconcordance_check(const SparseDataset& data, LossKind loss, RidgeSplit ridge,
                                            std::size_t trials, double radius, std::uint64_t seed,
                                            double slack) {
  if (!(radius > 0.0 && radius < 1.0)) throw ConfigError("radius must lie in (0, 1)");
  if (!(ridge.gamma > 0.0)) throw ConfigError("self-concordance check needs gamma > 0");
  if (data.d() > kMaxDenseDim) throw ConfigError("self-concordance check uses dense Hessians; d must be <= 50");
  data.require_nonempty();

  const Mat X = dense(data);
  const auto n = X.rows();
  const auto d = X.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  const double gamma = ridge.gamma;

  SelfConcordanceReport report;
  const double m = std::sqrt(data.max_row_squared_norm() / gamma);
  report.scale = m * m / 4.0;
  const double s = report.scale;

  Rng rng = make_stream(seed, 0x5c);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (std::size_t trial = 0; trial < trials; ++trial) {
    Vec x(d);
    for (auto j = 0; j < d; ++j) x(j) = normal(rng) * 2.0 / std::sqrt(static_cast<double>(d));
    const Vec u = X * x;
    Vec first(n), second(n);
    for (auto i = 0; i < n; ++i) {
      const LossPoint p = loss_point(loss, u(i), data.label(static_cast<std::size_t>(i)));
      first(i) = p.first;
      second(i) = p.curvature;
    }
    const Mat Hx = s * (inv_n * X.transpose() * second.asDiagonal() * X + gamma * Mat::Identity(d, d));
    const Eigen::LLT<Mat> chol(Hx);

    Vec z(d);
    for (auto j = 0; j < d; ++j) z(j) = normal(rng);
    const double znorm = std::sqrt(z.dot(Hx * z));
    const double r = radius * (1.0 - unit(rng));  // in (0, radius]
    const Vec delta = z * (r / znorm);
    report.max_radius = std::max(report.max_radius, r);

    const Vec dm = X * delta;
    Vec second_y(n), grad_resid_coef(n);
    double bregman = 0.0;
    for (auto i = 0; i < n; ++i) {
      const double y = data.label(static_cast<std::size_t>(i));
      const LossPoint q = loss_point(loss, u(i) + dm(i), y);
      const LossPoint p = loss_point(loss, u(i), y);
      second_y(i) = q.curvature;
      grad_resid_coef(i) = (q.first - first(i)) - second(i) * dm(i);
      bregman += (q.value - p.value) - p.first * dm(i);
    }
    bregman = s * (inv_n * bregman + 0.5 * gamma * delta.squaredNorm());

    // Hessian bound via generalized eigenvalues of H(y) against H(x).
    const Mat Hy = s * (inv_n * X.transpose() * second_y.asDiagonal() * X + gamma * Mat::Identity(d, d));
    const Mat L = chol.matrixL();
    const Mat Linv = L.triangularView<Eigen::Lower>().solve(Mat::Identity(d, d));
    const Mat C = Linv * Hy * Linv.transpose();
    const Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (C + C.transpose()), Eigen::EigenvaluesOnly);
    const double lo = (1.0 - r) * (1.0 - r);
    if (exceeds(lo, eig.eigenvalues().minCoeff(), slack) || exceeds(eig.eigenvalues().maxCoeff(), 1.0 / lo, slack))
      ++report.hessian_violations;

    const Vec e = s * inv_n * (X.transpose() * grad_resid_coef);
    const double dual = std::sqrt(std::max(e.dot(chol.solve(e)), 0.0));
    if (exceeds(dual, r * r / (1.0 - r), slack)) ++report.gradient_violations;

    if (exceeds(zeta(r), bregman, slack) || exceeds(bregman, zeta_star(r), slack)) ++report.value_violations;
    ++report.trials;
  }
  return report;
}

}  // namespace subnewton
