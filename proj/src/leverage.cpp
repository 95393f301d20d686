#include "subnewton/leverage.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "subnewton/error.hpp"

namespace subnewton {

CurvatureDiag curvature_from_margins(const SparseDataset& data, LossKind loss,
                                     std::span<const double> u) {
  CurvatureDiag out;
  out.dvals.resize(data.n());
  const double inv_n = 1.0 / static_cast<double>(data.n());
  for (std::size_t i = 0; i < data.n(); ++i)
    out.dvals[i] = loss_point(loss, u[i], data.label(i)).curvature * inv_n;
  return out;
}

CurvatureDiag curvature(const SparseDataset& data, LossKind loss, std::span<const double> w) {
  data.require_nonempty();
  const std::vector<double> u = margins(data, w);
  return curvature_from_margins(data, loss, u);
}

namespace {

// Above this condition number of R the Z R^{-1} route loses digits in the scores.
constexpr double kFastQrConditionLimit = 1e6;

void require_positive_curvature(const CurvatureDiag& curv) {
  const bool any = std::any_of(curv.dvals.begin(), curv.dvals.end(), [](double v) { return v > 0.0; });
  if (!any) throw NumericError("Hessian numerically zero");
}

}  // namespace

std::vector<double> leverage_scores(const SparseDataset& data, const CurvatureDiag& curv) {
  if (curv.dvals.size() != data.n()) throw ConfigError("curvature length does not match dataset");
  require_positive_curvature(curv);
  const auto n = static_cast<Eigen::Index>(data.n());
  const auto d = static_cast<Eigen::Index>(data.d());

  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n, d);
  for (std::size_t i = 0; i < data.n(); ++i) {
    const double s = std::sqrt(std::max(curv.dvals[i], 0.0));
    if (s == 0.0) continue;
    const RowView r = data.row(i);
    for (std::size_t k = 0; k < r.nnz(); ++k) z(static_cast<Eigen::Index>(i), r.idx[k]) = s * r.val[k];
  }

  std::vector<double> scores(data.n());
  // Blocked unpivoted QR and U = Z R^{-1} when R is well conditioned; the
  // pivoted factorization handles rank deficiency and everything else.
  if (n >= d) {
    Eigen::HouseholderQR<Eigen::MatrixXd> fast(z);
    const Eigen::MatrixXd R = fast.matrixQR().topRows(d).triangularView<Eigen::Upper>();
    const Eigen::VectorXd sv = Eigen::BDCSVD<Eigen::MatrixXd>(R).singularValues();
    if (sv(d - 1) > 0.0 && sv(0) <= kFastQrConditionLimit * sv(d - 1)) {
      R.triangularView<Eigen::Upper>().solveInPlace<Eigen::OnTheRight>(z);
      for (Eigen::Index i = 0; i < n; ++i)
        scores[static_cast<std::size_t>(i)] = curv.dvals[static_cast<std::size_t>(i)] > 0.0 ? z.row(i).squaredNorm() : 0.0;
      return scores;
    }
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(z);
  const Eigen::Index rank = qr.rank();
  if (rank == 0) throw NumericError("Hessian numerically zero");
  Eigen::MatrixXd basis = Eigen::MatrixXd::Identity(n, rank);
  basis.applyOnTheLeft(qr.householderQ().setLength(qr.nonzeroPivots()));

  for (Eigen::Index i = 0; i < n; ++i)
    scores[static_cast<std::size_t>(i)] = curv.dvals[static_cast<std::size_t>(i)] > 0.0 ? basis.row(i).squaredNorm() : 0.0;
  return scores;
}

std::vector<double> row_norm_scores(const SparseDataset& data, const CurvatureDiag& curv) {
  require_positive_curvature(curv);
  std::vector<double> scores(data.n());
  double total = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    scores[i] = std::max(curv.dvals[i], 0.0) * data.row_squared_norm(i);
    total += scores[i];
  }
  if (!(total > 0.0)) throw NumericError("Hessian numerically zero");
  const double target = static_cast<double>(std::min(data.n(), data.d()));
  for (double& s : scores) s *= target / total;
  return scores;
}

LeverageMethod parse_leverage_method(std::string_view name) {
  if (name == "exact") return LeverageMethod::exact;
  if (name == "row-norm" || name == "row_norm") return LeverageMethod::row_norm;
  if (name == "auto" || name == "automatic") return LeverageMethod::automatic;
  throw ConfigError("unknown leverage method '" + std::string(name) + "'");
}

std::vector<double> sampling_scores(const SparseDataset& data, const CurvatureDiag& curv,
                                    LeverageMethod method) {
  if (method == LeverageMethod::automatic) {
    const double cost = static_cast<double>(data.n()) * static_cast<double>(data.d()) *
                        static_cast<double>(data.d());
    method = cost > kExactLeverageBudget ? LeverageMethod::row_norm : LeverageMethod::exact;
  }
  return method == LeverageMethod::exact ? leverage_scores(data, curv) : row_norm_scores(data, curv);
}

SamplingPlan sampling_plan(std::span<const double> scores, double beta, double nu, double c_b,
                           std::size_t d, std::size_t n, bool allow_oversample) {
  if (!(beta > 0.0 && beta <= 1.0 / 3.0)) throw ConfigError("beta must lie in (0, 1/3]");
  if (!(nu >= 0.0 && nu < 1.0)) throw ConfigError("mixing nu must lie in [0, 1)");
  if (!(c_b > 0.0)) throw ConfigError("oversampling constant must be > 0");
  if (scores.size() != n || n == 0) throw ConfigError("score vector length must equal n >= 1");

  SamplingPlan plan;
  plan.nu = nu;
  plan.eps_sketch = beta / (1.0 - beta);
  const double dd = static_cast<double>(d);
  const double wanted = std::ceil(c_b * dd * std::log(dd + 1.0) / (plan.eps_sketch * plan.eps_sketch));
  const double cap = allow_oversample ? wanted : std::min(static_cast<double>(n), wanted);
  if (!(cap >= 1.0)) throw ConfigError("sample size would be zero");
  plan.b = static_cast<std::size_t>(cap);

  plan.scores.assign(scores.begin(), scores.end());
  const double total = std::accumulate(scores.begin(), scores.end(), 0.0);
  if (!(total > 0.0) && nu == 0.0) throw NumericError("all leverage scores are zero");
  plan.probs.resize(n);
  const double uniform = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    plan.probs[i] = (total > 0.0 ? (1.0 - nu) * scores[i] / total : 0.0) + nu * uniform;
  return plan;
}

SubsampledQuadratic make_quadratic(const SparseDataset& data, std::vector<Slot> slots,
                                   std::vector<double> g, double gamma,
                                   std::span<const double> anchor) {
  if (g.size() != data.d() || anchor.size() != data.d())
    throw ConfigError("quadratic model dimension mismatch");
  for (const Slot& s : slots) {
    if (s.row >= data.n()) throw ConfigError("slot row out of range");
    if (!(s.weight >= 0.0)) throw ConfigError("slot weight must be >= 0");
  }
  SubsampledQuadratic q;
  q.data = &data;
  q.g = std::move(g);
  q.draws = slots.size();
  q.slots = std::make_shared<const std::vector<Slot>>(std::move(slots));
  q.gamma = gamma;
  q.anchor.assign(anchor.begin(), anchor.end());
  return q;
}

SubsampledQuadratic draw_subsample(const SparseDataset& data, const SamplingPlan& plan,
                                   const CurvatureDiag& curv, std::vector<double> g, double gamma,
                                   std::span<const double> anchor, Rng& rng) {
  if (plan.probs.size() != data.n() || curv.dvals.size() != data.n())
    throw ConfigError("sampling plan does not match dataset");
  if (plan.b == 0) throw ConfigError("sample size would be zero");
  std::discrete_distribution<std::size_t> pick(plan.probs.begin(), plan.probs.end());
  const double b = static_cast<double>(plan.b);
  std::map<std::size_t, double> merged;
  for (std::size_t k = 0; k < plan.b; ++k) {
    const std::size_t i = pick(rng);
    merged[i] += curv.dvals[i] / (b * plan.probs[i]);
  }
  std::vector<Slot> slots;
  slots.reserve(merged.size());
  for (const auto& [row, weight] : merged) slots.push_back({row, weight});
  SubsampledQuadratic q = make_quadratic(data, std::move(slots), std::move(g), gamma, anchor);
  q.draws = plan.b;
  return q;
}

SubsampledQuadratic exact_quadratic(const SparseDataset& data, const CurvatureDiag& curv,
                                    std::vector<double> g, double gamma,
                                    std::span<const double> anchor) {
  std::vector<Slot> slots;
  slots.reserve(data.n());
  for (std::size_t i = 0; i < data.n(); ++i) slots.push_back({i, curv.dvals[i]});
  return make_quadratic(data, std::move(slots), std::move(g), gamma, anchor);
}

}  // namespace subnewton
