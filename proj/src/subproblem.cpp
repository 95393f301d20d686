#include "subnewton/subproblem.hpp"

#include <cmath>

#include "subnewton/error.hpp"

namespace subnewton {

void quad_matvec_into(const SubsampledQuadratic& q, std::span<const double> v, std::span<double> out) {
  if (v.size() != q.dim() || out.size() != q.dim()) throw ConfigError("quad_matvec dimension mismatch");
  for (std::size_t j = 0; j < v.size(); ++j) out[j] = q.gamma * v[j];
  const SparseDataset& data = *q.data;
  for (const Slot& s : *q.slots) {
    if (s.weight == 0.0) continue;
    const RowView r = data.row(s.row);
    const double coef = s.weight * kernels::sparse_dot(r.idx, r.val, v);
    kernels::sparse_axpy(coef, r.idx, r.val, out);
  }
}

std::vector<double> quad_matvec(const SubsampledQuadratic& q, std::span<const double> v) {
  std::vector<double> out(q.dim());
  quad_matvec_into(q, v, out);
  return out;
}

std::vector<double> model_gradient(const SubsampledQuadratic& q, std::span<const double> v) {
  std::vector<double> out = quad_matvec(q, v);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = q.g[j] + out[j];
  return out;
}

double subproblem_value(const SubsampledQuadratic& q, const Regularizer& reg,
                        std::span<const double> v) {
  const std::vector<double> bv = quad_matvec(q, v);
  std::vector<double> w(q.anchor);
  kernels::axpy(1.0, v, w);
  return kernels::dot(q.g, v) + 0.5 * kernels::dot(v, bv) + reg.value(w);
}

std::vector<double> component_gradient(const SubsampledQuadratic& q, std::size_t k,
                                       std::span<const double> v) {
  if (v.size() != q.dim()) throw ConfigError("component_gradient dimension mismatch");
  std::vector<double> out(q.g);
  kernels::axpy(q.gamma, v, out);
  if (q.size() == 0) return out;
  if (k >= q.size()) throw ConfigError("component slot out of range");
  const Slot& s = q.slot(k);
  const RowView r = q.data->row(s.row);
  const double coef = static_cast<double>(q.size()) * s.weight * kernels::sparse_dot(r.idx, r.val, v);
  kernels::sparse_axpy(coef, r.idx, r.val, out);
  return out;
}

double newton_decrement(const SubsampledQuadratic& q, std::span<const double> v) {
  const std::vector<double> bv = quad_matvec(q, v);
  const double rad = kernels::dot(v, bv);
  if (rad < -1e-12) throw NumericError("model curvature is negative; B_t is not positive semidefinite");
  return std::sqrt(std::max(rad, 0.0));
}

ResidualCertificate residual_certificate(const SubsampledQuadratic& q, const Regularizer& reg,
                                         std::span<const double> v_in, double alpha) {
  if (!(alpha > 0.0)) throw ConfigError("certificate step must be > 0");
  ResidualCertificate out;
  const std::vector<double> grad = model_gradient(q, v_in);
  out.v_post.assign(v_in.begin(), v_in.end());
  kernels::axpy(-alpha, grad, out.v_post);
  shifted_prox_inplace(reg, q.anchor, out.v_post, alpha);

  std::vector<double> diff(v_in.begin(), v_in.end());
  kernels::axpy(-1.0, out.v_post, diff);
  const std::vector<double> bdiff = quad_matvec(q, diff);
  out.r.resize(diff.size());
  for (std::size_t j = 0; j < diff.size(); ++j) out.r[j] = diff[j] / alpha - bdiff[j];
  return out;
}

DualNormResult dual_norm_estimate(const SubsampledQuadratic& q, std::span<const double> r,
                                  double tol, std::size_t max_iter) {
  if (!(q.gamma > 0.0)) throw ConfigError("dual norm requires a positive ridge");
  DualNormResult out;
  const double rr = kernels::squared_norm(r);
  if (rr == 0.0) return out;

  const std::size_t d = r.size();
  std::vector<double> z(d, 0.0);
  std::vector<double> res(r.begin(), r.end());
  std::vector<double> p(res);
  std::vector<double> bp(d);
  double res_sq = rr;
  const double stop = tol * tol * rr;
  bool converged = false;
  for (std::size_t it = 0; it < max_iter; ++it) {
    quad_matvec_into(q, p, bp);
    const double curv = kernels::dot(p, bp);
    out.iterations = it + 1;
    if (!(curv > 0.0)) break;
    const double step = res_sq / curv;
    kernels::axpy(step, p, z);
    kernels::axpy(-step, bp, res);
    const double next = kernels::squared_norm(res);
    if (next <= stop) {
      res_sq = next;
      converged = true;
      break;
    }
    const double ratio = next / res_sq;
    res_sq = next;
    for (std::size_t j = 0; j < d; ++j) p[j] = res[j] + ratio * p[j];
  }
  if (!converged) {
    out.value = std::sqrt(rr / q.gamma);
    out.fallback = true;
    return out;
  }
  const double rz = kernels::dot(r, z);
  out.value = std::sqrt(std::max(rz, 0.0) + res_sq / q.gamma);
  return out;
}

}  // namespace subnewton
