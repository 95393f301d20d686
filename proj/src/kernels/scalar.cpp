#include "subnewton/kernels.hpp"

#include <cmath>

namespace subnewton::kernels {
namespace {

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) s += x[j] * y[j];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) y[j] += a * x[j];
}

double sparse_dot(const Index* idx, const double* val, std::size_t nnz, const double* w) {
  double s = 0.0;
  for (std::size_t k = 0; k < nnz; ++k) s += val[k] * w[idx[k]];
  return s;
}

void sparse_axpy(double a, const Index* idx, const double* val, std::size_t nnz, double* y) {
  for (std::size_t k = 0; k < nnz; ++k) y[idx[k]] += a * val[k];
}

inline double soft(double z, double thr) {
  const double m = std::fabs(z) - thr;
  if (m <= 0.0) return 0.0;
  return std::copysign(m, z);
}

void soft_threshold(const double* z, double thr, double* out, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) out[j] = soft(z[j], thr);
}

void shifted_soft_threshold(const double* anchor, double thr, double* v, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) v[j] = soft(anchor[j] + v[j], thr) - anchor[j];
}

void vr_dense_step(double* v, const double* snap, const double* grad, double eta, double ridge,
                   std::size_t n) {
  if (snap == nullptr) {
    for (std::size_t j = 0; j < n; ++j) v[j] = v[j] - eta * (grad[j] + ridge * v[j]);
    return;
  }
  for (std::size_t j = 0; j < n; ++j) v[j] = v[j] - eta * (grad[j] + ridge * (v[j] - snap[j]));
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{"scalar", dot, axpy, sparse_dot, sparse_axpy, soft_threshold,
                                 shifted_soft_threshold, vr_dense_step};
  return table;
}

}  // namespace subnewton::kernels
