// NEON variants for aarch64 (Advanced SIMD is mandatory there, so no runtime
// probe is needed).

#include <arm_neon.h>

#include <cmath>

#include "subnewton/kernels.hpp"

namespace subnewton::kernels {
namespace {

double dot(const double* x, const double* y, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    acc0 = vaddq_f64(acc0, vmulq_f64(vld1q_f64(x + j), vld1q_f64(y + j)));
    acc1 = vaddq_f64(acc1, vmulq_f64(vld1q_f64(x + j + 2), vld1q_f64(y + j + 2)));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; j < n; ++j) s += x[j] * y[j];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) vst1q_f64(y + j, vaddq_f64(vld1q_f64(y + j), vmulq_f64(va, vld1q_f64(x + j))));
  for (; j < n; ++j) y[j] += a * x[j];
}

double sparse_dot(const Index* idx, const double* val, std::size_t nnz, const double* w) {
  double s0 = 0.0, s1 = 0.0;
  std::size_t k = 0;
  for (; k + 2 <= nnz; k += 2) {
    s0 += val[k] * w[idx[k]];
    s1 += val[k + 1] * w[idx[k + 1]];
  }
  double s = s0 + s1;
  for (; k < nnz; ++k) s += val[k] * w[idx[k]];
  return s;
}

void sparse_axpy(double a, const Index* idx, const double* val, std::size_t nnz, double* y) {
  for (std::size_t k = 0; k < nnz; ++k) y[idx[k]] += a * val[k];
}

inline double soft1(double z, double thr) {
  const double m = std::fabs(z) - thr;
  if (m <= 0.0) return 0.0;
  return std::copysign(m, z);
}

inline float64x2_t soft2(float64x2_t z, float64x2_t thr) {
  const float64x2_t mag = vsubq_f64(vabsq_f64(z), thr);
  const uint64x2_t positive = vcgtq_f64(mag, vdupq_n_f64(0.0));
  const uint64x2_t sign = vandq_u64(vreinterpretq_u64_f64(z), vdupq_n_u64(0x8000000000000000ULL));
  const uint64x2_t kept = vandq_u64(vreinterpretq_u64_f64(mag), positive);
  return vreinterpretq_f64_u64(vorrq_u64(kept, vandq_u64(sign, positive)));
}

void soft_threshold(const double* z, double thr, double* out, std::size_t n) {
  const float64x2_t vt = vdupq_n_f64(thr);
  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) vst1q_f64(out + j, soft2(vld1q_f64(z + j), vt));
  for (; j < n; ++j) out[j] = soft1(z[j], thr);
}

void shifted_soft_threshold(const double* anchor, double thr, double* v, std::size_t n) {
  const float64x2_t vt = vdupq_n_f64(thr);
  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) {
    const float64x2_t a = vld1q_f64(anchor + j);
    vst1q_f64(v + j, vsubq_f64(soft2(vaddq_f64(a, vld1q_f64(v + j)), vt), a));
  }
  for (; j < n; ++j) v[j] = soft1(anchor[j] + v[j], thr) - anchor[j];
}

void vr_dense_step(double* v, const double* snap, const double* grad, double eta, double ridge,
                   std::size_t n) {
  const float64x2_t ve = vdupq_n_f64(eta);
  const float64x2_t vr = vdupq_n_f64(ridge);
  std::size_t j = 0;
  if (snap == nullptr) {
    for (; j + 2 <= n; j += 2) {
      const float64x2_t x = vld1q_f64(v + j);
      const float64x2_t dir = vaddq_f64(vld1q_f64(grad + j), vmulq_f64(vr, x));
      vst1q_f64(v + j, vsubq_f64(x, vmulq_f64(ve, dir)));
    }
    for (; j < n; ++j) v[j] = v[j] - eta * (grad[j] + ridge * v[j]);
    return;
  }
  for (; j + 2 <= n; j += 2) {
    const float64x2_t x = vld1q_f64(v + j);
    const float64x2_t diff = vsubq_f64(x, vld1q_f64(snap + j));
    const float64x2_t dir = vaddq_f64(vld1q_f64(grad + j), vmulq_f64(vr, diff));
    vst1q_f64(v + j, vsubq_f64(x, vmulq_f64(ve, dir)));
  }
  for (; j < n; ++j) v[j] = v[j] - eta * (grad[j] + ridge * (v[j] - snap[j]));
}

}  // namespace

const KernelTable* neon_table() {
  static const KernelTable table{"neon", dot, axpy, sparse_dot, sparse_axpy, soft_threshold,
                                 shifted_soft_threshold, vr_dense_step};
  return &table;
}

}  // namespace subnewton::kernels
