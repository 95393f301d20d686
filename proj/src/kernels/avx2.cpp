// AVX2 variants. Compiled with -mavx2 only (no -mfma) so elementwise results
// match the scalar reference bit for bit.

#include <immintrin.h>

#include <cmath>

#include "subnewton/kernels.hpp"

namespace subnewton::kernels {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 8 <= n; j += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(x + j), _mm256_loadu_pd(y + j)));
    acc1 = _mm256_add_pd(acc1,
                         _mm256_mul_pd(_mm256_loadu_pd(x + j + 4), _mm256_loadu_pd(y + j + 4)));
  }
  for (; j + 4 <= n; j += 4)
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(_mm256_loadu_pd(x + j), _mm256_loadu_pd(y + j)));
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; j < n; ++j) s += x[j] * y[j];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d r = _mm256_add_pd(_mm256_loadu_pd(y + j), _mm256_mul_pd(va, _mm256_loadu_pd(x + j)));
    _mm256_storeu_pd(y + j, r);
  }
  for (; j < n; ++j) y[j] += a * x[j];
}

double sparse_dot(const Index* idx, const double* val, std::size_t nnz, const double* w) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t k = 0;
  for (; k + 4 <= nnz; k += 4) {
    const __m128i vi = _mm_loadu_si128(reinterpret_cast<const __m128i*>(idx + k));
    const __m256d gathered = _mm256_i32gather_pd(w, vi, 8);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(val + k), gathered));
  }
  double s = hsum(acc);
  for (; k < nnz; ++k) s += val[k] * w[idx[k]];
  return s;
}

// Scatter has no AVX2 instruction; the scalar loop is already optimal.
void sparse_axpy(double a, const Index* idx, const double* val, std::size_t nnz, double* y) {
  for (std::size_t k = 0; k < nnz; ++k) y[idx[k]] += a * val[k];
}

inline __m256d soft4(__m256d z, __m256d thr) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const __m256d mag = _mm256_sub_pd(_mm256_andnot_pd(sign_mask, z), thr);
  const __m256d positive = _mm256_cmp_pd(mag, _mm256_setzero_pd(), _CMP_GT_OQ);
  const __m256d kept = _mm256_and_pd(mag, positive);
  const __m256d sign = _mm256_and_pd(_mm256_and_pd(z, sign_mask), positive);
  return _mm256_or_pd(kept, sign);
}

inline double soft1(double z, double thr) {
  const double m = std::fabs(z) - thr;
  if (m <= 0.0) return 0.0;
  return std::copysign(m, z);
}

void soft_threshold(const double* z, double thr, double* out, std::size_t n) {
  const __m256d vt = _mm256_set1_pd(thr);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) _mm256_storeu_pd(out + j, soft4(_mm256_loadu_pd(z + j), vt));
  for (; j < n; ++j) out[j] = soft1(z[j], thr);
}

void shifted_soft_threshold(const double* anchor, double thr, double* v, std::size_t n) {
  const __m256d vt = _mm256_set1_pd(thr);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d a = _mm256_loadu_pd(anchor + j);
    const __m256d s = soft4(_mm256_add_pd(a, _mm256_loadu_pd(v + j)), vt);
    _mm256_storeu_pd(v + j, _mm256_sub_pd(s, a));
  }
  for (; j < n; ++j) v[j] = soft1(anchor[j] + v[j], thr) - anchor[j];
}

void vr_dense_step(double* v, const double* snap, const double* grad, double eta, double ridge,
                   std::size_t n) {
  const __m256d ve = _mm256_set1_pd(eta);
  const __m256d vr = _mm256_set1_pd(ridge);
  std::size_t j = 0;
  if (snap == nullptr) {
    for (; j + 4 <= n; j += 4) {
      const __m256d x = _mm256_loadu_pd(v + j);
      const __m256d dir = _mm256_add_pd(_mm256_loadu_pd(grad + j), _mm256_mul_pd(vr, x));
      _mm256_storeu_pd(v + j, _mm256_sub_pd(x, _mm256_mul_pd(ve, dir)));
    }
    for (; j < n; ++j) v[j] = v[j] - eta * (grad[j] + ridge * v[j]);
    return;
  }
  for (; j + 4 <= n; j += 4) {
    const __m256d x = _mm256_loadu_pd(v + j);
    const __m256d diff = _mm256_sub_pd(x, _mm256_loadu_pd(snap + j));
    const __m256d dir = _mm256_add_pd(_mm256_loadu_pd(grad + j), _mm256_mul_pd(vr, diff));
    _mm256_storeu_pd(v + j, _mm256_sub_pd(x, _mm256_mul_pd(ve, dir)));
  }
  for (; j < n; ++j) v[j] = v[j] - eta * (grad[j] + ridge * (v[j] - snap[j]));
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table{"avx2", dot, axpy, sparse_dot, sparse_axpy, soft_threshold,
                                 shifted_soft_threshold, vr_dense_step};
  if (!__builtin_cpu_supports("avx2")) return nullptr;
  return &table;
}

}  // namespace subnewton::kernels
