#pragma once

// Dense and sparse vector kernels used by every solver inner loop.
//
// Each kernel has a scalar reference implementation and, where the target
// supports it, an explicit SIMD variant. The active table is chosen once at
// startup from the CPU feature set and can be pinned with the environment
// variable SUBNEWTON_KERNELS=scalar|avx2|neon.
//
// Elementwise kernels are bit-identical across variants (no FMA contraction,
// same operation order per lane). Reductions (dot, sparse_dot, squared_norm)
// use several accumulators in the SIMD path and agree with the scalar path
// to rounding.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace subnewton::kernels {

using Index = std::int32_t;

struct KernelTable {
  std::string_view name;
  // sum_j x_j y_j
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y += a x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // sum_k val_k w[idx_k]
  double (*sparse_dot)(const Index* idx, const double* val, std::size_t nnz, const double* w);
  // y[idx_k] += a val_k
  void (*sparse_axpy)(double a, const Index* idx, const double* val, std::size_t nnz, double* y);
  // out_j = sign(z_j) max(|z_j| - thr, 0)
  void (*soft_threshold)(const double* z, double thr, double* out, std::size_t n);
  // v_j = soft(anchor_j + v_j, thr) - anchor_j
  void (*shifted_soft_threshold)(const double* anchor, double thr, double* v, std::size_t n);
  // v_j = v_j - eta (grad_j + ridge (v_j - snap_j)): the dense half of a
  // variance-reduced step; snap == nullptr means a zero snapshot.
  void (*vr_dense_step)(double* v, const double* snap, const double* grad, double eta, double ridge,
                        std::size_t n);
};

const KernelTable& scalar_table();
// nullptr when the variant is not compiled in or the CPU lacks support.
const KernelTable* avx2_table();
const KernelTable* neon_table();

// Table used by the free functions below.
const KernelTable& active();
// Override the active table (tests and benchmarks); returns the previous one.
const KernelTable& set_active(const KernelTable& table);

inline double dot(std::span<const double> x, std::span<const double> y) {
  return active().dot(x.data(), y.data(), x.size());
}

inline double squared_norm(std::span<const double> x) { return dot(x, x); }

inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active().axpy(a, x.data(), y.data(), x.size());
}

inline double sparse_dot(std::span<const Index> idx, std::span<const double> val,
                         std::span<const double> w) {
  return active().sparse_dot(idx.data(), val.data(), idx.size(), w.data());
}

inline void sparse_axpy(double a, std::span<const Index> idx, std::span<const double> val,
                        std::span<double> y) {
  active().sparse_axpy(a, idx.data(), val.data(), idx.size(), y.data());
}

inline void soft_threshold(std::span<const double> z, double thr, std::span<double> out) {
  active().soft_threshold(z.data(), thr, out.data(), z.size());
}

inline void shifted_soft_threshold(std::span<const double> anchor, double thr, std::span<double> v) {
  active().shifted_soft_threshold(anchor.data(), thr, v.data(), v.size());
}

inline void vr_dense_step(std::span<double> v, std::span<const double> snap,
                          std::span<const double> grad, double eta, double ridge) {
  active().vr_dense_step(v.data(), snap.empty() ? nullptr : snap.data(), grad.data(), eta, ridge,
                         v.size());
}

}  // namespace subnewton::kernels
