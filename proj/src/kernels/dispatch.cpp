#include <atomic>
#include <cstdlib>
#include <string_view>

#include "subnewton/kernels.hpp"

namespace subnewton::kernels {

#ifndef SUBNEWTON_HAVE_AVX2
const KernelTable* avx2_table() { return nullptr; }
#endif
#ifndef SUBNEWTON_HAVE_NEON
const KernelTable* neon_table() { return nullptr; }
#endif

namespace {

const KernelTable* select_default() {
  const char* forced = std::getenv("SUBNEWTON_KERNELS");
  if (forced != nullptr) {
    const std::string_view want(forced);
    if (want == "scalar") return &scalar_table();
    if (want == "avx2" && avx2_table() != nullptr) return avx2_table();
    if (want == "neon" && neon_table() != nullptr) return neon_table();
  }
  if (const KernelTable* t = avx2_table()) return t;
  if (const KernelTable* t = neon_table()) return t;
  return &scalar_table();
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> current{select_default()};
  return current;
}

}  // namespace

const KernelTable& active() { return *slot().load(std::memory_order_relaxed); }

const KernelTable& set_active(const KernelTable& table) {
  return *slot().exchange(&table, std::memory_order_relaxed);
}

}  // namespace subnewton::kernels
