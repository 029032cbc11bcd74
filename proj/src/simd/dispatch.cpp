#include <atomic>
#include <cstdlib>
#include <string>

#include "keratix/core/error.hpp"
#include "keratix/simd/kernels.hpp"

namespace keratix::simd {

#ifndef KERATIX_HAVE_AVX2
const KernelTable* avx2_kernels() { return nullptr; }
#endif

namespace {

Isa detect() {
  if (const char* env = std::getenv("KERATIX_SIMD")) {
    if (std::string(env) == "scalar") return Isa::scalar;
  }
  if (avx2_kernels() != nullptr && cpu_has_avx2()) return Isa::avx2;
  return Isa::scalar;
}

std::atomic<int>& selected() {
  static std::atomic<int> isa{static_cast<int>(detect())};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool cpu_has_avx2() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa active_isa() { return static_cast<Isa>(selected().load(std::memory_order_relaxed)); }

const KernelTable& active_kernels() {
  return active_isa() == Isa::avx2 ? *avx2_kernels() : scalar_kernels();
}

void force_isa(Isa isa) {
  if (isa == Isa::avx2 && (avx2_kernels() == nullptr || !cpu_has_avx2())) {
    throw UnsupportedModeError("AVX2 kernels are not available on this build or CPU");
  }
  selected().store(static_cast<int>(isa), std::memory_order_relaxed);
}

}  // namespace keratix::simd
