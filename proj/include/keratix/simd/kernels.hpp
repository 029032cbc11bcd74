#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace keratix::simd {

// Inner loops used by the model. Each has a scalar reference and, on x86-64,
// an AVX2 variant picked at first use from cpuid. KERATIX_SIMD=scalar in the
// environment forces the reference path.
//
// Elementwise kernels (axpy, adam_update) are bit-identical across variants.
// dot reassociates the sum, so variants agree only to rounding.

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

struct AdamParams {
  double lr;
  double beta1;
  double beta2;
  double eps;
  double weight_decay;
  double bias_correction1;  // 1 - beta1^t
  double bias_correction2;  // 1 - beta2^t
};

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // g' = g + wd * p; m = b1 m + (1-b1) g'; v = b2 v + (1-b2) g'^2;
  // p -= lr * (m / bc1) / (sqrt(v / bc2) + eps)
  void (*adam_update)(double* params, const double* grads, double* m, double* v, std::size_t n,
                      const AdamParams& hp);
};

const KernelTable& scalar_kernels();
// nullptr when the variant was not compiled in.
const KernelTable* avx2_kernels();

bool cpu_has_avx2();

// Variant in use by the free functions below.
Isa active_isa();
const KernelTable& active_kernels();

// Overrides the selection (tests and benchmarks). Throws if unavailable.
void force_isa(Isa isa);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active_kernels().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active_kernels().axpy(alpha, x.data(), y.data(), x.size());
}

inline void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m,
                        std::span<double> v, const AdamParams& hp) {
  active_kernels().adam_update(params.data(), grads.data(), m.data(), v.data(), params.size(), hp);
}

}  // namespace keratix::simd
