// Compiled with -mavx2 -mfma -ffp-contract=off. Only reached after the
// dispatcher has confirmed AVX2 and FMA support at runtime.

#include <immintrin.h>

#include <cmath>

#include "keratix/simd/kernels.hpp"

namespace keratix::simd {

namespace {

double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

// Separate multiply and add so the result matches the scalar reference bit
// for bit.
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) {
    const double prod = alpha * x[i];
    y[i] = y[i] + prod;
  }
}

void adam_avx2(double* p, const double* g, double* m, double* v, std::size_t n, const AdamParams& hp) {
  const __m256d wd = _mm256_set1_pd(hp.weight_decay);
  const __m256d b1 = _mm256_set1_pd(hp.beta1);
  const __m256d ob1 = _mm256_set1_pd(1.0 - hp.beta1);
  const __m256d b2 = _mm256_set1_pd(hp.beta2);
  const __m256d ob2 = _mm256_set1_pd(1.0 - hp.beta2);
  const __m256d bc1 = _mm256_set1_pd(hp.bias_correction1);
  const __m256d bc2 = _mm256_set1_pd(hp.bias_correction2);
  const __m256d eps = _mm256_set1_pd(hp.eps);
  const __m256d lr = _mm256_set1_pd(hp.lr);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d pi = _mm256_loadu_pd(p + i);
    const __m256d gi = _mm256_add_pd(_mm256_loadu_pd(g + i), _mm256_mul_pd(wd, pi));
    const __m256d mi = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(ob1, gi));
    const __m256d vi = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                                     _mm256_mul_pd(ob2, _mm256_mul_pd(gi, gi)));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    const __m256d mhat = _mm256_div_pd(mi, bc1);
    const __m256d vhat = _mm256_div_pd(vi, bc2);
    const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), eps);
    const __m256d step = _mm256_mul_pd(lr, mhat);
    _mm256_storeu_pd(p + i, _mm256_sub_pd(pi, _mm256_div_pd(step, denom)));
  }
  if (i < n) scalar_kernels().adam_update(p + i, g + i, m + i, v + i, n - i, hp);
}

}  // namespace

const KernelTable* avx2_kernels() {
  static const KernelTable table{dot_avx2, axpy_avx2, adam_avx2};
  return &table;
}

}  // namespace keratix::simd
