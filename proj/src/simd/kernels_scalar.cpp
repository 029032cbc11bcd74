#include <cmath>

#include "keratix/simd/kernels.hpp"

namespace keratix::simd {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double prod = alpha * x[i];
    y[i] = y[i] + prod;
  }
}

void adam_scalar(double* p, const double* g, double* m, double* v, std::size_t n, const AdamParams& hp) {
  for (std::size_t i = 0; i < n; ++i) {
    const double decay = hp.weight_decay * p[i];
    const double gi = g[i] + decay;
    const double m1 = hp.beta1 * m[i];
    const double m2 = (1.0 - hp.beta1) * gi;
    m[i] = m1 + m2;
    const double gsq = gi * gi;
    const double v1 = hp.beta2 * v[i];
    const double v2 = (1.0 - hp.beta2) * gsq;
    v[i] = v1 + v2;
    const double mhat = m[i] / hp.bias_correction1;
    const double vhat = v[i] / hp.bias_correction2;
    const double denom = std::sqrt(vhat) + hp.eps;
    const double step = hp.lr * mhat;
    p[i] = p[i] - step / denom;
  }
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{dot_scalar, axpy_scalar, adam_scalar};
  return table;
}

}  // namespace keratix::simd
