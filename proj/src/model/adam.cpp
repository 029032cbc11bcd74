#include "keratix/model/adam.hpp"

#include <cmath>

#include "keratix/core/error.hpp"
#include "keratix/simd/kernels.hpp"

namespace keratix::model {

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, double lr,
               double weight_decay) {
  if (grads.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
    throw ArgumentError("adam: parameter, gradient and state sizes differ");
  }
  ++state.step;
  const simd::AdamParams hp{lr,
                            state.beta1,
                            state.beta2,
                            state.eps,
                            weight_decay,
                            1.0 - std::pow(state.beta1, static_cast<double>(state.step)),
                            1.0 - std::pow(state.beta2, static_cast<double>(state.step))};
  simd::adam_update(params, grads, state.m, state.v, hp);
}

}  // namespace keratix::model
