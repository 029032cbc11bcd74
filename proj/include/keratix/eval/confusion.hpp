#pragma once

#include <array>
#include <span>

#include "keratix/core/types.hpp"

namespace keratix::eval {

// counts[true][predicted]. Entries are reals so fold averages share the type.
struct ConfusionMatrix {
  std::array<std::array<double, 2>, 2> counts{};

  double tn() const { return counts[0][0]; }
  double fp() const { return counts[0][1]; }
  double fn() const { return counts[1][0]; }
  double tp() const { return counts[1][1]; }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

// counts[true joint_index][predicted joint_index]; kJointDisplayOrder gives
// the table order H, B, F, A, BF, FA, BA, BFA.
struct JointConfusion {
  std::array<std::array<double, kNumJointStates>, kNumJointStates> counts{};

  // Sums over the states that agree on `task`.
  ConfusionMatrix marginal(Task task) const;

  friend bool operator==(const JointConfusion&, const JointConfusion&) = default;
};

ConfusionMatrix confusion(std::span<const LabelVector> predicted, std::span<const LabelVector> truth, Task task);
ConfusionMatrix confusion(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> truth);
JointConfusion joint_confusion(std::span<const LabelVector> predicted, std::span<const LabelVector> truth);

ConfusionMatrix mean_confusion(std::span<const ConfusionMatrix> matrices);
JointConfusion mean_joint_confusion(std::span<const JointConfusion> matrices);

}  // namespace keratix::eval
