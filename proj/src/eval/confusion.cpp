#include "keratix/eval/confusion.hpp"

#include "keratix/core/error.hpp"

namespace keratix::eval {

ConfusionMatrix JointConfusion::marginal(Task task) const {
  ConfusionMatrix m;
  for (int t = 0; t < static_cast<int>(kNumJointStates); ++t) {
    const auto tl = LabelVector::from_joint_index(t).get(task);
    for (int p = 0; p < static_cast<int>(kNumJointStates); ++p) {
      m.counts[tl][LabelVector::from_joint_index(p).get(task)] += counts[t][p];
    }
  }
  return m;
}

ConfusionMatrix confusion(std::span<const LabelVector> predicted, std::span<const LabelVector> truth, Task task) {
  if (predicted.size() != truth.size()) throw ArgumentError("confusion: prediction and label counts differ");
  ConfusionMatrix m;
  for (std::size_t i = 0; i < truth.size(); ++i) m.counts[truth[i].get(task)][predicted[i].get(task)] += 1.0;
  return m;
}

ConfusionMatrix confusion(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> truth) {
  if (predicted.size() != truth.size()) throw ArgumentError("confusion: prediction and label counts differ");
  ConfusionMatrix m;
  for (std::size_t i = 0; i < truth.size(); ++i) m.counts[truth[i] != 0][predicted[i] != 0] += 1.0;
  return m;
}

JointConfusion joint_confusion(std::span<const LabelVector> predicted, std::span<const LabelVector> truth) {
  if (predicted.size() != truth.size()) throw ArgumentError("confusion: prediction and label counts differ");
  JointConfusion m;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    m.counts[truth[i].joint_index()][predicted[i].joint_index()] += 1.0;
  }
  return m;
}

ConfusionMatrix mean_confusion(std::span<const ConfusionMatrix> matrices) {
  if (matrices.empty()) throw ArgumentError("mean of zero confusion matrices");
  ConfusionMatrix m;
  for (const auto& c : matrices)
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) m.counts[a][b] += c.counts[a][b];
  for (auto& row : m.counts)
    for (double& v : row) v /= static_cast<double>(matrices.size());
  return m;
}

JointConfusion mean_joint_confusion(std::span<const JointConfusion> matrices) {
  if (matrices.empty()) throw ArgumentError("mean of zero confusion matrices");
  JointConfusion m;
  for (const auto& c : matrices)
    for (std::size_t a = 0; a < kNumJointStates; ++a)
      for (std::size_t b = 0; b < kNumJointStates; ++b) m.counts[a][b] += c.counts[a][b];
  for (auto& row : m.counts)
    for (double& v : row) v /= static_cast<double>(matrices.size());
  return m;
}

}  // namespace keratix::eval
