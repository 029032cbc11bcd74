#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "keratix/core/types.hpp"
#include "keratix/eval/confusion.hpp"

namespace keratix::eval {

inline constexpr std::array<double, kNumTasks> kDefaultThresholds{0.5, 0.5, 0.5};

// Per task: 1 iff score >= threshold.
std::vector<LabelVector> apply_thresholds(std::span<const PredictionRecord> records,
                                          const std::array<double, kNumTasks>& thresholds);
std::vector<std::uint8_t> apply_threshold(std::span<const double> scores, double threshold);

// Argmax of each age simplex (lowest bin on ties).
std::vector<std::uint8_t> predicted_age_bins(std::span<const PredictionRecord> records);

using Metric = std::optional<double>;  // empty when a denominator is zero

struct MetricsBundle {
  Metric acc;
  Metric balanced_acc;
  Metric f1;
  Metric precision;
  Metric recall;
  Metric auroc;
  Metric mae;  // multiclass only
  std::vector<Metric> class_f1;
  std::vector<Metric> class_recall;

  // Scalar metrics in report order.
  std::vector<std::pair<std::string_view, Metric>> entries() const;
};

inline constexpr std::array<std::string_view, 7> kMetricNames{"acc",  "balanced_acc", "f1", "precision",
                                                              "recall", "auroc",        "mae"};

// Binary task: precision, recall and F1 of the positive class; BA is the mean
// of both class recalls; AUROC from the scores (empty when a class is missing).
MetricsBundle binary_metrics(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> truth,
                             std::span<const double> scores);

// Multiclass task: macro precision, recall and F1 over the classes where each
// is defined, BA the mean of defined class recalls, MAE on class indices and
// one-vs-rest macro AUROC from `probs` (n x classes).
MetricsBundle multiclass_metrics(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> truth,
                                 std::span<const double> probs, std::size_t classes);

// Ratio metrics from a 2x2 matrix (accepts averaged, fractional counts).
Metric recall(const ConfusionMatrix& m);
Metric precision(const ConfusionMatrix& m);
Metric specificity(const ConfusionMatrix& m);
Metric f1_score(const ConfusionMatrix& m);
Metric accuracy(const ConfusionMatrix& m);

}  // namespace keratix::eval
