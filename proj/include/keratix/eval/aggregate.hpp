#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>

#include "keratix/eval/metrics.hpp"

namespace keratix::eval {

inline constexpr double kZ95 = 1.959964;

// Mean, sample sd and mean +- kZ95 * sd / sqrt(k) over the defined fold
// values; `excluded` counts undefined folds. The statistics stay empty when
// fewer than two folds are defined.
struct MetricSummary {
  std::optional<double> mean;
  std::optional<double> sd;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  std::size_t folds = 0;
  std::size_t excluded = 0;
};

// Throws UndefinedError when fewer than two folds are given.
MetricSummary summarize(std::span<const Metric> fold_values);

// One summary per scalar metric name; metrics undefined in every fold
// (e.g. MAE for binary tasks) are left out.
std::map<std::string, MetricSummary> aggregate_folds(std::span<const MetricsBundle> folds);

}  // namespace keratix::eval
