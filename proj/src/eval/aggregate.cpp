#include "keratix/eval/aggregate.hpp"

#include <cmath>
#include <vector>

#include "keratix/core/error.hpp"

namespace keratix::eval {

MetricSummary summarize(std::span<const Metric> fold_values) {
  if (fold_values.size() < 2) throw UndefinedError("confidence interval needs at least two folds");
  MetricSummary s;
  double sum = 0.0;
  for (const auto& v : fold_values) {
    if (v) {
      sum += *v;
      ++s.folds;
    } else {
      ++s.excluded;
    }
  }
  if (s.folds < 2) return s;
  const double k = static_cast<double>(s.folds);
  const double mean = sum / k;
  double ss = 0.0;
  for (const auto& v : fold_values)
    if (v) ss += (*v - mean) * (*v - mean);
  const double sd = std::sqrt(ss / (k - 1.0));
  const double half = kZ95 * sd / std::sqrt(k);
  s.mean = mean;
  s.sd = sd;
  s.ci_low = mean - half;
  s.ci_high = mean + half;
  return s;
}

std::map<std::string, MetricSummary> aggregate_folds(std::span<const MetricsBundle> folds) {
  if (folds.size() < 2) throw UndefinedError("confidence interval needs at least two folds");
  std::map<std::string, MetricSummary> out;
  for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
    std::vector<Metric> values;
    bool any = false;
    for (const auto& b : folds) {
      values.push_back(b.entries()[m].second);
      any = any || values.back().has_value();
    }
    if (any) out.emplace(std::string(kMetricNames[m]), summarize(values));
  }
  return out;
}

}  // namespace keratix::eval
