#include "keratix/eval/metrics.hpp"

#include <cmath>

#include "keratix/core/error.hpp"
#include "keratix/eval/roc.hpp"

namespace keratix::eval {

namespace {

Metric ratio(double num, double den) {
  if (den == 0.0) return std::nullopt;
  return num / den;
}

Metric mean_of_defined(std::span<const Metric> values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace

std::vector<LabelVector> apply_thresholds(std::span<const PredictionRecord> records,
                                          const std::array<double, kNumTasks>& thresholds) {
  std::vector<LabelVector> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    LabelVector l;
    for (Task t : kAllTasks) {
      const auto i = static_cast<std::size_t>(t);
      l.set(t, r.scores[i] >= thresholds[i] ? 1 : 0);
    }
    out.push_back(l);
  }
  return out;
}

std::vector<std::uint8_t> apply_threshold(std::span<const double> scores, double threshold) {
  std::vector<std::uint8_t> out;
  out.reserve(scores.size());
  for (double s : scores) out.push_back(s >= threshold ? 1 : 0);
  return out;
}

std::vector<std::uint8_t> predicted_age_bins(std::span<const PredictionRecord> records) {
  std::vector<std::uint8_t> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    if (!r.probs_age) throw ArgumentError("record '" + r.case_id + "' has no age probabilities");
    std::size_t best = 0;
    for (std::size_t k = 1; k < kNumAgeBins; ++k)
      if ((*r.probs_age)[k] > (*r.probs_age)[best]) best = k;
    out.push_back(static_cast<std::uint8_t>(best));
  }
  return out;
}

std::vector<std::pair<std::string_view, Metric>> MetricsBundle::entries() const {
  return {{kMetricNames[0], acc},    {kMetricNames[1], balanced_acc}, {kMetricNames[2], f1},
          {kMetricNames[3], precision}, {kMetricNames[4], recall}, {kMetricNames[5], auroc},
          {kMetricNames[6], mae}};
}

Metric recall(const ConfusionMatrix& m) { return ratio(m.tp(), m.tp() + m.fn()); }
Metric precision(const ConfusionMatrix& m) { return ratio(m.tp(), m.tp() + m.fp()); }
Metric specificity(const ConfusionMatrix& m) { return ratio(m.tn(), m.tn() + m.fp()); }
Metric f1_score(const ConfusionMatrix& m) { return ratio(2.0 * m.tp(), 2.0 * m.tp() + m.fp() + m.fn()); }
Metric accuracy(const ConfusionMatrix& m) { return ratio(m.tp() + m.tn(), m.tp() + m.tn() + m.fp() + m.fn()); }

MetricsBundle binary_metrics(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> truth,
                             std::span<const double> scores) {
  if (scores.size() != truth.size()) throw ArgumentError("metrics: scores and labels differ in length");
  const ConfusionMatrix m = confusion(predicted, truth);
  MetricsBundle b;
  b.acc = accuracy(m);
  b.recall = recall(m);
  b.precision = precision(m);
  b.f1 = f1_score(m);
  const Metric spec = specificity(m);
  if (b.recall && spec) b.balanced_acc = (*b.recall + *spec) / 2.0;
  const ConfusionMatrix flipped{{{{m.tp(), m.fn()}, {m.fp(), m.tn()}}}};
  b.class_recall = {spec, b.recall};
  b.class_f1 = {f1_score(flipped), b.f1};
  try {
    b.auroc = auroc(scores, truth);
  } catch (const UndefinedError&) {
    b.auroc = std::nullopt;
  }
  return b;
}

MetricsBundle multiclass_metrics(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> truth,
                                 std::span<const double> probs, std::size_t classes) {
  if (predicted.size() != truth.size()) throw ArgumentError("metrics: prediction and label counts differ");
  if (probs.size() != truth.size() * classes) throw ArgumentError("metrics: probability matrix has the wrong size");
  const std::size_t n = truth.size();
  MetricsBundle b;
  std::vector<Metric> class_precision(classes);
  b.class_recall.resize(classes);
  b.class_f1.resize(classes);
  std::vector<Metric> class_auroc(classes);
  std::vector<std::uint8_t> pt(n);
  std::vector<std::uint8_t> tt(n);
  std::vector<double> sc(n);
  for (std::size_t k = 0; k < classes; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      pt[i] = predicted[i] == k;
      tt[i] = truth[i] == k;
      sc[i] = probs[i * classes + k];
    }
    const ConfusionMatrix m = confusion(pt, tt);
    class_precision[k] = precision(m);
    b.class_recall[k] = recall(m);
    b.class_f1[k] = f1_score(m);
    try {
      class_auroc[k] = auroc(sc, tt);
    } catch (const UndefinedError&) {
      class_auroc[k] = std::nullopt;
    }
  }
  double correct = 0.0;
  double abs_err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    correct += predicted[i] == truth[i];
    abs_err += std::abs(static_cast<double>(predicted[i]) - static_cast<double>(truth[i]));
  }
  b.acc = ratio(correct, static_cast<double>(n));
  b.mae = ratio(abs_err, static_cast<double>(n));
  b.precision = mean_of_defined(class_precision);
  b.recall = mean_of_defined(b.class_recall);
  b.balanced_acc = b.recall;
  b.f1 = mean_of_defined(b.class_f1);
  b.auroc = mean_of_defined(class_auroc);
  return b;
}

}  // namespace keratix::eval
