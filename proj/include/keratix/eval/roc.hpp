#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace keratix::eval {

struct RocPoint {
  double threshold = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;

  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

// Points ordered by decreasing threshold: +inf -> (0, 0), one point per
// unique score (rule: score >= threshold), then -inf -> (1, 1).
struct RocCurve {
  std::vector<RocPoint> points;
};

// Throws UndefinedError unless both classes are present.
RocCurve roc_curve(std::span<const double> scores, std::span<const std::uint8_t> labels);

// Trapezoidal area under the curve.
double auroc(const RocCurve& curve);
double auroc(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct YoudenResult {
  double threshold = 0.5;
  double j = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
};

// Maximizes J = TPR - FPR over the finite thresholds; ties go to the higher
// TPR, then the lower threshold.
YoudenResult youden_threshold(const RocCurve& curve);

struct NamedCurve {
  std::string task;
  RocCurve curve;
};

// `task,threshold,tpr,fpr` rows.
void write_roc_csv(std::span<const NamedCurve> curves, const std::filesystem::path& path);

}  // namespace keratix::eval
