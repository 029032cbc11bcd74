#include "keratix/eval/roc.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>

#include "keratix/core/error.hpp"
#include "keratix/core/manifest.hpp"

namespace keratix::eval {

RocCurve roc_curve(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw ArgumentError("roc: scores and labels differ in length");
  std::size_t pos = 0;
  for (auto l : labels) pos += l != 0;
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) throw UndefinedError("roc curve needs both classes");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  constexpr double inf = std::numeric_limits<double>::infinity();
  RocCurve curve;
  curve.points.push_back({inf, 0.0, 0.0});
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double t = scores[order[i]];
    while (i < order.size() && scores[order[i]] == t) {
      if (labels[order[i]] != 0) ++tp; else ++fp;
      ++i;
    }
    curve.points.push_back({t, static_cast<double>(tp) / pos, static_cast<double>(fp) / neg});
  }
  curve.points.push_back({-inf, 1.0, 1.0});
  return curve;
}

double auroc(const RocCurve& curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto& a = curve.points[i - 1];
    const auto& b = curve.points[i];
    area += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
  }
  return area;
}

double auroc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  return auroc(roc_curve(scores, labels));
}

YoudenResult youden_threshold(const RocCurve& curve) {
  if (curve.points.size() < 3) throw ArgumentError("youden: curve has no finite thresholds");
  YoudenResult best;
  bool found = false;
  for (std::size_t i = 1; i + 1 < curve.points.size(); ++i) {
    const auto& p = curve.points[i];
    const double j = p.tpr - p.fpr;
    const bool better = !found || j > best.j || (j == best.j && p.tpr > best.tpr) ||
                        (j == best.j && p.tpr == best.tpr && p.threshold < best.threshold);
    if (better) {
      best = {p.threshold, j, p.tpr, p.fpr};
      found = true;
    }
  }
  return best;
}

void write_roc_csv(std::span<const NamedCurve> curves, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "task,threshold,tpr,fpr\n";
  for (const auto& nc : curves) {
    for (const auto& p : nc.curve.points) {
      out << nc.task << ',' << format_real(p.threshold) << ',' << format_real(p.tpr) << ',' << format_real(p.fpr)
          << '\n';
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace keratix::eval
