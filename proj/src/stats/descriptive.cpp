#include "keratix/stats/descriptive.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "keratix/core/error.hpp"

namespace keratix::stats {

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ArgumentError("correlation: columns differ in length");
  if (x.size() < 2) return std::nullopt;
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationMatrix feature_label_correlation(std::span<const Case> cases) {
  std::array<std::vector<double>, 5> cols;
  for (const Case& c : cases) {
    cols[0].push_back(c.labels.bacteria);
    cols[1].push_back(c.labels.fungi);
    cols[2].push_back(c.labels.amoeba);
    cols[3].push_back(c.sex);
    cols[4].push_back(c.age_bin);
  }
  CorrelationMatrix m;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) m.values[i][j] = pearson(cols[i], cols[j]);
  return m;
}

CorrelationMatrix feature_label_correlation(const DatasetManifest& manifest) {
  return feature_label_correlation(std::span<const Case>(manifest.cases));
}

double silverman_bandwidth(std::span<const double> values) {
  if (values.size() < 2) throw UndefinedError("bandwidth needs at least two values");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  if (sd == 0.0) throw UndefinedError("bandwidth undefined for a constant sample");
  return 1.06 * sd * std::pow(n, -0.2);
}

std::vector<double> kde_density(std::span<const double> values, std::span<const double> eval_points) {
  const double h = silverman_bandwidth(values);
  const double norm = 1.0 / (static_cast<double>(values.size()) * h * std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> out;
  out.reserve(eval_points.size());
  for (double x : eval_points) {
    double sum = 0.0;
    for (double v : values) {
      const double u = (x - v) / h;
      sum += std::exp(-0.5 * u * u);
    }
    out.push_back(sum * norm);
  }
  return out;
}

}  // namespace keratix::stats
