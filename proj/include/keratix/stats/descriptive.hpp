#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "keratix/core/types.hpp"

namespace keratix::stats {

// Pearson correlation; empty when either column has zero variance.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

inline constexpr std::array<std::string_view, 5> kCorrelationColumns{"bacteria", "fungi", "amoeba", "sex",
                                                                     "age_bin"};

struct CorrelationMatrix {
  std::array<std::array<std::optional<double>, 5>, 5> values{};
};

// Pairwise Pearson correlation of the numeric encodings of all cases.
CorrelationMatrix feature_label_correlation(const DatasetManifest& manifest);
CorrelationMatrix feature_label_correlation(std::span<const Case> cases);

// 1.06 * sd * n^(-1/5); UndefinedError when n < 2 or sd == 0.
double silverman_bandwidth(std::span<const double> values);

// Gaussian kernel density estimate at each evaluation point.
std::vector<double> kde_density(std::span<const double> values, std::span<const double> eval_points);

}  // namespace keratix::stats
