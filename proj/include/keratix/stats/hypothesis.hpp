#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace keratix::stats {

enum class TFlavor { welch, student };

std::string_view flavor_name(TFlavor flavor);
TFlavor parse_flavor(std::string_view name);

struct TestResult {
  double statistic = 0.0;  // t or F
  double df1 = 0.0;        // t: degrees of freedom; F: between-groups
  double df2 = 0.0;        // F: within-groups; 0 for t
  double p_raw = 1.0;
  std::optional<double> p_corrected;
  std::string family;
};

// Two-sided two-sample t-test. Each group needs two values and the standard
// error must be positive; otherwise UndefinedError.
TestResult t_test(std::span<const double> a, std::span<const double> b, TFlavor flavor = TFlavor::welch);

// One-way ANOVA over at least two groups of at least two values; a zero
// within-group sum of squares raises UndefinedError.
TestResult anova_oneway(std::span<const std::vector<double>> groups);

}  // namespace keratix::stats
