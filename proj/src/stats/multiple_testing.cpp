#include "keratix/stats/multiple_testing.hpp"

#include <algorithm>
#include <numeric>

#include "keratix/core/error.hpp"

namespace keratix::stats {

std::vector<double> holm_bonferroni(std::span<const double> p_values) {
  for (double p : p_values)
    if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("p-value outside [0, 1]");
  const std::size_t m = p_values.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
  std::vector<double> out(m);
  double running = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double adj = std::min(1.0, static_cast<double>(m - i) * p_values[order[i]]);
    running = std::max(running, adj);
    out[order[i]] = running;
  }
  return out;
}

}  // namespace keratix::stats
