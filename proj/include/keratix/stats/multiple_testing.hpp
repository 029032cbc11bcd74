#pragma once

#include <span>
#include <vector>

namespace keratix::stats {

// Holm step-down adjustment, returned in input order. Throws ArgumentError
// for p outside [0, 1].
std::vector<double> holm_bonferroni(std::span<const double> p_values);

}  // namespace keratix::stats
