#include "keratix/stats/distributions.hpp"

#include <cmath>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "keratix/core/error.hpp"

namespace keratix::stats {

double t_two_sided_p(double t, double df) {
  if (!(df > 0) || !std::isfinite(t)) throw ArgumentError("t distribution: invalid statistic or degrees of freedom");
  const boost::math::students_t dist(df);
  return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

double f_upper_p(double f, double df1, double df2) {
  if (!(df1 > 0) || !(df2 > 0) || !std::isfinite(f) || f < 0) {
    throw ArgumentError("F distribution: invalid statistic or degrees of freedom");
  }
  const boost::math::fisher_f dist(df1, df2);
  return boost::math::cdf(boost::math::complement(dist, f));
}

}  // namespace keratix::stats
