#pragma once

namespace keratix::stats {

// Two-sided p-value of a Student t statistic with `df` degrees of freedom.
double t_two_sided_p(double t, double df);

// Upper-tail p-value of an F statistic.
double f_upper_p(double f, double df1, double df2);

}  // namespace keratix::stats
