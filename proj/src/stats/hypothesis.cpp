#include "keratix/stats/hypothesis.hpp"

#include <cmath>

#include "keratix/core/error.hpp"
#include "keratix/stats/distributions.hpp"

namespace keratix::stats {

namespace {

struct Moments {
  double n = 0.0;
  double mean = 0.0;
  double ss = 0.0;  // sum of squared deviations
};

Moments moments(std::span<const double> x) {
  Moments m;
  m.n = static_cast<double>(x.size());
  for (double v : x) m.mean += v;
  m.mean /= m.n;
  for (double v : x) m.ss += (v - m.mean) * (v - m.mean);
  return m;
}

}  // namespace

std::string_view flavor_name(TFlavor flavor) { return flavor == TFlavor::welch ? "welch" : "student"; }

TFlavor parse_flavor(std::string_view name) {
  if (name == "welch") return TFlavor::welch;
  if (name == "student") return TFlavor::student;
  throw ArgumentError("unknown t-test flavor '" + std::string(name) + "'");
}

TestResult t_test(std::span<const double> a, std::span<const double> b, TFlavor flavor) {
  if (a.size() < 2 || b.size() < 2) throw UndefinedError("t-test needs at least two values per group");
  const Moments ma = moments(a);
  const Moments mb = moments(b);
  const double va = ma.ss / (ma.n - 1.0);
  const double vb = mb.ss / (mb.n - 1.0);
  TestResult r;
  double se2 = 0.0;
  if (flavor == TFlavor::student) {
    const double pooled = (ma.ss + mb.ss) / (ma.n + mb.n - 2.0);
    se2 = pooled * (1.0 / ma.n + 1.0 / mb.n);
    r.df1 = ma.n + mb.n - 2.0;
  } else {
    const double qa = va / ma.n;
    const double qb = vb / mb.n;
    se2 = qa + qb;
    if (se2 > 0.0) r.df1 = se2 * se2 / (qa * qa / (ma.n - 1.0) + qb * qb / (mb.n - 1.0));
  }
  if (!(se2 > 0.0)) throw UndefinedError("t-test: both groups have zero variance");
  r.statistic = (ma.mean - mb.mean) / std::sqrt(se2);
  r.p_raw = t_two_sided_p(r.statistic, r.df1);
  return r;
}

TestResult anova_oneway(std::span<const std::vector<double>> groups) {
  if (groups.size() < 2) throw UndefinedError("ANOVA needs at least two groups");
  double n_total = 0.0;
  double grand = 0.0;
  std::vector<Moments> ms;
  for (const auto& g : groups) {
    if (g.size() < 2) throw UndefinedError("ANOVA needs at least two values per group");
    ms.push_back(moments(g));
    n_total += ms.back().n;
    for (double v : g) grand += v;
  }
  grand /= n_total;
  double ssb = 0.0;
  double ssw = 0.0;
  for (const auto& m : ms) {
    ssb += m.n * (m.mean - grand) * (m.mean - grand);
    ssw += m.ss;
  }
  if (!(ssw > 0.0)) throw UndefinedError("ANOVA: zero within-group variance");
  TestResult r;
  r.df1 = static_cast<double>(groups.size()) - 1.0;
  r.df2 = n_total - static_cast<double>(groups.size());
  r.statistic = (ssb / r.df1) / (ssw / r.df2);
  r.p_raw = f_upper_p(r.statistic, r.df1, r.df2);
  return r;
}

}  // namespace keratix::stats
