#include "scorescope/stats.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>

#include "scorescope/error.hpp"

namespace scorescope::stats {

namespace {
const boost::math::normal_distribution<double> kStandardNormal{0.0, 1.0};
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw PreconditionError("normal quantile requires p in (0, 1)");
  }
  return boost::math::quantile(kStandardNormal, p);
}

double normal_cdf(double x) { return boost::math::cdf(kStandardNormal, x); }

double two_sided_critical(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw PreconditionError("alpha must lie in (0, 1)");
  }
  return normal_quantile(1.0 - alpha / 2.0);
}

ProportionTest two_proportion_z_test(std::size_t successes_a, std::size_t n_a,
                                     std::size_t successes_b,
                                     std::size_t n_b) {
  ProportionTest t;
  if (n_a == 0 || n_b == 0) {
    t.degenerate = true;
    return t;
  }
  const double na = static_cast<double>(n_a);
  const double nb = static_cast<double>(n_b);
  t.rate_a = static_cast<double>(successes_a) / na;
  t.rate_b = static_cast<double>(successes_b) / nb;
  t.difference = t.rate_b - t.rate_a;
  const double pooled =
      static_cast<double>(successes_a + successes_b) / (na + nb);
  const double variance = pooled * (1.0 - pooled) * (1.0 / na + 1.0 / nb);
  if (variance <= 0.0) {
    t.degenerate = true;
    return t;
  }
  t.z = t.difference / std::sqrt(variance);
  t.p_value = 2.0 * normal_cdf(-std::fabs(t.z));
  return t;
}

Interval difference_interval(std::size_t successes_a, std::size_t n_a,
                             std::size_t successes_b, std::size_t n_b,
                             double confidence) {
  if (n_a == 0 || n_b == 0) {
    throw PreconditionError("difference interval needs two non-empty arms");
  }
  const double ra = static_cast<double>(successes_a) / static_cast<double>(n_a);
  const double rb = static_cast<double>(successes_b) / static_cast<double>(n_b);
  const double se = std::sqrt(ra * (1.0 - ra) / static_cast<double>(n_a) +
                              rb * (1.0 - rb) / static_cast<double>(n_b));
  const double z = two_sided_critical(1.0 - confidence);
  const double d = rb - ra;
  return {d - z * se, d + z * se, se};
}

}  // namespace scorescope::stats
