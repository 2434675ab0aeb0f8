#pragma once

#include <cstddef>

namespace scorescope::stats {

/// Standard normal quantile, p in (0, 1).
double normal_quantile(double p);

/// Standard normal CDF.
double normal_cdf(double x);

/// Two-sided critical value z_{1 - alpha/2}.
double two_sided_critical(double alpha);

struct ProportionTest {
  double rate_a = 0.0;
  double rate_b = 0.0;
  double difference = 0.0;  // rate_b - rate_a
  double z = 0.0;           // pooled-variance statistic, 0 when degenerate
  double p_value = 1.0;
  bool degenerate = false;  // pooled variance is zero or an arm is empty
};

/// Two-sided two-proportion z-test with pooled variance.
ProportionTest two_proportion_z_test(std::size_t successes_a, std::size_t n_a,
                                     std::size_t successes_b, std::size_t n_b);

struct Interval {
  double low = 0.0;
  double high = 0.0;
  double std_error = 0.0;
};

/// Unpooled (Wald) normal-approximation interval for rate_b - rate_a.
Interval difference_interval(std::size_t successes_a, std::size_t n_a,
                             std::size_t successes_b, std::size_t n_b,
                             double confidence);

}  // namespace scorescope::stats
