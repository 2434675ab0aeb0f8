#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace oracles {

double brute_force_max_disagreement(double a, double b, std::size_t steps) {
  const double lo = std::max(0.0, a + b - 1.0);
  const double hi = std::min(a, b);
  double best = -1.0;
  for (std::size_t i = 0; i <= steps; ++i) {
    const double both = i == steps ? hi : lo + (hi - lo) * static_cast<double>(i) /
                                                   static_cast<double>(steps);
    const double only_a = a - both;
    const double only_b = b - both;
    const double neither = 1.0 - only_a - only_b - both;
    if (only_a < -1e-15 || only_b < -1e-15 || neither < -1e-15) continue;
    best = std::max(best, only_a + only_b);
  }
  return best;
}

double pairwise_auc(std::span<const double> scores, std::span<const int> labels) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) wins += 1.0;
      if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

std::vector<double> moving_average(std::span<const double> freq, std::size_t window) {
  const auto n = static_cast<long>(freq.size());
  const long half = static_cast<long>(window / 2);
  std::vector<double> out(freq.size());
  for (long i = 0; i < n; ++i) {
    double sum = 0.0;
    long count = 0;
    for (long j = i - half; j <= i + half; ++j) {
      if (j < 0 || j >= n) continue;
      sum += freq[static_cast<std::size_t>(j)];
      ++count;
    }
    out[static_cast<std::size_t>(i)] = sum / static_cast<double>(count);
  }
  double total = 0.0;
  for (double h : out) total += h;
  for (double& h : out) h /= total;
  return out;
}

double l1(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s;
}

double binomial_cdf(std::size_t k, std::size_t n, double p) {
  double total = 0.0;
  for (std::size_t i = 0; i <= k; ++i) {
    const double log_term = std::lgamma(static_cast<double>(n) + 1.0) -
                            std::lgamma(static_cast<double>(i) + 1.0) -
                            std::lgamma(static_cast<double>(n - i) + 1.0) +
                            static_cast<double>(i) * std::log(p) +
                            static_cast<double>(n - i) * std::log1p(-p);
    total += std::exp(log_term);
  }
  return total;
}

}  // namespace oracles
