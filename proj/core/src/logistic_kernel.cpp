#include "logistic_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#if defined(__GNUC__) && !defined(__clang__) && defined(__x86_64__)
#define SCORESCOPE_CLONES \
  __attribute__((target_clones("avx512f", "avx2", "default")))
#else
#define SCORESCOPE_CLONES
#endif

namespace scorescope::detail {

SCORESCOPE_CLONES
void logistic_descent(std::span<const double> columns, std::size_t rows,
                      std::size_t dims, std::span<const double> target,
                      int epochs, double learning_rate,
                      std::span<double> weights, double& bias) {
  std::vector<double> z(rows);
  const double* y = target.data();
  double* zp = z.data();
  const double step = learning_rate / static_cast<double>(rows);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    for (std::size_t i = 0; i < rows; ++i) zp[i] = bias;
    for (std::size_t j = 0; j < dims; ++j) {
      const double w = weights[j];
      const double* x = columns.data() + j * rows;
      for (std::size_t i = 0; i < rows; ++i) zp[i] += w * x[i];
    }
    // Residual sigma(z) - y, overwriting z. Clamping keeps exp finite.
    double grad_bias = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
      const double t = std::min(std::max(zp[i], -500.0), 500.0);
      zp[i] = 1.0 / (1.0 + std::exp(-t)) - y[i];
      grad_bias += zp[i];
    }
    for (std::size_t j = 0; j < dims; ++j) {
      const double* x = columns.data() + j * rows;
      double g = 0.0;
      for (std::size_t i = 0; i < rows; ++i) g += zp[i] * x[i];
      weights[j] -= step * g;
    }
    bias -= step * grad_bias;
  }
}

void linear_scores(std::span<const double> columns, std::size_t rows,
                   std::size_t dims, std::span<const double> weights,
                   double bias, std::span<double> out) {
  for (std::size_t i = 0; i < rows; ++i) out[i] = bias;
  for (std::size_t j = 0; j < dims; ++j) {
    const double w = weights[j];
    const double* x = columns.data() + j * rows;
    for (std::size_t i = 0; i < rows; ++i) out[i] += w * x[i];
  }
}

}  // namespace scorescope::detail
