#pragma once

#include <cstddef>
#include <span>

namespace scorescope::detail {

// Full-batch gradient descent on mean log-loss.
// `columns` holds `dims` standardized feature columns of length `rows`,
// stored one after another. `weights` and `bias` are updated in place.
void logistic_descent(std::span<const double> columns, std::size_t rows,
                      std::size_t dims, std::span<const double> target,
                      int epochs, double learning_rate,
                      std::span<double> weights, double& bias);

// Linear scores bias + w.x for column-major rows.
void linear_scores(std::span<const double> columns, std::size_t rows,
                   std::size_t dims, std::span<const double> weights,
                   double bias, std::span<double> out);

}  // namespace scorescope::detail
