#pragma once

#include <random>
#include <vector>

#include "scorescope/ingest.hpp"
#include "scorescope/random.hpp"

namespace bench {

inline double beta(scorescope::Rng& rng, double a, double b) {
  std::gamma_distribution<double> ga(a), gb(b);
  const double x = ga(rng.engine());
  return x / (x + gb(rng.engine()));
}

inline std::vector<double> bimodal(std::size_t n, std::uint64_t seed = 1) {
  scorescope::Rng rng(seed);
  std::vector<double> out(n);
  for (auto& s : out) s = rng.uniform() < 0.5 ? beta(rng, 2, 8) : beta(rng, 8, 2);
  return out;
}

/// Two normal features; availability 1 iff x1 > 0.
inline scorescope::TabularDataset selection(std::size_t n, std::uint64_t seed = 1) {
  scorescope::Rng rng(seed);
  scorescope::TabularDataset ds;
  ds.feature_names = {"x0", "x1"};
  ds.features = scorescope::FeatureMatrix(n, 2);
  ds.target.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ds.features(i, 0) = rng.normal();
    ds.features(i, 1) = rng.normal();
    ds.target[i] = ds.features(i, 1) > 0.0;
  }
  return ds;
}

}  // namespace bench
