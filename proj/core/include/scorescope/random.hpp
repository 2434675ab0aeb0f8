#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace scorescope {

/// Seeded generator used by every simulator and resampler.
///
/// Built on std::mt19937_64, whose output sequence is fixed by the standard.
/// The derived draws (uniform, bounded integers, normals) are computed here
/// rather than through <random> distributions so that a seed reproduces the
/// same values with any standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  /// Unbiased integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal deviate (Marsaglia polar method).
  double normal();

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Mixes a base seed with a stream index (splitmix64 finalizer). Used to give
/// each replication or permutation its own independent generator.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace scorescope
