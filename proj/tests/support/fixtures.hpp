#pragma once

// Seeded data generators shared by unit tests, the acceptance suite and the
// benchmarks. Beta draws go through the inverse CDF so a seed gives the same
// sample on every platform.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "scorescope/ingest.hpp"
#include "scorescope/random.hpp"

namespace fixtures {

double beta_draw(scorescope::Rng& rng, double a, double b);

/// 0.5 Beta(2,8) + 0.5 Beta(8,2): symmetric about 0.5.
std::vector<double> bimodal_scores(std::uint64_t seed, std::size_t n = 10000);
/// Beta(5,5).
std::vector<double> central_scores(std::uint64_t seed, std::size_t n = 10000);
/// 95% exactly 0.0, 5% uniform.
std::vector<double> spike_scores(std::uint64_t seed, std::size_t n = 10000);
/// n uniform scores; with n = 200 over 100 bins the counts are pure noise.
std::vector<double> uniform_scores(std::uint64_t seed, std::size_t n = 200);

std::vector<scorescope::ScoreRecord> to_records(const std::vector<double>& scores,
                                                const std::string& model_id,
                                                std::int64_t ts0 = 0);

/// Two standard-normal features; availability by a fair coin.
scorescope::TabularDataset independent_availability(std::uint64_t seed,
                                                    std::size_t n = 2000);
/// Same features; availability = 1 iff feature 1 exceeds its median.
scorescope::TabularDataset median_split_availability(std::uint64_t seed,
                                                     std::size_t n = 2000);

/// Two features, label = 1 iff x0 + x1 > 0, with every point at least
/// margin / sqrt(2) away from the boundary.
scorescope::TabularDataset separable(std::uint64_t seed, std::size_t n = 100,
                                     double margin = 1.0);

/// Labels independent of two normal features.
scorescope::TabularDataset noise_labels(std::uint64_t seed, std::size_t n = 200);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const { return path_ / name; }
  std::filesystem::path write(const std::string& name, const std::string& content) const;

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);
std::string score_log_text(const std::vector<scorescope::ScoreRecord>& records);

}  // namespace fixtures
