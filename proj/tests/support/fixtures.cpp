#include "fixtures.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>

#include <unistd.h>

namespace fixtures {

using scorescope::Rng;

double beta_draw(Rng& rng, double a, double b) {
  double u = rng.uniform();
  if (u <= 0.0) u = 0x1p-60;
  return boost::math::ibeta_inv(a, b, u);
}

std::vector<double> bimodal_scores(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& s : out) s = rng.uniform() < 0.5 ? beta_draw(rng, 2, 8) : beta_draw(rng, 8, 2);
  return out;
}

std::vector<double> central_scores(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& s : out) s = beta_draw(rng, 5, 5);
  return out;
}

std::vector<double> spike_scores(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  std::vector<double> out(n, 0.0);
  const std::size_t spread = n / 20;
  for (std::size_t i = n - spread; i < n; ++i) out[i] = rng.uniform();
  rng.shuffle(std::span<double>(out));
  return out;
}

std::vector<double> uniform_scores(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& s : out) s = rng.uniform();
  return out;
}

std::vector<scorescope::ScoreRecord> to_records(const std::vector<double>& scores,
                                                const std::string& model_id,
                                                std::int64_t ts0) {
  std::vector<scorescope::ScoreRecord> out;
  out.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    scorescope::ScoreRecord r;
    r.model_id = model_id;
    r.ts = ts0 + static_cast<std::int64_t>(i);
    r.score = scores[i];
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

scorescope::TabularDataset normal_features(Rng& rng, std::size_t n) {
  scorescope::TabularDataset ds;
  ds.feature_names = {"x0", "x1"};
  ds.features = scorescope::FeatureMatrix(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    ds.features(i, 0) = rng.normal();
    ds.features(i, 1) = rng.normal();
  }
  return ds;
}

}  // namespace

scorescope::TabularDataset independent_availability(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  auto ds = normal_features(rng, n);
  ds.target.resize(n);
  for (auto& t : ds.target) t = rng.uniform() < 0.5 ? 1 : 0;
  return ds;
}

scorescope::TabularDataset median_split_availability(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  auto ds = normal_features(rng, n);
  std::vector<double> col(n);
  for (std::size_t i = 0; i < n; ++i) col[i] = ds.features(i, 1);
  auto sorted = col;
  std::nth_element(sorted.begin(), sorted.begin() + n / 2, sorted.end());
  const double median = sorted[n / 2];
  ds.target.resize(n);
  for (std::size_t i = 0; i < n; ++i) ds.target[i] = col[i] > median ? 1 : 0;
  return ds;
}

scorescope::TabularDataset separable(std::uint64_t seed, std::size_t n, double margin) {
  Rng rng(seed);
  scorescope::TabularDataset ds;
  ds.feature_names = {"x0", "x1"};
  ds.features = scorescope::FeatureMatrix(n, 2);
  ds.target.resize(n);
  const double half = margin / std::sqrt(2.0);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(i % 2);
    // Distance from the line x0 + x1 = 0 is (x0 + x1) / sqrt(2).
    const double along = 4.0 * rng.uniform() - 2.0;
    const double across = half + 2.0 * rng.uniform();
    const double d = (y == 1 ? across : -across) * std::sqrt(2.0);
    ds.features(i, 0) = 0.5 * d + along;
    ds.features(i, 1) = 0.5 * d - along;
    ds.target[i] = y;
  }
  return ds;
}

scorescope::TabularDataset noise_labels(std::uint64_t seed, std::size_t n) {
  Rng rng(seed);
  auto ds = normal_features(rng, n);
  ds.target.resize(n);
  for (std::size_t i = 0; i < n; ++i) ds.target[i] = static_cast<int>(i % 2);
  rng.shuffle(std::span<int>(ds.target));
  return ds;
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  std::ostringstream name;
  name << "scorescope-" << tag << "-" << ::getpid() << "-" << counter++;
  path_ = std::filesystem::temp_directory_path() / name.str();
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::filesystem::path TempDir::write(const std::string& name,
                                     const std::string& content) const {
  const auto p = path_ / name;
  std::ofstream out(p, std::ios::binary);
  out << content;
  return p;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string score_log_text(const std::vector<scorescope::ScoreRecord>& records) {
  std::ostringstream os;
  scorescope::write_score_log(os, records);
  return os.str();
}

}  // namespace fixtures
