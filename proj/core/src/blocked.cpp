#include "scorescope/blocked.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include "csv.hpp"
#include "scorescope/error.hpp"
#include "scorescope/random.hpp"
#include "scorescope/stats.hpp"

namespace scorescope {

std::string_view to_string(Variant variant) {
  switch (variant) {
    case Variant::kBase: return "base";
    case Variant::kV1: return "v1";
    case Variant::kV2: return "v2";
  }
  return "base";
}

std::optional<Variant> variant_from_string(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "base") return Variant::kBase;
  if (lower == "v1") return Variant::kV1;
  if (lower == "v2") return Variant::kV2;
  return std::nullopt;
}

void BlockedDesign::validate() const {
  double sum = 0.0;
  for (double p : allocation) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw PreconditionError("allocation proportions must be non-negative");
    }
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-12) {
    throw PreconditionError("allocation proportions must sum to 1");
  }
}

std::array<double, 3> variant_rates(const BlockedSimConfig& config) {
  const double base = config.base_cvr;
  const double v1 = base + config.latency_penalty;
  const double v2 = v1 + config.feature_effect;
  return {base, v1, v2};
}

std::vector<BlockedOutcome> simulate_blocked(const BlockedSimConfig& config) {
  config.design.validate();
  const auto rates = variant_rates(config);
  for (double r : rates) {
    if (!(r >= 0.0 && r <= 1.0)) {
      throw PreconditionError("per-variant conversion rate outside [0, 1]");
    }
  }
  const auto& a = config.design.allocation;
  const double cut_base = a[0];
  const double cut_v1 = a[0] + a[1];

  Rng rng(config.seed);
  std::vector<BlockedOutcome> out;
  out.reserve(config.n_users);
  for (std::size_t u = 0; u < config.n_users; ++u) {
    const double pick = rng.uniform();
    const double convert = rng.uniform();
    Variant v = Variant::kV2;
    if (pick < cut_base) {
      v = Variant::kBase;
    } else if (pick < cut_v1) {
      v = Variant::kV1;
    } else if (a[2] == 0.0) {
      // Rounding in the cumulative sum must not leak users into an empty arm.
      v = a[1] > 0.0 ? Variant::kV1 : Variant::kBase;
    }
    out.push_back({v, convert < rates[static_cast<std::size_t>(v)]});
  }
  return out;
}

namespace {

Contrast contrast(const BlockedAnalysis& a, Variant from, Variant to) {
  const auto i = static_cast<std::size_t>(from);
  const auto j = static_cast<std::size_t>(to);
  const auto ci = stats::difference_interval(a.conversions[i], a.users[i],
                                             a.conversions[j], a.users[j],
                                             a.confidence);
  Contrast c;
  c.estimate = a.rates[j] - a.rates[i];
  c.ci_low = ci.low;
  c.ci_high = ci.high;
  c.std_error = ci.std_error;
  c.degenerate = ci.std_error == 0.0;
  return c;
}

}  // namespace

BlockedAnalysis analyze_blocked(std::span<const BlockedOutcome> outcomes,
                                double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw PreconditionError("confidence must lie in (0, 1)");
  }
  BlockedAnalysis a;
  a.confidence = confidence;
  for (const auto& o : outcomes) {
    const auto v = static_cast<std::size_t>(o.variant);
    ++a.users[v];
    a.conversions[v] += static_cast<std::size_t>(o.converted);
  }
  for (std::size_t v = 0; v < 3; ++v) {
    if (a.users[v] == 0) {
      throw PreconditionError(std::string("variant ") +
                              std::string(to_string(static_cast<Variant>(v))) +
                              " has no users");
    }
    a.rates[v] = static_cast<double>(a.conversions[v]) / static_cast<double>(a.users[v]);
  }
  a.perf_effect = contrast(a, Variant::kBase, Variant::kV1);
  a.feature_effect = contrast(a, Variant::kV1, Variant::kV2);
  a.total_effect = contrast(a, Variant::kBase, Variant::kV2);
  // The point estimate is defined as the sum so the decomposition is exact.
  a.total_effect.estimate = a.perf_effect.estimate + a.feature_effect.estimate;
  a.total_effect.ci_low = std::min(a.total_effect.ci_low, a.total_effect.estimate);
  a.total_effect.ci_high = std::max(a.total_effect.ci_high, a.total_effect.estimate);
  return a;
}

std::vector<BlockedOutcome> parse_blocked_outcomes(std::istream& in,
                                                   std::string_view source) {
  std::string line;
  std::size_t line_no = 0;
  if (!csv::next_line(in, line, line_no)) {
    throw InputError(std::string(source) + ": missing CSV header");
  }
  const auto header = csv::split_line(line);
  const auto variant_col = csv::column_index(header, "variant");
  const auto converted_col = csv::column_index(header, "converted");
  if (!variant_col || !converted_col) {
    throw InputError(std::string(source) + ": header must contain variant,converted");
  }
  std::vector<BlockedOutcome> out;
  while (csv::next_line(in, line, line_no)) {
    const auto cells = csv::split_line(line);
    const auto where = std::string(source) + ":" + std::to_string(line_no);
    if (cells.size() != header.size()) {
      throw InputError(where + ": wrong number of fields");
    }
    const auto v = variant_from_string(cells[*variant_col]);
    if (!v) throw InputError(where + ": unknown variant '" + cells[*variant_col] + "'");
    const auto c = csv::parse_double(cells[*converted_col]);
    if (!c || (*c != 0.0 && *c != 1.0)) {
      throw InputError(where + ": converted must be 0 or 1");
    }
    out.push_back({*v, *c == 1.0});
  }
  return out;
}

std::vector<BlockedOutcome> read_blocked_outcomes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return parse_blocked_outcomes(in, path.string());
}

void write_blocked_outcomes(std::ostream& out, std::span<const BlockedOutcome> outcomes) {
  out << "variant,converted\n";
  for (const auto& o : outcomes) {
    out << to_string(o.variant) << ',' << (o.converted ? 1 : 0) << '\n';
  }
}

}  // namespace scorescope
