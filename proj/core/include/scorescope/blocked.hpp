#pragma once

// Three-variant blocked experiment: BASE runs as today, V1 computes the new
// model but shows nothing new, V2 computes and shows it. V1 - BASE isolates
// the cost of the extra computation (slowdown); V2 - V1 isolates the value
// of the change itself.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace scorescope {

enum class Variant { kBase = 0, kV1 = 1, kV2 = 2 };

std::string_view to_string(Variant variant);
std::optional<Variant> variant_from_string(std::string_view name);

struct BlockedDesign {
  std::array<double, 3> allocation{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};

  /// Non-negative proportions summing to 1 within 1e-12.
  void validate() const;
};

struct BlockedOutcome {
  Variant variant = Variant::kBase;
  bool converted = false;

  bool operator==(const BlockedOutcome&) const = default;
};

struct BlockedSimConfig {
  std::size_t n_users = 0;
  double base_cvr = 0.0;
  double latency_penalty = 0.0;  // added to V1 and V2
  double feature_effect = 0.0;   // added to V2 only
  BlockedDesign design;
  std::uint64_t seed = 0;
};

/// Per-variant conversion rates implied by the configuration.
std::array<double, 3> variant_rates(const BlockedSimConfig& config);

/// Multinomial assignment by design, Bernoulli conversion per variant rate.
/// Each user consumes exactly two uniforms.
std::vector<BlockedOutcome> simulate_blocked(const BlockedSimConfig& config);

struct Contrast {
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double std_error = 0.0;
  bool degenerate = false;  // zero standard error
};

struct BlockedAnalysis {
  std::array<std::size_t, 3> users{};
  std::array<std::size_t, 3> conversions{};
  std::array<double, 3> rates{};
  double confidence = 0.95;
  Contrast perf_effect;     // V1 - BASE
  Contrast feature_effect;  // V2 - V1
  Contrast total_effect;    // perf + feature; CI from V2 - BASE
};

/// Effects with unpooled normal-approximation intervals per contrast.
/// Every variant must have at least one user. Order-independent.
BlockedAnalysis analyze_blocked(std::span<const BlockedOutcome> outcomes,
                                double confidence = 0.95);

/// CSV with header `variant,converted`; variant in {base,v1,v2}.
std::vector<BlockedOutcome> read_blocked_outcomes(const std::filesystem::path& path);
std::vector<BlockedOutcome> parse_blocked_outcomes(std::istream& in,
                                                   std::string_view source = "<stream>");
void write_blocked_outcomes(std::ostream& out, std::span<const BlockedOutcome> outcomes);

}  // namespace scorescope
