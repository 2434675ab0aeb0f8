#pragma once

// Response Distribution Charts: label-free health checks for binary scoring
// classifiers, computed from nothing but the scores a model serves.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scorescope/ingest.hpp"

namespace scorescope {

inline constexpr std::size_t kDefaultBins = 100;

/// Histogram of scores over equal-width bins partitioning [0, 1].
struct Rdc {
  std::vector<double> edges;            // bin_count + 1, edges[0]=0, back()=1
  std::vector<std::uint64_t> counts;    // bin_count
  std::uint64_t n = 0;                  // == sum(counts)

  std::size_t bin_count() const { return counts.size(); }
  double bin_center(std::size_t bin) const {
    return 0.5 * (edges[bin] + edges[bin + 1]);
  }
  /// counts / n.
  std::vector<double> frequencies() const;

  bool operator==(const Rdc&) const = default;
};

/// Single-writer histogram accumulator; build_rdc and the monitor both use it.
class RdcAccumulator {
 public:
  explicit RdcAccumulator(std::size_t bin_count = kDefaultBins);

  /// Throws PreconditionError for scores outside [0, 1].
  void add(double score);
  std::size_t bin_of(double score) const;
  std::uint64_t size() const { return rdc_.n; }
  const Rdc& rdc() const { return rdc_; }
  void reset();

 private:
  Rdc rdc_;
};

Rdc build_rdc(std::span<const double> scores, std::size_t bin_count = kDefaultBins);

/// log(1 + count) per bin. Makes a small class visible next to a dominant one.
std::vector<double> log_view(const Rdc& rdc);

struct SmoothedRdc {
  Rdc base;
  std::size_t window = 1;
  std::vector<double> heights;  // moving average of frequencies, sums to 1
  double roughness = 0.0;       // sum |frequency - height|, in [0, 2]
};

/// Centered moving average of the normalized frequencies. Near the edges the
/// window shrinks to the bins that exist; the averaged profile is then
/// renormalized to unit mass. `window` must be odd and <= bin_count.
SmoothedRdc smooth(const Rdc& rdc, std::size_t window);

struct Mode {
  std::size_t bin_index = 0;
  double location = 0.0;    // bin center
  double height = 0.0;      // smoothed height
  double prominence = 0.0;  // height above the higher of its two key saddles
  double mass = 0.0;        // smoothed mass of the mode's basin
};

struct Valley {
  std::size_t left_mode = 0;   // index into ModeSet::modes
  std::size_t right_mode = 0;
  std::size_t min_bin = 0;     // lowest bin strictly between the modes
  double lo = 0.0;             // valley floor: bins below half depth
  double hi = 0.0;
  double min_height = 0.0;
  double depth = 0.0;          // min(mode heights) - min_height
};

struct ModeSet {
  std::vector<Mode> modes;      // sorted by location
  std::vector<Valley> valleys;  // one per adjacent mode pair
};

/// Local maxima of the smoothed heights (plateaus collapse to their center
/// bin) whose topographic prominence is at least
/// `prominence_min * max(heights)`, with a valley between each adjacent pair.
ModeSet detect_modes(const SmoothedRdc& smoothed, double prominence_min);

/// Lowest point strictly between two mode bins, its half-depth floor interval
/// and depth. Bins are indices into `smoothed.heights`.
Valley valley_between(const SmoothedRdc& smoothed, const Mode& left,
                      const Mode& right);

/// Region between two modes where any threshold separates the classes.
/// Lowering the threshold towards `lower` trades precision for recall;
/// raising it towards `upper` does the opposite.
struct ThresholdBand {
  double lower = 0.0;
  double upper = 0.0;
  double recommended = 0.0;
};

/// Maximal run of bins around the valley minimum whose height stays within
/// (1 + band_epsilon) of the minimum. Requires exactly two modes.
ThresholdBand recommend_threshold(const SmoothedRdc& smoothed,
                                  const ModeSet& modes,
                                  double band_epsilon = 0.10);

enum class Pattern {
  kHealthyBimodal,
  kCentralUnimodal,
  kExtremeSpike,
  kNoisy,
  kIndeterminate,
};

std::string_view to_string(Pattern pattern);
std::optional<Pattern> pattern_from_string(std::string_view name);

/// Heuristic thresholds. None of these are derived from data; they are fixed
/// conventions and every report echoes them.
struct RdcConfig {
  std::size_t bins = kDefaultBins;
  std::size_t window = 5;
  double prominence_min = 0.10;        // fraction of the tallest height
  std::uint64_t min_samples = 100;
  double spike_share = 0.25;           // raw single-bin share for a spike
  double spike_second_mode_mass = 0.10;
  double roughness_max = 0.35;
  double central_lo = 0.2;
  double central_hi = 0.8;
  double valley_depth_floor = 0.2;     // fraction of the lower mode height
  double band_epsilon = 0.10;

  /// Throws PreconditionError on inconsistent values.
  void validate() const;
};

struct Evidence {
  double roughness = 0.0;
  double spike_share = 0.0;
  std::size_t spike_bin = 0;
  ModeSet modes;
  std::vector<std::size_t> primary_modes;  // the two modes used for bimodality
  std::vector<std::size_t> extra_modes;    // remaining modes, if > 2
  std::optional<Valley> valley;            // between the primary modes
  std::string rule;                        // which rule fired
};

struct RdcDiagnosis {
  Pattern pattern = Pattern::kIndeterminate;
  Evidence evidence;
  std::optional<ThresholdBand> threshold_band;  // iff kHealthyBimodal
};

/// Classifies an RDC. Rules, first match wins:
///   1. EXTREME_SPIKE: one raw bin holds >= spike_share of all scores and no
///      other mode carries >= spike_second_mode_mass.
///   2. NOISY: roughness > roughness_max.
///   3. HEALTHY_BIMODAL: >= 2 modes and the valley between the two most
///      massive is at least valley_depth_floor deep (relative).
///   4. CENTRAL_UNIMODAL: a single mode inside [central_lo, central_hi].
///   5. INDETERMINATE.
/// Throws PreconditionError when rdc.n < min_samples.
RdcDiagnosis diagnose(const Rdc& rdc, const RdcConfig& config = {});

/// One RDC per class label (one-vs-rest view of a multi-class model).
/// Throws InputError when a record has no class label.
std::map<std::string, Rdc> one_vs_rest(std::span<const ScoreRecord> records,
                                       std::size_t bin_count = kDefaultBins);

/// Total variation distance between the normalized histograms.
double rdc_distance(const Rdc& a, const Rdc& b);

}  // namespace scorescope
