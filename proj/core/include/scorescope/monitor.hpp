#pragma once

// Windowed RDC monitoring over a score stream, with drift and pathology
// alerts, plus output overrides for exercising downstream code paths.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scorescope/ingest.hpp"
#include "scorescope/rdc.hpp"

namespace scorescope {

struct MonitorConfig {
  std::size_t window_size = 1000;  // records per tumbling window, per model
  std::optional<Rdc> reference;    // compare every window with this
  double tv_threshold = 0.15;
  RdcConfig rdc;

  /// window_size must be >= rdc.min_samples (and >= 100 by default).
  void validate() const;
};

struct WindowResult {
  std::string model_id;
  std::size_t window_index = 0;  // per model, from 0
  std::size_t size = 0;
  bool partial = false;          // trailing window shorter than window_size
  Rdc rdc;
  RdcDiagnosis diagnosis;
};

enum class AlertKind { kPatternChange, kDrift, kPathology };

std::string_view to_string(AlertKind kind);

struct AlertEvent {
  std::string model_id;
  std::size_t window_index = 0;
  AlertKind kind = AlertKind::kPathology;
  std::optional<Pattern> prior;    // kPatternChange
  std::optional<Pattern> current;  // kPatternChange, kPathology
  std::optional<double> distance;  // kDrift
};

/// Single-pass windowing. Each model has its own tumbling window sequence.
class WindowedMonitor {
 public:
  explicit WindowedMonitor(MonitorConfig config);

  /// Adds one record; returns the window it completed, if any.
  std::optional<WindowResult> push(const ScoreRecord& record);

  /// Flushes trailing windows: those with >= min_samples records are emitted
  /// as partial, smaller remainders are counted as dropped. Models are
  /// flushed in lexicographic order of model_id.
  std::vector<WindowResult> finish();

  /// Records dropped per model at finish().
  const std::map<std::string, std::size_t>& dropped() const { return dropped_; }
  const MonitorConfig& config() const { return config_; }

 private:
  struct State {
    RdcAccumulator acc;
    std::size_t next_index = 0;
  };

  WindowResult close_window(const std::string& model, State& state, bool partial);

  MonitorConfig config_;
  std::map<std::string, State> states_;
  std::map<std::string, std::size_t> dropped_;
};

struct WindowedSummary {
  std::vector<WindowResult> windows;
  std::map<std::string, std::size_t> dropped;
};

/// Batch convenience over WindowedMonitor; windows in emission order.
WindowedSummary windowed_rdcs(std::span<const ScoreRecord> records,
                              const MonitorConfig& config);

/// Alerts for one window against a reference, ordered by kind:
/// PATTERN_CHANGE when the diagnoses differ, DRIFT when the total variation
/// distance is strictly above tv_threshold, PATHOLOGY when the current
/// pattern is anything but HEALTHY_BIMODAL. Pattern alerts are skipped for
/// an RDC with too few samples to diagnose.
std::vector<AlertEvent> check_drift(const Rdc& current, const Rdc& reference,
                                    const MonitorConfig& config);

/// Tracks alert state across windows. Uses config.reference when set,
/// otherwise the previous window of the same model.
class DriftWatcher {
 public:
  explicit DriftWatcher(MonitorConfig config) : config_(std::move(config)) {}

  std::vector<AlertEvent> observe(const WindowResult& window);

 private:
  MonitorConfig config_;
  std::map<std::string, Rdc> previous_;
};

struct OverrideRule {
  std::optional<std::string> model_id;
  std::optional<std::string> entity_id;
  double forced_score = 0.0;

  bool matches(const ScoreRecord& record) const;
  /// Needs at least one predicate and forced_score in [0, 1].
  void validate() const;
};

struct OverrideResult {
  std::vector<ScoreRecord> records;
  std::size_t overridden = 0;
};

/// First matching rule wins; other records pass through unchanged.
OverrideResult apply_overrides(std::span<const ScoreRecord> records,
                               std::span<const OverrideRule> rules);

/// In-place variant used by streaming callers; returns true if overridden.
bool apply_overrides(ScoreRecord& record, std::span<const OverrideRule> rules);

}  // namespace scorescope
