#include "scorescope/monitor.hpp"

#include "scorescope/error.hpp"

namespace scorescope {

std::string_view to_string(AlertKind kind) {
  switch (kind) {
    case AlertKind::kPatternChange: return "PATTERN_CHANGE";
    case AlertKind::kDrift: return "DRIFT";
    case AlertKind::kPathology: return "PATHOLOGY";
  }
  return "PATHOLOGY";
}

void MonitorConfig::validate() const {
  rdc.validate();
  if (window_size < rdc.min_samples) {
    throw PreconditionError("window_size must be >= min_samples (" +
                            std::to_string(rdc.min_samples) + ")");
  }
  if (!(tv_threshold >= 0.0 && tv_threshold <= 1.0)) {
    throw PreconditionError("tv_threshold must lie in [0, 1]");
  }
  if (reference && reference->bin_count() != rdc.bins) {
    throw PreconditionError("reference RDC bin count differs from the configured bins");
  }
}

WindowedMonitor::WindowedMonitor(MonitorConfig config) : config_(std::move(config)) {
  config_.validate();
}

WindowResult WindowedMonitor::close_window(const std::string& model, State& state,
                                           bool partial) {
  WindowResult w;
  w.model_id = model;
  w.window_index = state.next_index++;
  w.size = static_cast<std::size_t>(state.acc.size());
  w.partial = partial;
  w.rdc = state.acc.rdc();
  w.diagnosis = diagnose(w.rdc, config_.rdc);
  state.acc.reset();
  return w;
}

std::optional<WindowResult> WindowedMonitor::push(const ScoreRecord& record) {
  auto it = states_.find(record.model_id);
  if (it == states_.end()) {
    it = states_.emplace(record.model_id, State{RdcAccumulator(config_.rdc.bins), 0}).first;
  }
  it->second.acc.add(record.score);
  if (it->second.acc.size() == config_.window_size) {
    return close_window(it->first, it->second, false);
  }
  return std::nullopt;
}

std::vector<WindowResult> WindowedMonitor::finish() {
  std::vector<WindowResult> out;
  for (auto& [model, state] : states_) {
    const auto remaining = static_cast<std::size_t>(state.acc.size());
    if (remaining == 0) continue;
    if (remaining >= config_.rdc.min_samples) {
      out.push_back(close_window(model, state, true));
    } else {
      dropped_[model] += remaining;
      state.acc.reset();
    }
  }
  return out;
}

WindowedSummary windowed_rdcs(std::span<const ScoreRecord> records,
                              const MonitorConfig& config) {
  WindowedMonitor monitor(config);
  WindowedSummary summary;
  for (const auto& r : records) {
    if (auto w = monitor.push(r)) summary.windows.push_back(std::move(*w));
  }
  for (auto& w : monitor.finish()) summary.windows.push_back(std::move(w));
  summary.dropped = monitor.dropped();
  return summary;
}

std::vector<AlertEvent> check_drift(const Rdc& current, const Rdc& reference,
                                    const MonitorConfig& config) {
  const double distance = rdc_distance(current, reference);
  std::optional<Pattern> now;
  std::optional<Pattern> before;
  if (current.n >= config.rdc.min_samples) now = diagnose(current, config.rdc).pattern;
  if (reference.n >= config.rdc.min_samples) {
    before = diagnose(reference, config.rdc).pattern;
  }

  std::vector<AlertEvent> alerts;
  if (now && before && *now != *before) {
    AlertEvent e;
    e.kind = AlertKind::kPatternChange;
    e.prior = before;
    e.current = now;
    alerts.push_back(e);
  }
  if (distance > config.tv_threshold) {
    AlertEvent e;
    e.kind = AlertKind::kDrift;
    e.distance = distance;
    alerts.push_back(e);
  }
  if (now && *now != Pattern::kHealthyBimodal) {
    AlertEvent e;
    e.kind = AlertKind::kPathology;
    e.current = now;
    alerts.push_back(e);
  }
  return alerts;
}

std::vector<AlertEvent> DriftWatcher::observe(const WindowResult& window) {
  std::vector<AlertEvent> alerts;
  const Rdc* reference = config_.reference ? &*config_.reference : nullptr;
  const auto prev = previous_.find(window.model_id);
  if (!reference && prev != previous_.end()) reference = &prev->second;

  if (reference) {
    alerts = check_drift(window.rdc, *reference, config_);
  } else if (window.diagnosis.pattern != Pattern::kHealthyBimodal) {
    AlertEvent e;
    e.kind = AlertKind::kPathology;
    e.current = window.diagnosis.pattern;
    alerts.push_back(e);
  }
  for (auto& a : alerts) {
    a.model_id = window.model_id;
    a.window_index = window.window_index;
  }
  previous_.insert_or_assign(window.model_id, window.rdc);
  return alerts;
}

bool OverrideRule::matches(const ScoreRecord& record) const {
  if (model_id && record.model_id != *model_id) return false;
  if (entity_id && record.entity_id != *entity_id) return false;
  return model_id.has_value() || entity_id.has_value();
}

void OverrideRule::validate() const {
  if (!model_id && !entity_id) {
    throw PreconditionError("override rule needs a model_id and/or entity_id to match");
  }
  if (!(forced_score >= 0.0 && forced_score <= 1.0)) {
    throw PreconditionError("override forced_score must lie in [0, 1]");
  }
}

bool apply_overrides(ScoreRecord& record, std::span<const OverrideRule> rules) {
  for (const auto& rule : rules) {
    if (rule.matches(record)) {
      record.score = rule.forced_score;
      return true;
    }
  }
  return false;
}

OverrideResult apply_overrides(std::span<const ScoreRecord> records,
                               std::span<const OverrideRule> rules) {
  for (const auto& rule : rules) rule.validate();
  OverrideResult out;
  out.records.assign(records.begin(), records.end());
  for (auto& r : out.records) {
    out.overridden += static_cast<std::size_t>(apply_overrides(r, rules));
  }
  return out;
}

}  // namespace scorescope
