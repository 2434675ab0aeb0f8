#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>
#include <type_traits>

#include "report.hpp"
#include "scorescope/error.hpp"
#include "scorescope/ingest.hpp"
#include "svg.hpp"

namespace scorescope::cli {

namespace {

namespace fs = std::filesystem;

// Threshold-like options that a --config file may also set. Precedence is
// defaults < config file < explicit flags.
class Knobs {
 public:
  template <class T>
  CLI::Option* add(CLI::App* app, const std::string& section, const std::string& key,
                   const std::string& flag, T& target, const std::string& help) {
    auto* opt = app->add_option(flag, target, help)->capture_default_str();
    const std::string name = section + "." + key;
    knobs_.push_back({app, section, key, opt, [&target, name](const Json& j) {
                        assign(target, j, name);
                      }});
    return opt;
  }

  void apply(const Json& config, const CLI::App* active) const {
    if (!config.is_object()) throw InputError("config: top level must be an object");
    for (const auto& [section, body] : config.items()) {
      if (!body.is_object()) {
        throw InputError("config: section '" + section + "' must be an object");
      }
      for (const auto& [key, value] : body.items()) {
        bool known = false;
        for (const auto& k : knobs_) {
          if (k.section != section || k.key != key) continue;
          known = true;
          if (k.app == active && k.option->count() == 0) k.assign(value);
        }
        if (!known) throw InputError("config: unknown key '" + section + "." + key + "'");
      }
    }
  }

 private:
  template <class T>
  static void assign(T& target, const Json& j, const std::string& name) {
    bool ok;
    if constexpr (std::is_same_v<T, bool>) {
      ok = j.is_boolean();
    } else if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T>) {
      ok = j.is_number_unsigned();
    } else if constexpr (std::is_integral_v<T>) {
      ok = j.is_number_integer();
    } else if constexpr (std::is_floating_point_v<T>) {
      ok = j.is_number();
    } else {
      ok = j.is_array();
    }
    if (!ok) throw InputError("config: '" + name + "' has the wrong type");
    try {
      target = j.get<T>();
    } catch (const nlohmann::json::exception&) {
      throw InputError("config: '" + name + "' has the wrong type");
    }
  }

  struct Knob {
    const CLI::App* app;
    std::string section;
    std::string key;
    CLI::Option* option;
    std::function<void(const Json&)> assign;
  };
  std::vector<Knob> knobs_;
};

struct Common {
  std::string output;
  std::string config;
  std::uint64_t seed = 0;
  bool strict = false;
};

void add_common(CLI::App* app, Common& c, const char* strict_help) {
  app->add_option("--output,-o", c.output, "Write the JSON report here instead of stdout");
  app->add_option("--config", c.config,
                  "JSON file overriding thresholds; explicit flags win over it");
  app->add_option("--seed", c.seed, "Seed for every random draw")->capture_default_str();
  if (strict_help) app->add_flag("--strict", c.strict, strict_help);
}

void load_config(const Common& c, const Knobs& knobs, const CLI::App* app, Report& rep) {
  if (c.config.empty()) return;
  std::ifstream in(c.config);
  if (!in) throw InputError("cannot open config '" + c.config + "'");
  Json cfg;
  try {
    cfg = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("config '" + c.config + "': " + e.what());
  }
  knobs.apply(cfg, app);
  rep.add_input(c.config);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw InputError("write to '" + path.string() + "' failed");
}

void emit(const Report& rep, const Common& c, std::ostream& out) {
  const std::string text = rep.to_json().dump(2) + "\n";
  if (c.output.empty()) {
    out << text;
  } else {
    write_text(c.output, text);
  }
}

std::vector<OverrideRule> load_overrides(const std::string& path, Report& rep) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open overrides '" + path + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("overrides '" + path + "': " + e.what());
  }
  if (!doc.is_array()) throw InputError("overrides '" + path + "': expected an array");
  std::vector<OverrideRule> rules;
  for (const auto& item : doc) {
    if (!item.is_object()) throw InputError("overrides: each rule must be an object");
    OverrideRule rule;
    for (const auto& [key, value] : item.items()) {
      if (key == "model_id" && value.is_string()) {
        rule.model_id = value.get<std::string>();
      } else if (key == "entity_id" && value.is_string()) {
        rule.entity_id = value.get<std::string>();
      } else if (key == "forced_score" && value.is_number()) {
        rule.forced_score = value.get<double>();
      } else {
        throw InputError("overrides: unexpected field '" + key + "'");
      }
    }
    if (!item.contains("forced_score")) throw InputError("overrides: forced_score missing");
    rule.validate();
    rules.push_back(rule);
  }
  rep.add_input(path);
  return rules;
}

void add_rdc_knobs(CLI::App* app, Knobs& k, RdcConfig& r) {
  k.add(app, "rdc", "bins", "--bins", r.bins, "Histogram bins over [0, 1]");
  k.add(app, "rdc", "window", "--window", r.window, "Smoothing window (odd)");
  k.add(app, "rdc", "prominence_min", "--prominence-min", r.prominence_min,
        "Minimum mode prominence, fraction of the tallest height");
  k.add(app, "rdc", "min_samples", "--min-samples", r.min_samples,
        "Fewest scores a chart needs before it is diagnosed");
  k.add(app, "rdc", "spike_share", "--spike-share", r.spike_share,
        "Single-bin share that counts as an extreme spike");
  k.add(app, "rdc", "spike_second_mode_mass", "--spike-second-mass",
        r.spike_second_mode_mass, "Mode mass that vetoes the spike verdict");
  k.add(app, "rdc", "roughness_max", "--roughness-max", r.roughness_max,
        "Roughness above which a chart is noisy");
  k.add(app, "rdc", "central_lo", "--central-lo", r.central_lo, "Central region start");
  k.add(app, "rdc", "central_hi", "--central-hi", r.central_hi, "Central region end");
  k.add(app, "rdc", "valley_depth_floor", "--valley-depth-floor", r.valley_depth_floor,
        "Valley depth needed for bimodality, fraction of the lower mode");
  k.add(app, "rdc", "band_epsilon", "--band-epsilon", r.band_epsilon,
        "Threshold band tolerance above the valley minimum");
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (char ch : s) {
    const bool safe = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                      (ch >= '0' && ch <= '9') || ch == '-' || ch == '_';
    out += safe ? ch : '_';
  }
  return out;
}

fs::path chart_path(const fs::path& base, const std::string& label, std::size_t charts) {
  if (charts == 1) return base;
  return base.parent_path() /
         (base.stem().string() + "." + sanitize(label) + base.extension().string());
}

// ---------------------------------------------------------------- rdc

struct RdcArgs {
  std::string input;
  std::string model;
  bool by_class = false;
  bool rescale = false;
  std::string overrides;
  std::string svg;
  double max_malformed = 0.10;
  RdcConfig rdc;
};

int cmd_rdc(const RdcArgs& a, const Common& c, Report& rep, std::ostream& out) {
  a.rdc.validate();
  const auto log = read_score_log(a.input, {a.rescale, a.max_malformed});
  rep.add_input(a.input);

  std::vector<ScoreRecord> records = log.records;
  std::size_t overridden = 0;
  if (!a.overrides.empty()) {
    const auto rules = load_overrides(a.overrides, rep);
    auto res = apply_overrides(records, rules);
    records = std::move(res.records);
    overridden = res.overridden;
  }

  std::map<std::string, std::vector<ScoreRecord>> by_model;
  for (const auto& r : records) {
    if (!a.model.empty() && r.model_id != a.model) continue;
    by_model[r.model_id].push_back(r);
  }
  if (by_model.empty()) {
    throw InputError(a.model.empty() ? "no score records in '" + a.input + "'"
                                     : "no records for model '" + a.model + "'");
  }

  struct Chart {
    std::string model;
    std::optional<std::string> cls;
    Rdc rdc;
  };
  std::vector<Chart> charts;
  for (const auto& [model, recs] : by_model) {
    if (a.by_class) {
      for (auto& [cls, rdc] : one_vs_rest(recs, a.rdc.bins)) {
        charts.push_back({model, cls, std::move(rdc)});
      }
    } else {
      std::vector<double> scores;
      scores.reserve(recs.size());
      for (const auto& r : recs) scores.push_back(r.score);
      charts.push_back({model, std::nullopt, build_rdc(scores, a.rdc.bins)});
    }
  }

  Json entries = Json::array();
  std::size_t diagnosed = 0;
  bool pathology = false;
  for (const auto& ch : charts) {
    const std::string label = ch.cls ? ch.model + "-" + *ch.cls : ch.model;
    Json e;
    e["model_id"] = ch.model;
    if (ch.cls) e["class"] = *ch.cls;
    e["rdc"] = to_json(ch.rdc);
    e["log_view"] = log_view(ch.rdc);
    std::optional<RdcDiagnosis> diag;
    if (ch.rdc.n >= a.rdc.min_samples) {
      diag = diagnose(ch.rdc, a.rdc);
      ++diagnosed;
      pathology = pathology || diag->pattern != Pattern::kHealthyBimodal;
      e["diagnosis"] = to_json(*diag);
    } else {
      e["diagnosis"] = nullptr;
      e["note"] = "fewer than min_samples scores; not diagnosed";
    }
    if (!a.svg.empty()) {
      const auto path = chart_path(a.svg, label, charts.size());
      write_text(path, rdc_svg(ch.rdc, diag ? &*diag : nullptr, label));
      e["svg"] = path.string();
    }
    entries.push_back(std::move(e));
  }
  if (diagnosed == 0) {
    throw PreconditionError("every chart has fewer than " +
                            std::to_string(a.rdc.min_samples) + " scores");
  }

  rep.results["records"] = records.size();
  rep.results["skipped_lines"] = log.skipped;
  rep.results["overridden"] = overridden;
  rep.results["charts"] = std::move(entries);
  rep.decisions["rdc"] = to_json(a.rdc);
  rep.decisions["rescale"] = a.rescale;
  rep.decisions["max_malformed_fraction"] = a.max_malformed;
  emit(rep, c, out);
  return c.strict && pathology ? kExitStrict : kExitOk;
}

// ---------------------------------------------------------------- bias / setup

struct BiasArgs {
  std::string input;
  std::string label_column = "has_label";
  std::vector<std::string> drop;
  bool impute = false;
  BiasConfig bias;
};

int cmd_bias(BiasArgs a, const Common& c, Report& rep, std::ostream& out) {
  a.bias.seed = c.seed;
  TabularOptions opts;
  opts.impute = a.impute;
  opts.drop_columns = a.drop;
  const auto ds = read_tabular(a.input, a.label_column, opts);
  rep.add_input(a.input);

  const auto report = bias_severity(ds.features, ds.target, a.bias);
  rep.results["rows"] = ds.target.size();
  rep.results["features"] = ds.feature_names;
  rep.results["bias"] = to_json(report);
  rep.decisions["bias"] = to_json(a.bias);
  rep.decisions["label_column"] = a.label_column;
  rep.decisions["impute"] = a.impute;
  emit(rep, c, out);
  return c.strict && report.severity != Severity::kNone ? kExitStrict : kExitOk;
}

struct SetupArgs {
  std::string input;
  std::string target = "target";
  std::vector<std::string> drop;
  bool impute = false;
  CvConfig cv;
  BiasConfig bias;
};

int cmd_setup(SetupArgs a, const Common& c, Report& rep, std::ostream& out) {
  a.cv.seed = c.seed;
  a.bias.seed = c.seed;
  a.bias.logistic = a.cv.logistic;
  TabularOptions opts;
  opts.impute = a.impute;
  opts.allow_missing_target = true;
  opts.drop_columns = a.drop;
  const auto ds = read_tabular(a.input, a.target, opts);
  rep.add_input(a.input);

  const auto score = score_construction(ds, a.cv, a.bias);
  rep.results["rows"] = ds.target.size();
  rep.results["features"] = ds.feature_names;
  rep.results["n_unlabeled"] = score.n_unlabeled;
  rep.results["balance"] = to_json(score.balance);
  rep.results["learnability"] =
      score.learnability ? to_json(*score.learnability) : Json(nullptr);
  rep.results["bias"] = score.bias ? to_json(*score.bias) : Json(nullptr);
  rep.decisions["learnability"] = to_json(a.cv);
  rep.decisions["bias"] = to_json(a.bias);
  rep.decisions["target"] = a.target;
  rep.decisions["unlabeled_rows"] = "rows with an empty target cell";
  rep.decisions["popularity_baseline"] = "majority-class constant predictor";
  emit(rep, c, out);

  const bool finding = score.balance.warning.has_value() ||
                       (score.bias && score.bias->severity != Severity::kNone);
  return c.strict && finding ? kExitStrict : kExitOk;
}

// ---------------------------------------------------------------- experiments

const char* kAlleviatingFactors[] = {
    "larger output spaces make disagreement more likely",
    "the observation space may be restricted to where the models differ",
    "per-prediction impact may be large enough to compensate for dilution",
};

Json test_decisions(double alpha, double power) {
  return {{"alpha", alpha},
          {"power", power},
          {"test", "two-sided two-proportion z-test, pooled variance"},
          {"sizing", "normal approximation"}};
}

struct DisagreeArgs {
  std::string input;
  double threshold = 0.5;
  std::optional<double> p_control;
  std::optional<double> mde;
  double alpha = 0.05;
  double power = 0.8;
};

int cmd_disagree(const DisagreeArgs& a, const Common& c, Report& rep, std::ostream& out) {
  const auto pairs = read_paired(a.input);
  rep.add_input(a.input);
  const auto report = disagreement(pairs, a.threshold);

  rep.results["disagreement"] = to_json(report);
  if (report.accuracy_a && report.accuracy_b) {
    rep.results["max_disagreement_bound"] =
        max_disagreement(*report.accuracy_a, *report.accuracy_b);
  }
  if (report.n_disagree == 0) {
    rep.results["note"] =
        "no testable difference: the models never disagree, so no user would enter "
        "the experiment";
  }
  if (a.p_control.has_value() != a.mde.has_value()) {
    throw PreconditionError("--p-control and --mde must be given together");
  }
  if (a.p_control && report.rate > 0.0) {
    rep.results["power"] =
        to_json(required_sample_size(*a.p_control, *a.mde, a.alpha, a.power, report.rate));
  }
  rep.results["alleviating_factors"] = kAlleviatingFactors;
  rep.decisions["threshold"] = a.threshold;
  rep.decisions["binarisation"] = "prediction is positive when score >= threshold";
  if (a.p_control) rep.decisions["power"] = test_decisions(a.alpha, a.power);
  emit(rep, c, out);
  return c.strict && report.n_disagree == 0 ? kExitStrict : kExitOk;
}

struct PowerArgs {
  double p_control = 0.0;
  double mde = 0.0;
  double alpha = 0.05;
  double power = 0.8;
  double disagreement = 1.0;
};

int cmd_power(const PowerArgs& a, const Common& c, Report& rep, std::ostream& out) {
  const auto r = required_sample_size(a.p_control, a.mde, a.alpha, a.power, a.disagreement);
  rep.results["power"] = to_json(r);
  rep.results["approximate_power_at_n"] =
      approximate_power(r.p_control, r.p_treatment, r.n_per_arm, r.alpha);
  rep.decisions["power"] = test_decisions(a.alpha, a.power);
  rep.decisions["traffic"] = "total = ceil(2 * n_per_arm / disagreement_rate)";
  emit(rep, c, out);
  return kExitOk;
}

struct CurveArgs {
  double baseline = 0.0;
  std::string grid;
  std::string svg;
};

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw PreconditionError("--grid expects lo:hi:step, got '" + text + "'");
    }
  }
  if (parts.size() != 3) throw PreconditionError("--grid expects lo:hi:step, got '" + text + "'");
  return accuracy_grid(parts[0], parts[1], parts[2]);
}

int cmd_curve(const CurveArgs& a, const Common& c, Report& rep, std::ostream& out) {
  const auto grid = a.grid.empty() ? accuracy_grid(a.baseline, 1.0, 0.01) : parse_grid(a.grid);
  const auto curve = impacted_traffic_curve(a.baseline, grid);
  Json series = Json::array();
  for (const auto& p : curve) {
    series.push_back({{"accuracy", p.accuracy}, {"upper_bound", p.upper_bound}});
  }
  rep.results["baseline_accuracy"] = a.baseline;
  rep.results["series"] = std::move(series);
  rep.results["alleviating_factors"] = kAlleviatingFactors;
  if (!a.svg.empty()) {
    write_text(a.svg, curve_svg(a.baseline, curve));
    rep.results["svg"] = a.svg;
  }
  rep.decisions["bound"] = "min(1 - a, b) + min(1 - b, a), balanced binary problem";
  rep.decisions["grid"] = a.grid.empty() ? "baseline:1:0.01" : a.grid;
  emit(rep, c, out);
  return kExitOk;
}

// ---------------------------------------------------------------- blocked

Json blocked_decisions(const BlockedDesign& d, double confidence) {
  return {{"allocation", d.allocation},
          {"confidence", confidence},
          {"interval", "unpooled normal approximation per contrast"},
          {"total_effect", "perf_effect + feature_effect; interval from v2 vs base"}};
}

struct BlockedSimArgs {
  std::size_t users = 100000;
  double base_cvr = 0.10;
  double latency_penalty = 0.0;
  double feature_effect = 0.0;
  std::vector<double> allocation{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  std::string outcomes;
  double confidence = 0.95;
};

int cmd_blocked_simulate(const BlockedSimArgs& a, const Common& c, Report& rep,
                         std::ostream& out) {
  if (a.allocation.size() != 3) throw PreconditionError("--allocation needs three values");
  BlockedSimConfig cfg;
  cfg.n_users = a.users;
  cfg.base_cvr = a.base_cvr;
  cfg.latency_penalty = a.latency_penalty;
  cfg.feature_effect = a.feature_effect;
  std::copy(a.allocation.begin(), a.allocation.end(), cfg.design.allocation.begin());
  cfg.seed = c.seed;

  const auto outcomes = simulate_blocked(cfg);
  if (!a.outcomes.empty()) {
    std::ostringstream os;
    write_blocked_outcomes(os, outcomes);
    write_text(a.outcomes, os.str());
    rep.results["outcomes"] = a.outcomes;
  }
  const auto rates = variant_rates(cfg);
  rep.results["true_rates"] = {{"base", rates[0]}, {"v1", rates[1]}, {"v2", rates[2]}};
  rep.results["users"] = a.users;
  rep.results["analysis"] = to_json(analyze_blocked(outcomes, a.confidence));
  rep.decisions["design"] = blocked_decisions(cfg.design, a.confidence);
  rep.decisions["latency_model"] = "additive conversion-rate penalty on v1 and v2";
  rep.decisions["seed"] = c.seed;
  emit(rep, c, out);
  return kExitOk;
}

struct BlockedAnalyzeArgs {
  std::string input;
  double confidence = 0.95;
};

int cmd_blocked_analyze(const BlockedAnalyzeArgs& a, const Common& c, Report& rep,
                        std::ostream& out) {
  const auto outcomes = read_blocked_outcomes(a.input);
  rep.add_input(a.input);
  rep.results["analysis"] = to_json(analyze_blocked(outcomes, a.confidence));
  rep.decisions["confidence"] = a.confidence;
  rep.decisions["interval"] = "unpooled normal approximation per contrast";
  emit(rep, c, out);
  return kExitOk;
}

// ---------------------------------------------------------------- watch

struct WatchArgs {
  std::string input;
  std::string reference;
  std::string alerts;
  std::string overrides;
  bool follow = false;
  int poll_interval_ms = 500;
  double idle_timeout_s = 10.0;
  double max_malformed = 0.10;
  MonitorConfig monitor;
};

int cmd_watch(WatchArgs a, const Common& c, Report& rep, std::ostream& out) {
  if (a.poll_interval_ms <= 0) throw PreconditionError("--poll-interval must be positive");
  if (a.reference.size()) {
    const auto ref = read_score_log(a.reference, {false, a.max_malformed});
    rep.add_input(a.reference);
    std::vector<double> scores;
    for (const auto& r : ref.records) scores.push_back(r.score);
    if (scores.empty()) throw InputError("reference '" + a.reference + "' has no records");
    a.monitor.reference = build_rdc(scores, a.monitor.rdc.bins);
  }
  std::vector<OverrideRule> rules;
  if (!a.overrides.empty()) rules = load_overrides(a.overrides, rep);

  WindowedMonitor monitor(a.monitor);
  DriftWatcher watcher(a.monitor);

  std::ifstream in(a.input, std::ios::binary);
  if (!in) throw InputError("cannot open '" + a.input + "'");
  std::ofstream alert_out;
  if (!a.alerts.empty()) {
    alert_out.open(a.alerts, std::ios::binary);
    if (!alert_out) throw InputError("cannot write '" + a.alerts + "'");
  }

  Json windows = Json::array();
  Json alerts = Json::array();
  std::size_t line_no = 0, lines = 0, skipped = 0, records = 0, overridden = 0;

  auto on_window = [&](const WindowResult& w) {
    windows.push_back({{"model_id", w.model_id},
                       {"window_index", w.window_index},
                       {"size", w.size},
                       {"partial", w.partial},
                       {"pattern", std::string(to_string(w.diagnosis.pattern))},
                       {"rule", w.diagnosis.evidence.rule}});
    for (const auto& alert : watcher.observe(w)) {
      auto j = to_json(alert);
      if (alert_out.is_open()) alert_out << j.dump() << '\n' << std::flush;
      alerts.push_back(std::move(j));
    }
  };
  auto on_line = [&](std::string_view line) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto parsed = parse_score_line(line);
    if (parsed.status == LineStatus::kBlank) return;
    ++lines;
    if (parsed.status == LineStatus::kMalformed) {
      ++skipped;
      return;
    }
    ScoreRecord rec = parsed.record;
    validate_score_range(rec, line_no);
    if (!rules.empty()) overridden += static_cast<std::size_t>(apply_overrides(rec, rules));
    ++records;
    if (auto w = monitor.push(rec)) on_window(*w);
  };

  // Complete lines are processed as they arrive; in follow mode the reader
  // waits for more data until the file has been idle for idle_timeout_s.
  std::string pending;
  std::vector<char> buf(1 << 16);
  const auto poll = std::chrono::milliseconds(a.poll_interval_ms);
  auto idle = std::chrono::milliseconds(0);
  const auto idle_limit = std::chrono::milliseconds(
      static_cast<long long>(a.idle_timeout_s * 1000.0));
  for (;;) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got > 0) {
      pending.append(buf.data(), got);
      std::size_t start = 0;
      for (std::size_t nl; (nl = pending.find('\n', start)) != std::string::npos;
           start = nl + 1) {
        on_line(std::string_view(pending).substr(start, nl - start));
      }
      pending.erase(0, start);
      idle = std::chrono::milliseconds(0);
    }
    if (got == buf.size()) continue;
    if (!a.follow || idle >= idle_limit) break;
    in.clear();
    std::this_thread::sleep_for(poll);
    idle += poll;
  }
  if (!pending.empty()) on_line(pending);
  for (const auto& w : monitor.finish()) on_window(w);

  if (skipped > 1 &&
      static_cast<double>(skipped) > a.max_malformed * static_cast<double>(lines)) {
    throw InputError("'" + a.input + "': " + std::to_string(skipped) + " of " +
                     std::to_string(lines) + " lines malformed");
  }
  rep.add_input(a.input);

  Json dropped = Json::object();
  for (const auto& [model, n] : monitor.dropped()) dropped[model] = n;
  rep.results["records"] = records;
  rep.results["skipped_lines"] = skipped;
  rep.results["overridden"] = overridden;
  rep.results["windows"] = std::move(windows);
  rep.results["dropped"] = std::move(dropped);
  rep.results["alert_count"] = alerts.size();
  rep.results["alerts"] = alerts;
  rep.decisions["monitor"] = to_json(a.monitor);
  rep.decisions["rdc"] = to_json(a.monitor.rdc);
  rep.decisions["windows"] = "tumbling, by record count, per model";
  emit(rep, c, out);
  return c.strict && !alerts.empty() ? kExitStrict : kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"scorescope: label-free model diagnostics and experiment math", "scorescope"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  Knobs knobs;
  std::map<const CLI::App*, std::function<int(Report&)>> handlers;
  std::map<const CLI::App*, const Common*> commons;

  // Each command owns its argument block; they all outlive parsing.
  RdcArgs rdc_args;
  Common rdc_common;
  auto* rdc = app.add_subcommand("rdc", "Response distribution chart and diagnosis");
  rdc->add_option("--input,-i", rdc_args.input, "Score log (one JSON object per line)")
      ->required();
  rdc->add_option("--model", rdc_args.model, "Only this model_id");
  rdc->add_flag("--by-class", rdc_args.by_class, "One chart per class label (one-vs-rest)");
  rdc->add_flag("--rescale", rdc_args.rescale, "Min-max rescale scores over the file");
  rdc->add_option("--overrides", rdc_args.overrides, "JSON array of output override rules");
  rdc->add_option("--svg", rdc_args.svg, "Write the chart as SVG");
  knobs.add(rdc, "ingest", "max_malformed_fraction", "--max-malformed",
            rdc_args.max_malformed, "Malformed-line share that aborts parsing");
  add_rdc_knobs(rdc, knobs, rdc_args.rdc);
  add_common(rdc, rdc_common, "Exit 3 unless every chart is HEALTHY_BIMODAL");
  handlers[rdc] = [&](Report& r) { return cmd_rdc(rdc_args, rdc_common, r, out); };
  commons[rdc] = &rdc_common;

  BiasArgs bias_args;
  Common bias_common;
  auto* bias = app.add_subcommand("bias", "Selection-bias probe: labelled vs unlabelled");
  bias->add_option("--input,-i", bias_args.input, "Tabular CSV with header")->required();
  bias->add_option("--label-column", bias_args.label_column,
                   "Binary column: 1 when a target can be computed");
  bias->add_option("--drop", bias_args.drop, "Columns excluded from the features");
  bias->add_flag("--impute", bias_args.impute, "Mean-impute missing feature cells");
  knobs.add(bias, "bias", "folds", "--folds", bias_args.bias.folds, "Cross-fitting folds");
  knobs.add(bias, "bias", "permutations", "--permutations", bias_args.bias.permutations,
            "Shuffled-label refits for the permutation p-value");
  knobs.add(bias, "bias", "severe_auc", "--severe-auc", bias_args.bias.severe_auc,
            "AUC needed for SEVERE");
  knobs.add(bias, "bias", "severe_p", "--severe-p", bias_args.bias.severe_p,
            "p-value needed for SEVERE");
  knobs.add(bias, "bias", "mild_auc", "--mild-auc", bias_args.bias.mild_auc,
            "AUC needed for MILD");
  knobs.add(bias, "bias", "mild_p", "--mild-p", bias_args.bias.mild_p,
            "p-value needed for MILD");
  knobs.add(bias, "logistic", "epochs", "--epochs", bias_args.bias.logistic.epochs,
            "Gradient descent epochs");
  knobs.add(bias, "logistic", "learning_rate", "--learning-rate",
            bias_args.bias.logistic.learning_rate, "Gradient descent step size");
  bias->add_option("--threads", bias_args.bias.threads,
                   "Worker threads for permutations (0: all cores)");
  add_common(bias, bias_common, "Exit 3 when severity is MILD or SEVERE");
  handlers[bias] = [&](Report& r) { return cmd_bias(bias_args, bias_common, r, out); };
  commons[bias] = &bias_common;

  SetupArgs setup_args;
  Common setup_common;
  auto* setup = app.add_subcommand("setup", "Score a candidate problem construction");
  setup->add_option("--input,-i", setup_args.input, "Tabular CSV with header")->required();
  setup->add_option("--target", setup_args.target,
                    "Binary target column; empty cells mark unlabelled rows");
  setup->add_option("--drop", setup_args.drop, "Columns excluded from the features");
  setup->add_flag("--impute", setup_args.impute, "Mean-impute missing feature cells");
  knobs.add(setup, "learnability", "folds", "--folds", setup_args.cv.folds,
            "Cross-validation folds for the learnability gap");
  knobs.add(setup, "bias", "folds", "--bias-folds", setup_args.bias.folds,
            "Cross-fitting folds for the bias probe");
  knobs.add(setup, "bias", "permutations", "--permutations", setup_args.bias.permutations,
            "Shuffled-label refits for the bias probe");
  knobs.add(setup, "bias", "severe_auc", "--severe-auc", setup_args.bias.severe_auc,
            "AUC needed for SEVERE");
  knobs.add(setup, "bias", "severe_p", "--severe-p", setup_args.bias.severe_p,
            "p-value needed for SEVERE");
  knobs.add(setup, "bias", "mild_auc", "--mild-auc", setup_args.bias.mild_auc,
            "AUC needed for MILD");
  knobs.add(setup, "bias", "mild_p", "--mild-p", setup_args.bias.mild_p,
            "p-value needed for MILD");
  knobs.add(setup, "logistic", "epochs", "--epochs", setup_args.cv.logistic.epochs,
            "Gradient descent epochs");
  knobs.add(setup, "logistic", "learning_rate", "--learning-rate",
            setup_args.cv.logistic.learning_rate, "Gradient descent step size");
  setup->add_option("--threads", setup_args.bias.threads,
                    "Worker threads for permutations (0: all cores)");
  add_common(setup, setup_common,
             "Exit 3 on a class-balance warning or a MILD/SEVERE bias verdict");
  handlers[setup] = [&](Report& r) { return cmd_setup(setup_args, setup_common, r, out); };
  commons[setup] = &setup_common;

  DisagreeArgs dis_args;
  Common dis_common;
  auto* dis = app.add_subcommand("disagree", "Disagreement rate between two models");
  dis->add_option("--input,-i", dis_args.input, "CSV entity_id,pred_a,pred_b[,label]")
      ->required();
  knobs.add(dis, "disagree", "threshold", "--threshold", dis_args.threshold,
            "Scores >= threshold predict the positive class");
  dis->add_option("--p-control", dis_args.p_control,
                  "Control conversion rate, to size the experiment");
  dis->add_option("--mde", dis_args.mde, "Minimum detectable effect, with --p-control");
  knobs.add(dis, "power", "alpha", "--alpha", dis_args.alpha, "Two-sided significance level");
  knobs.add(dis, "power", "power", "--power", dis_args.power, "Target power");
  add_common(dis, dis_common, "Exit 3 when the models never disagree");
  handlers[dis] = [&](Report& r) { return cmd_disagree(dis_args, dis_common, r, out); };
  commons[dis] = &dis_common;

  PowerArgs pow_args;
  Common pow_common;
  auto* pow = app.add_subcommand("power", "Sample size for a two-proportion test");
  pow->add_option("--p-control", pow_args.p_control, "Control conversion rate")->required();
  pow->add_option("--mde", pow_args.mde, "Minimum detectable effect (absolute)")->required();
  knobs.add(pow, "power", "alpha", "--alpha", pow_args.alpha, "Two-sided significance level");
  knobs.add(pow, "power", "power", "--power", pow_args.power, "Target power");
  pow->add_option("--disagreement", pow_args.disagreement,
                  "Share of traffic where the models disagree");
  add_common(pow, pow_common, nullptr);
  handlers[pow] = [&](Report& r) { return cmd_power(pow_args, pow_common, r, out); };
  commons[pow] = &pow_common;

  CurveArgs curve_args;
  Common curve_common;
  auto* curve = app.add_subcommand("curve", "Upper bound of impacted traffic vs accuracy");
  curve->add_option("--baseline", curve_args.baseline, "Baseline model accuracy")
      ->required();
  curve->add_option("--grid", curve_args.grid,
                    "New-model accuracies as lo:hi:step (default baseline:1:0.01)");
  curve->add_option("--svg", curve_args.svg, "Write the curve as SVG");
  add_common(curve, curve_common, nullptr);
  handlers[curve] = [&](Report& r) { return cmd_curve(curve_args, curve_common, r, out); };
  commons[curve] = &curve_common;

  auto* blocked = app.add_subcommand("blocked", "Three-variant blocked experiment");
  blocked->require_subcommand(1);
  BlockedSimArgs bsim_args;
  Common bsim_common;
  auto* bsim = blocked->add_subcommand("simulate", "Simulate outcomes and analyse them");
  bsim->add_option("--users", bsim_args.users, "Users to assign");
  bsim->add_option("--base-cvr", bsim_args.base_cvr, "Conversion rate of base");
  bsim->add_option("--latency-penalty", bsim_args.latency_penalty,
                   "Additive rate change in v1 and v2");
  bsim->add_option("--feature-effect", bsim_args.feature_effect,
                   "Additive rate change in v2 only");
  knobs.add(bsim, "blocked", "allocation", "--allocation", bsim_args.allocation,
            "Shares of base,v1,v2")
      ->delimiter(',')
      ->expected(3);
  bsim->add_option("--outcomes", bsim_args.outcomes, "Write outcomes as CSV variant,converted");
  knobs.add(bsim, "blocked", "confidence", "--confidence", bsim_args.confidence,
            "Confidence level of the intervals");
  add_common(bsim, bsim_common, nullptr);
  handlers[bsim] = [&](Report& r) {
    return cmd_blocked_simulate(bsim_args, bsim_common, r, out);
  };
  commons[bsim] = &bsim_common;

  BlockedAnalyzeArgs bana_args;
  Common bana_common;
  auto* bana = blocked->add_subcommand("analyze", "Analyse outcomes from a CSV");
  bana->add_option("--input,-i", bana_args.input, "CSV variant,converted")->required();
  knobs.add(bana, "blocked", "confidence", "--confidence", bana_args.confidence,
            "Confidence level of the intervals");
  add_common(bana, bana_common, nullptr);
  handlers[bana] = [&](Report& r) {
    return cmd_blocked_analyze(bana_args, bana_common, r, out);
  };
  commons[bana] = &bana_common;

  WatchArgs watch_args;
  Common watch_common;
  auto* watch = app.add_subcommand("watch", "Windowed RDC monitoring with alerts");
  watch->add_option("--input,-i", watch_args.input, "Score log to read or tail")->required();
  watch->add_option("--reference", watch_args.reference,
                    "Score log whose RDC every window is compared with "
                    "(default: the model's previous window)");
  watch->add_option("--alerts", watch_args.alerts, "Write alerts as JSON lines");
  watch->add_option("--overrides", watch_args.overrides,
                    "JSON array of output override rules");
  watch->add_flag("--follow", watch_args.follow, "Keep reading as the file grows");
  watch->add_option("--poll-interval", watch_args.poll_interval_ms,
                    "Milliseconds between reads in follow mode");
  watch->add_option("--idle-timeout", watch_args.idle_timeout_s,
                    "Seconds without new data before follow mode stops");
  knobs.add(watch, "ingest", "max_malformed_fraction", "--max-malformed",
            watch_args.max_malformed, "Malformed-line share that aborts parsing");
  knobs.add(watch, "monitor", "window_size", "--window-size", watch_args.monitor.window_size,
            "Records per tumbling window, per model");
  knobs.add(watch, "monitor", "tv_threshold", "--tv-threshold",
            watch_args.monitor.tv_threshold, "Total variation distance that raises DRIFT");
  add_rdc_knobs(watch, knobs, watch_args.monitor.rdc);
  add_common(watch, watch_common, "Exit 3 when any alert fired");
  handlers[watch] = [&](Report& r) { return cmd_watch(watch_args, watch_common, r, out); };
  commons[watch] = &watch_common;

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitPrecondition;
  }

  const CLI::App* active = app.get_subcommands().front();
  if (active == blocked) active = blocked->get_subcommands().front();
  std::string command = active->get_name();
  if (active->get_parent() == blocked) command = "blocked " + command;

  try {
    Report rep;
    rep.command = command;
    load_config(*commons.at(active), knobs, active, rep);
    return handlers.at(active)(rep);
  } catch (const InputError& e) {
    err << "scorescope " << command << ": " << e.what() << '\n';
    return kExitInput;
  } catch (const PreconditionError& e) {
    err << "scorescope " << command << ": " << e.what() << '\n';
    return kExitPrecondition;
  } catch (const std::exception& e) {
    err << "scorescope " << command << ": " << e.what() << '\n';
    return kExitInput;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace scorescope::cli
