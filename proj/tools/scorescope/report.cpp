#include "report.hpp"

#include <openssl/evp.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <memory>

#include "scorescope/error.hpp"

#ifndef SCORESCOPE_VERSION
#define SCORESCOPE_VERSION "0.0.0"
#endif

namespace scorescope::cli {

std::string tool_version() { return SCORESCOPE_VERSION; }

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");

  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(),
                                                              &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 initialisation failed");
  }
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    const auto got = in.gcount();
    if (got > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(got));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);

  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    char b[3];
    std::snprintf(b, sizeof(b), "%02x", md[i]);
    hex += b;
  }
  return hex;
}

void Report::add_input(const std::filesystem::path& path) {
  inputs.push_back({{"path", path.string()}, {"sha256", sha256_file(path)}});
}

Json Report::to_json() const {
  Json j;
  j["tool_version"] = tool_version();
  j["command"] = command;
  j["inputs"] = inputs;
  j["results"] = results;
  j["decisions"] = decisions;
  return j;
}

Json to_json(const Rdc& rdc) {
  return {{"bins", rdc.bin_count()}, {"n", rdc.n}, {"counts", rdc.counts}};
}

Json to_json(const Mode& m) {
  return {{"bin_index", m.bin_index}, {"location", m.location}, {"height", m.height},
          {"prominence", m.prominence}, {"mass", m.mass}};
}

Json to_json(const Valley& v) {
  return {{"left_mode", v.left_mode}, {"right_mode", v.right_mode},
          {"min_bin", v.min_bin},     {"interval", {v.lo, v.hi}},
          {"min_height", v.min_height}, {"depth", v.depth}};
}

Json to_json(const ThresholdBand& b) {
  return {{"lower", b.lower}, {"upper", b.upper}, {"recommended", b.recommended},
          {"lower_means", "maximise recall"}, {"upper_means", "maximise precision"}};
}

Json to_json(const RdcDiagnosis& d) {
  const auto& e = d.evidence;
  Json modes = Json::array();
  for (const auto& m : e.modes.modes) modes.push_back(to_json(m));
  Json valleys = Json::array();
  for (const auto& v : e.modes.valleys) valleys.push_back(to_json(v));

  Json evidence;
  evidence["rule"] = e.rule;
  evidence["roughness"] = e.roughness;
  evidence["spike_share"] = e.spike_share;
  evidence["spike_bin"] = e.spike_bin;
  evidence["modes"] = modes;
  evidence["valleys"] = valleys;
  evidence["primary_modes"] = e.primary_modes;
  evidence["extra_modes"] = e.extra_modes;
  evidence["valley"] = e.valley ? to_json(*e.valley) : Json(nullptr);

  Json j;
  j["pattern"] = std::string(to_string(d.pattern));
  j["evidence"] = evidence;
  j["threshold_band"] = d.threshold_band ? to_json(*d.threshold_band) : Json(nullptr);
  return j;
}

Json to_json(const RdcConfig& c) {
  return {{"bins", c.bins},
          {"window", c.window},
          {"prominence_min", c.prominence_min},
          {"min_samples", c.min_samples},
          {"spike_share", c.spike_share},
          {"spike_second_mode_mass", c.spike_second_mode_mass},
          {"roughness_max", c.roughness_max},
          {"central_lo", c.central_lo},
          {"central_hi", c.central_hi},
          {"valley_depth_floor", c.valley_depth_floor},
          {"band_epsilon", c.band_epsilon},
          {"rule_order", {"EXTREME_SPIKE", "NOISY", "HEALTHY_BIMODAL", "CENTRAL_UNIMODAL",
                          "INDETERMINATE"}},
          {"note", "heuristic conventions, not fitted to data; a verdict cannot prove "
                   "or disprove model quality"}};
}

Json to_json(const ClassBalance& b) {
  return {{"n", b.n},
          {"positives", b.positives},
          {"positive_proportion", b.positive_proportion},
          {"warning", b.warning ? Json(*b.warning) : Json(nullptr)},
          {"note", b.note}};
}

Json to_json(const LearnabilityReport& r) {
  return {{"folds", r.folds},
          {"fold_auc", r.fold_auc},
          {"skipped_folds", r.skipped_folds},
          {"logistic_auc", r.logistic_auc},
          {"stump_auc", r.stump_auc},
          {"random_baseline_auc", r.random_baseline_auc},
          {"majority_baseline_auc", r.majority_baseline_auc},
          {"majority_accuracy", r.majority_accuracy},
          {"logistic_accuracy", r.logistic_accuracy},
          {"gap", r.gap}};
}

Json to_json(const BiasReport& r) {
  return {{"auc", r.auc},
          {"permutation_p", r.permutation_p},
          {"n_labeled", r.n_labeled},
          {"n_unlabeled", r.n_unlabeled},
          {"permutations", r.permutations},
          {"severity", std::string(to_string(r.severity))}};
}

Json to_json(const BiasConfig& c) {
  return {{"folds", c.folds},
          {"permutations", c.permutations},
          {"seed", c.seed},
          {"epochs", c.logistic.epochs},
          {"learning_rate", c.logistic.learning_rate},
          {"severe_auc", c.severe_auc},
          {"severe_p", c.severe_p},
          {"mild_auc", c.mild_auc},
          {"mild_p", c.mild_p},
          {"note", "severity cutoffs are conventions"}};
}

Json to_json(const CvConfig& c) {
  return {{"folds", c.folds},
          {"seed", c.seed},
          {"epochs", c.logistic.epochs},
          {"learning_rate", c.logistic.learning_rate}};
}

Json to_json(const DisagreementReport& r) {
  return {{"n_pairs", r.n_pairs},
          {"n_disagree", r.n_disagree},
          {"rate", r.rate},
          {"threshold", r.threshold},
          {"n_labeled", r.n_labeled},
          {"accuracy_a", r.accuracy_a ? Json(*r.accuracy_a) : Json(nullptr)},
          {"accuracy_b", r.accuracy_b ? Json(*r.accuracy_b) : Json(nullptr)}};
}

Json to_json(const PowerReport& r) {
  return {{"p_control", r.p_control},
          {"p_treatment", r.p_treatment},
          {"alpha", r.alpha},
          {"power", r.power},
          {"n_per_arm", r.n_per_arm},
          {"disagreement_rate", r.disagreement_rate},
          {"total_traffic_required", r.total_traffic_required}};
}

Json to_json(const Contrast& c) {
  return {{"estimate", c.estimate},
          {"ci_low", c.ci_low},
          {"ci_high", c.ci_high},
          {"std_error", c.std_error},
          {"degenerate", c.degenerate}};
}

Json to_json(const BlockedAnalysis& a) {
  Json variants = Json::array();
  for (int v = 0; v < 3; ++v) {
    variants.push_back({{"variant", std::string(to_string(static_cast<Variant>(v)))},
                        {"users", a.users[v]},
                        {"conversions", a.conversions[v]},
                        {"rate", a.rates[v]}});
  }
  return {{"variants", variants},
          {"confidence", a.confidence},
          {"perf_effect", to_json(a.perf_effect)},
          {"feature_effect", to_json(a.feature_effect)},
          {"total_effect", to_json(a.total_effect)}};
}

Json to_json(const MonitorConfig& c) {
  return {{"window_size", c.window_size},
          {"tv_threshold", c.tv_threshold},
          {"reference", c.reference ? "configured" : "previous window"}};
}

Json to_json(const AlertEvent& a) {
  Json j;
  j["model_id"] = a.model_id;
  j["window_index"] = a.window_index;
  j["kind"] = std::string(to_string(a.kind));
  if (a.prior) j["prior"] = std::string(to_string(*a.prior));
  if (a.current) j["current"] = std::string(to_string(*a.current));
  if (a.distance) j["distance"] = *a.distance;
  return j;
}

}  // namespace scorescope::cli
