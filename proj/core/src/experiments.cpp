#include "scorescope/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "scorescope/error.hpp"
#include "scorescope/random.hpp"
#include "scorescope/stats.hpp"

namespace scorescope {

namespace {

void require_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw PreconditionError(std::string(what) + " must lie in [0, 1]");
  }
}

}  // namespace

DisagreementReport disagreement(std::span<const PairedPrediction> pairs,
                                double threshold) {
  if (pairs.empty()) throw PreconditionError("disagreement of zero pairs");
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw PreconditionError("threshold must lie in (0, 1)");
  }
  DisagreementReport rep;
  rep.threshold = threshold;
  rep.n_pairs = pairs.size();
  std::size_t correct_a = 0;
  std::size_t correct_b = 0;
  for (const auto& p : pairs) {
    const int a = p.pred_a >= threshold ? 1 : 0;
    const int b = p.pred_b >= threshold ? 1 : 0;
    if (a != b) ++rep.n_disagree;
    if (p.true_label) {
      ++rep.n_labeled;
      correct_a += static_cast<std::size_t>(a == *p.true_label);
      correct_b += static_cast<std::size_t>(b == *p.true_label);
    }
  }
  rep.rate = static_cast<double>(rep.n_disagree) / static_cast<double>(rep.n_pairs);
  if (rep.n_labeled > 0) {
    const double nl = static_cast<double>(rep.n_labeled);
    rep.accuracy_a = static_cast<double>(correct_a) / nl;
    rep.accuracy_b = static_cast<double>(correct_b) / nl;
  }
  return rep;
}

double max_disagreement(double accuracy_a, double accuracy_b) {
  require_probability(accuracy_a, "accuracy_a");
  require_probability(accuracy_b, "accuracy_b");
  // B right where A is wrong, plus A right where B is wrong.
  return std::min(1.0 - accuracy_a, accuracy_b) + std::min(1.0 - accuracy_b, accuracy_a);
}

std::vector<CurvePoint> impacted_traffic_curve(double baseline_accuracy,
                                               std::span<const double> grid) {
  require_probability(baseline_accuracy, "baseline accuracy");
  std::vector<CurvePoint> out;
  out.reserve(grid.size());
  for (double a : grid) {
    if (a < baseline_accuracy || a > 1.0) {
      throw PreconditionError("grid accuracies must lie in [baseline, 1]");
    }
    out.push_back({a, max_disagreement(baseline_accuracy, a)});
  }
  return out;
}

std::vector<double> accuracy_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw PreconditionError("grid needs lo <= hi and a positive step");
  }
  const auto steps = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
  std::vector<double> out;
  out.reserve(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    const double x = lo + static_cast<double>(i) * step;
    out.push_back(std::min(hi, std::round(x * 1e12) / 1e12));
  }
  return out;
}

PowerReport required_sample_size(double p_control, double mde, double alpha,
                                 double power, double disagreement_rate) {
  if (!(p_control > 0.0) || !(p_control + mde < 1.0) || !(mde != 0.0) ||
      !(p_control + mde > 0.0)) {
    throw PreconditionError(
        "degenerate rates: need 0 < p_control, 0 < p_control + mde < 1, mde != 0");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw PreconditionError("alpha must lie in (0, 1)");
  if (!(power > 0.0 && power < 1.0)) throw PreconditionError("power must lie in (0, 1)");
  if (disagreement_rate == 0.0) {
    throw PreconditionError("experiment impossible: models identical (zero disagreement)");
  }
  if (!(disagreement_rate > 0.0 && disagreement_rate <= 1.0)) {
    throw PreconditionError("disagreement rate must lie in (0, 1]");
  }
  PowerReport r;
  r.p_control = p_control;
  r.p_treatment = p_control + mde;
  r.alpha = alpha;
  r.power = power;
  r.disagreement_rate = disagreement_rate;
  const double z_alpha = stats::two_sided_critical(alpha);
  const double z_beta = stats::normal_quantile(power);
  const double p1 = r.p_control;
  const double p2 = r.p_treatment;
  const double pbar = 0.5 * (p1 + p2);
  const double root = z_alpha * std::sqrt(2.0 * pbar * (1.0 - pbar)) +
                      z_beta * std::sqrt(p1 * (1.0 - p1) + p2 * (1.0 - p2));
  r.n_per_arm = static_cast<std::size_t>(std::ceil(root * root / (mde * mde)));
  r.total_traffic_required = static_cast<std::size_t>(
      std::ceil(2.0 * static_cast<double>(r.n_per_arm) / disagreement_rate));
  return r;
}

double approximate_power(double p_control, double p_treatment, std::size_t n_per_arm,
                         double alpha) {
  if (n_per_arm == 0) return 0.0;
  const double n = static_cast<double>(n_per_arm);
  const double pbar = 0.5 * (p_control + p_treatment);
  const double null_se = std::sqrt(2.0 * pbar * (1.0 - pbar) / n);
  const double alt_se = std::sqrt((p_control * (1.0 - p_control) +
                                   p_treatment * (1.0 - p_treatment)) / n);
  if (alt_se == 0.0) return 1.0;
  const double z_alpha = stats::two_sided_critical(alpha);
  const double d = std::fabs(p_treatment - p_control);
  return stats::normal_cdf((d - z_alpha * null_se) / alt_se) +
         stats::normal_cdf((-d - z_alpha * null_se) / alt_se);
}

SimOutcome simulate_paired_experiment(const PairedSimConfig& config) {
  const auto& j = config.joint;
  for (double p : {j.p_both, j.p_only_a, j.p_only_b, j.p_neither}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw PreconditionError("invalid probability vector: entries must lie in [0, 1]");
    }
  }
  if (std::fabs(j.p_both + j.p_only_a + j.p_only_b + j.p_neither - 1.0) > 1e-9) {
    throw PreconditionError("invalid probability vector: entries must sum to 1");
  }
  require_probability(config.conversion_if_correct, "conversion_if_correct");
  require_probability(config.conversion_if_wrong, "conversion_if_wrong");
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
    throw PreconditionError("alpha must lie in (0, 1)");
  }

  SimOutcome out;
  out.n_users = config.n_users;
  if (j.disagreement() == 0.0) {
    out.experiment_possible = false;
    return out;
  }
  Rng rng(config.seed);
  const double cut_a = j.p_only_a;
  const double cut_ab = j.p_only_a + j.p_only_b;
  for (std::size_t u = 0; u < config.n_users; ++u) {
    const double category = rng.uniform();
    const double coin = rng.uniform();
    const double convert = rng.uniform();
    if (category >= cut_ab) continue;  // models agree: not enrolled
    const bool a_correct = category < cut_a;
    const bool treatment = coin < 0.5;
    // Only one model is right here, so the shown model is right iff it is
    // the one that is correct.
    const bool shown_correct = treatment ? !a_correct : a_correct;
    const double rate =
        shown_correct ? config.conversion_if_correct : config.conversion_if_wrong;
    const bool converted = convert < rate;
    if (treatment) {
      ++out.n_treatment;
      out.conv_treatment += static_cast<std::size_t>(converted);
    } else {
      ++out.n_control;
      out.conv_control += static_cast<std::size_t>(converted);
    }
  }
  out.enrolled = out.n_control + out.n_treatment;
  if (out.n_control == 0 || out.n_treatment == 0) {
    out.experiment_possible = out.enrolled > 0;
    return out;
  }
  const auto test = stats::two_proportion_z_test(out.conv_control, out.n_control,
                                                 out.conv_treatment, out.n_treatment);
  const auto ci = stats::difference_interval(out.conv_control, out.n_control,
                                             out.conv_treatment, out.n_treatment,
                                             1.0 - config.alpha);
  out.effect_estimate = test.difference;
  out.ci_low = std::min(ci.low, out.effect_estimate);
  out.ci_high = std::max(ci.high, out.effect_estimate);
  out.z = test.z;
  out.p_value = test.p_value;
  out.rejected_null = !test.degenerate && test.p_value < config.alpha;
  return out;
}

}  // namespace scorescope
