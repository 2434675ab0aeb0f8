#pragma once

// A/B testing two correlated classifiers: a user only enters the experiment
// when the models disagree on the treatment, so the testable traffic is the
// disagreement rate, and it shrinks as the models get better.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scorescope/ingest.hpp"

namespace scorescope {

struct DisagreementReport {
  std::size_t n_pairs = 0;
  std::size_t n_disagree = 0;
  double rate = 0.0;
  double threshold = 0.5;
  // Present iff at least one pair carries a label; computed over labelled pairs.
  std::size_t n_labeled = 0;
  std::optional<double> accuracy_a;
  std::optional<double> accuracy_b;
};

/// Scores are binarized as score >= threshold. Binary 0/1 predictions pass
/// through unchanged for any threshold in (0, 1).
DisagreementReport disagreement(std::span<const PairedPrediction> pairs,
                                double threshold = 0.5);

/// Largest possible P(models disagree) for two binary classifiers with the
/// given accuracies. On a binary problem two predictions differ exactly when
/// one model is right and the other wrong, so this is
/// min(1 - a, b) + min(1 - b, a).
double max_disagreement(double accuracy_a, double accuracy_b);

struct CurvePoint {
  double accuracy = 0.0;
  double upper_bound = 0.0;
};

/// Upper bound on impacted traffic for each new-model accuracy in `grid`
/// when tested against a baseline of `baseline_accuracy`.
std::vector<CurvePoint> impacted_traffic_curve(double baseline_accuracy,
                                               std::span<const double> grid);

/// lo, lo + step, ..., hi (inclusive when hi is on the lattice). Points are
/// rounded to 12 decimals so decimal grids print as written.
std::vector<double> accuracy_grid(double lo, double hi, double step);

struct PowerReport {
  double p_control = 0.0;
  double p_treatment = 0.0;
  double alpha = 0.05;
  double power = 0.8;
  std::size_t n_per_arm = 0;
  double disagreement_rate = 1.0;
  std::size_t total_traffic_required = 0;  // ceil(2 n_per_arm / disagreement)
};

/// Per-arm size from the normal approximation to the two-sided two-proportion
/// z-test, then diluted by the share of users who actually enter.
PowerReport required_sample_size(double p_control, double minimum_detectable_effect,
                                 double alpha = 0.05, double power = 0.8,
                                 double disagreement_rate = 1.0);

/// Normal-approximation power of the pooled two-sided test at n per arm.
double approximate_power(double p_control, double p_treatment, std::size_t n_per_arm,
                         double alpha = 0.05);

/// Joint distribution of which model is correct on a user.
struct JointCorrectness {
  double p_both = 0.0;
  double p_only_a = 0.0;
  double p_only_b = 0.0;
  double p_neither = 0.0;

  double disagreement() const { return p_only_a + p_only_b; }
};

struct PairedSimConfig {
  std::size_t n_users = 0;
  JointCorrectness joint;
  double conversion_if_correct = 0.0;  // shown model's prediction is right
  double conversion_if_wrong = 0.0;
  double alpha = 0.05;
  std::uint64_t seed = 0;
};

struct SimOutcome {
  std::size_t n_users = 0;
  std::size_t enrolled = 0;
  std::size_t n_control = 0;     // shown model A
  std::size_t n_treatment = 0;   // shown model B
  std::size_t conv_control = 0;
  std::size_t conv_treatment = 0;
  double effect_estimate = 0.0;  // rate(treatment) - rate(control)
  double ci_low = 0.0;
  double ci_high = 0.0;
  double z = 0.0;
  double p_value = 1.0;
  bool rejected_null = false;
  bool experiment_possible = true;  // false when the models never disagree
};

/// Routes only disagreeing users into a 50/50 experiment (control sees model
/// A, treatment model B) and tests the conversion difference. Each user uses
/// exactly three uniforms, so runs with the same seed share random numbers.
SimOutcome simulate_paired_experiment(const PairedSimConfig& config);

}  // namespace scorescope
