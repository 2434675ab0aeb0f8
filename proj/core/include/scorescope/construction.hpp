#pragma once

// Scoring a candidate problem construction before any model ships: how much
// traffic the treatment would touch, whether the target is learnable beyond
// trivial baselines, and whether the labelled subset is a biased sample.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scorescope/ingest.hpp"

namespace scorescope {

enum class LearnerKind { kLogistic, kStump, kRandomBaseline, kMajorityBaseline };

std::string_view to_string(LearnerKind kind);

struct StumpSplit {
  std::size_t feature = 0;
  double threshold = 0.0;  // x > threshold goes right
  int polarity = 1;        // +1 when the right leaf is the more positive one
  double left_rate = 0.0;
  double right_rate = 0.0;
};

struct LearnerModel {
  LearnerKind kind = LearnerKind::kLogistic;
  // Logistic: weights act on standardized features; a zero scale marks a
  // constant feature that was dropped.
  std::vector<double> weights;
  double bias = 0.0;
  std::vector<double> feature_mean;
  std::vector<double> feature_scale;
  StumpSplit split;
  double positive_rate = 0.0;  // baselines

  /// Score for one raw feature row.
  double predict(std::span<const double> row) const;
  std::vector<double> predict(const FeatureMatrix& features) const;
};

struct LogisticConfig {
  int epochs = 500;
  double learning_rate = 0.1;
};

/// Full-batch gradient descent on mean log-loss from zero weights, on
/// features standardized to mean 0 / stdev 1. Deterministic.
LearnerModel train_logistic(const FeatureMatrix& features,
                            std::span<const int> target,
                            const LogisticConfig& config = {});

/// Best single-feature split by weighted Gini impurity; predicts leaf rates.
LearnerModel train_stump(const FeatureMatrix& features, std::span<const int> target);

LearnerModel majority_baseline(std::span<const int> target);
LearnerModel random_baseline(std::span<const int> target);

/// Mann-Whitney AUC; ties count one half. Requires both classes.
double auc(std::span<const double> scores, std::span<const int> labels);

struct ClassBalance {
  std::size_t n = 0;
  std::size_t positives = 0;
  double positive_proportion = 0.0;
  std::optional<std::string> warning;
  std::string note;
};

ClassBalance class_balance(std::span<const int> target);

struct CvConfig {
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  LogisticConfig logistic;
};

struct LearnabilityReport {
  std::size_t folds = 0;
  std::vector<double> fold_auc;           // logistic, per used fold
  std::vector<std::size_t> skipped_folds; // single-class folds
  double logistic_auc = 0.0;              // mean out-of-fold AUC
  double stump_auc = 0.0;
  double random_baseline_auc = 0.5;
  double majority_baseline_auc = 0.5;
  double majority_accuracy = 0.0;
  double logistic_accuracy = 0.0;  // at threshold 0.5
  double gap = 0.0;                // logistic_auc - best trivial baseline AUC
};

LearnabilityReport learnability_gap(const TabularDataset& dataset,
                                    const CvConfig& config = {});

enum class Severity { kNone, kMild, kSevere };

std::string_view to_string(Severity severity);

struct BiasConfig {
  std::size_t folds = 2;
  std::size_t permutations = 200;
  std::uint64_t seed = 0;
  LogisticConfig logistic;
  double severe_auc = 0.75;
  double severe_p = 0.01;
  double mild_auc = 0.60;
  double mild_p = 0.05;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct BiasReport {
  double auc = 0.5;
  double permutation_p = 1.0;
  std::size_t n_labeled = 0;
  std::size_t n_unlabeled = 0;
  std::size_t permutations = 0;
  Severity severity = Severity::kNone;
};

Severity classify_severity(double auc, double permutation_p, const BiasConfig& config);

/// Probes for selection bias: a logistic model tries to tell labelled from
/// unlabelled observations. Its pooled out-of-fold AUC is compared against
/// refits on shuffled availability flags; an easy problem means a biased
/// label space.
BiasReport bias_severity(const FeatureMatrix& features,
                         std::span<const int> has_label,
                         const BiasConfig& config = {});

struct ConstructionScore {
  ClassBalance balance;
  std::optional<LearnabilityReport> learnability;  // absent for a single class
  std::optional<BiasReport> bias;
  std::size_t n_unlabeled = 0;
};

/// Scores a candidate construction. Rows whose target is kMissingTarget are
/// unlabelled: balance and learnability use the labelled rows only, and the
/// bias probe runs when both kinds of rows are present.
ConstructionScore score_construction(const TabularDataset& dataset,
                                     const CvConfig& cv = {},
                                     const BiasConfig& bias = {});

}  // namespace scorescope
