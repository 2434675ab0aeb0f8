#include "scorescope/construction.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "logistic_kernel.hpp"
#include "scorescope/error.hpp"
#include "scorescope/random.hpp"

namespace scorescope {

namespace {

double sigmoid(double z) {
  const double t = std::clamp(z, -500.0, 500.0);
  return 1.0 / (1.0 + std::exp(-t));
}

void require_binary(std::span<const int> labels, std::string_view what) {
  for (int v : labels) {
    if (v != 0 && v != 1) {
      throw PreconditionError(std::string(what) + " must be binary (0/1)");
    }
  }
}

std::size_t count_positive(std::span<const int> labels) {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;       // 0 for constant (dropped) features
  std::vector<std::size_t> active; // indices of kept features
};

Standardizer fit_standardizer(const FeatureMatrix& x,
                              std::span<const std::size_t> rows) {
  const std::size_t d = x.cols();
  Standardizer s;
  s.mean.assign(d, 0.0);
  s.scale.assign(d, 0.0);
  const double n = static_cast<double>(rows.size());
  for (std::size_t j = 0; j < d; ++j) {
    double lo = x(rows[0], j);
    double hi = lo;
    double sum = 0.0;
    for (std::size_t r : rows) {
      const double v = x(r, j);
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double mean = sum / n;
    s.mean[j] = mean;
    if (hi == lo) continue;  // constant: dropped
    double ss = 0.0;
    for (std::size_t r : rows) {
      const double dv = x(r, j) - mean;
      ss += dv * dv;
    }
    const double sd = std::sqrt(ss / n);
    if (sd > 0.0) {
      s.scale[j] = sd;
      s.active.push_back(j);
    }
  }
  return s;
}

// Column-major standardized copy of the active features for `rows`.
std::vector<double> standardized_columns(const FeatureMatrix& x,
                                         std::span<const std::size_t> rows,
                                         const Standardizer& s) {
  std::vector<double> cols(s.active.size() * rows.size());
  for (std::size_t k = 0; k < s.active.size(); ++k) {
    const std::size_t j = s.active[k];
    double* out = cols.data() + k * rows.size();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out[i] = (x(rows[i], j) - s.mean[j]) / s.scale[j];
    }
  }
  return cols;
}

void require_finite(const FeatureMatrix& x) {
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (double v : x.row(r)) {
      if (!std::isfinite(v)) {
        throw PreconditionError("feature values must be finite (row " +
                                std::to_string(r) + ")");
      }
    }
  }
}

// Training and held-out data for one fold with standardization fitted on the
// training rows only. Features do not change across permutations, so this is
// computed once.
struct PreparedFold {
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  std::size_t dims = 0;
  std::vector<double> train_cols;
  std::vector<double> test_cols;
};

std::vector<std::vector<std::size_t>> assign_folds(std::size_t n,
                                                   std::size_t folds,
                                                   std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<std::vector<std::size_t>> out(folds);
  for (std::size_t i = 0; i < n; ++i) out[i % folds].push_back(order[i]);
  for (auto& f : out) std::sort(f.begin(), f.end());
  return out;
}

std::vector<PreparedFold> prepare_folds(const FeatureMatrix& x,
                                        const std::vector<std::vector<std::size_t>>& folds) {
  std::vector<PreparedFold> out(folds.size());
  for (std::size_t k = 0; k < folds.size(); ++k) {
    PreparedFold& pf = out[k];
    pf.test_rows = folds[k];
    for (std::size_t other = 0; other < folds.size(); ++other) {
      if (other == k) continue;
      pf.train_rows.insert(pf.train_rows.end(), folds[other].begin(), folds[other].end());
    }
    std::sort(pf.train_rows.begin(), pf.train_rows.end());
    if (pf.train_rows.empty()) continue;
    const Standardizer s = fit_standardizer(x, pf.train_rows);
    pf.dims = s.active.size();
    pf.train_cols = standardized_columns(x, pf.train_rows, s);
    pf.test_cols = standardized_columns(x, pf.test_rows, s);
  }
  return out;
}

// Fits on the fold's training rows and writes linear scores for its test rows.
// A single-class training set yields constant scores.
void fit_and_score(const PreparedFold& pf, std::span<const int> labels,
                   const LogisticConfig& config, std::span<double> test_scores) {
  std::vector<double> y(pf.train_rows.size());
  std::size_t pos = 0;
  for (std::size_t i = 0; i < pf.train_rows.size(); ++i) {
    y[i] = labels[pf.train_rows[i]];
    pos += static_cast<std::size_t>(labels[pf.train_rows[i]]);
  }
  if (pos == 0 || pos == y.size()) {
    std::fill(test_scores.begin(), test_scores.end(), 0.0);
    return;
  }
  std::vector<double> w(pf.dims, 0.0);
  double b = 0.0;
  detail::logistic_descent(pf.train_cols, pf.train_rows.size(), pf.dims, y,
                           config.epochs, config.learning_rate, w, b);
  detail::linear_scores(pf.test_cols, pf.test_rows.size(), pf.dims, w, b,
                        test_scores);
}

double pooled_oof_auc(const std::vector<PreparedFold>& folds,
                      std::span<const int> labels, const LogisticConfig& config) {
  std::vector<double> scores(labels.size(), 0.0);
  std::vector<double> buf;
  for (const auto& pf : folds) {
    buf.assign(pf.test_rows.size(), 0.0);
    fit_and_score(pf, labels, config, buf);
    for (std::size_t i = 0; i < pf.test_rows.size(); ++i) {
      scores[pf.test_rows[i]] = buf[i];
    }
  }
  return auc(scores, labels);
}

void validate_logistic_config(const LogisticConfig& c) {
  if (c.epochs < 0) throw PreconditionError("epochs must be >= 0");
  if (!(c.learning_rate > 0.0) || !std::isfinite(c.learning_rate)) {
    throw PreconditionError("learning_rate must be positive");
  }
}

}  // namespace

std::string_view to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::kLogistic: return "logistic";
    case LearnerKind::kStump: return "stump";
    case LearnerKind::kRandomBaseline: return "random_baseline";
    case LearnerKind::kMajorityBaseline: return "majority_baseline";
  }
  return "logistic";
}

std::string_view to_string(Severity severity) {
  switch (severity) {
    case Severity::kNone: return "NONE";
    case Severity::kMild: return "MILD";
    case Severity::kSevere: return "SEVERE";
  }
  return "NONE";
}

double LearnerModel::predict(std::span<const double> row) const {
  switch (kind) {
    case LearnerKind::kLogistic: {
      double z = bias;
      for (std::size_t j = 0; j < weights.size(); ++j) {
        if (feature_scale[j] > 0.0) {
          z += weights[j] * (row[j] - feature_mean[j]) / feature_scale[j];
        }
      }
      return sigmoid(z);
    }
    case LearnerKind::kStump:
      return row[split.feature] > split.threshold ? split.right_rate : split.left_rate;
    case LearnerKind::kRandomBaseline:
    case LearnerKind::kMajorityBaseline:
      return positive_rate;
  }
  return positive_rate;
}

std::vector<double> LearnerModel::predict(const FeatureMatrix& features) const {
  std::vector<double> out(features.rows());
  for (std::size_t r = 0; r < features.rows(); ++r) out[r] = predict(features.row(r));
  return out;
}

LearnerModel train_logistic(const FeatureMatrix& features,
                            std::span<const int> target,
                            const LogisticConfig& config) {
  validate_logistic_config(config);
  if (features.rows() != target.size()) {
    throw PreconditionError("feature rows and target length differ");
  }
  if (features.rows() < 2) {
    throw PreconditionError("logistic regression needs at least 2 rows");
  }
  require_binary(target, "target");
  const std::size_t pos = count_positive(target);
  if (pos == 0 || pos == target.size()) {
    throw PreconditionError("logistic regression needs both classes present");
  }
  require_finite(features);

  std::vector<std::size_t> rows(features.rows());
  std::iota(rows.begin(), rows.end(), 0);
  const Standardizer s = fit_standardizer(features, rows);
  const auto cols = standardized_columns(features, rows, s);
  std::vector<double> y(target.begin(), target.end());
  std::vector<double> w(s.active.size(), 0.0);
  double b = 0.0;
  detail::logistic_descent(cols, rows.size(), s.active.size(), y, config.epochs,
                           config.learning_rate, w, b);

  LearnerModel m;
  m.kind = LearnerKind::kLogistic;
  m.weights.assign(features.cols(), 0.0);
  for (std::size_t k = 0; k < s.active.size(); ++k) m.weights[s.active[k]] = w[k];
  m.bias = b;
  m.feature_mean = s.mean;
  m.feature_scale = s.scale;
  m.positive_rate = static_cast<double>(pos) / static_cast<double>(target.size());
  return m;
}

LearnerModel train_stump(const FeatureMatrix& features, std::span<const int> target) {
  if (features.rows() != target.size() || target.empty()) {
    throw PreconditionError("stump needs a non-empty target matching the rows");
  }
  require_binary(target, "target");
  require_finite(features);
  const std::size_t n = target.size();
  const std::size_t total_pos = count_positive(target);

  LearnerModel m;
  m.kind = LearnerKind::kStump;
  m.positive_rate = static_cast<double>(total_pos) / static_cast<double>(n);
  m.split.left_rate = m.split.right_rate = m.positive_rate;
  m.split.threshold = std::numeric_limits<double>::infinity();

  auto gini = [](double pos, double cnt) {
    if (cnt == 0.0) return 0.0;
    const double p = pos / cnt;
    return 2.0 * p * (1.0 - p) * cnt;
  };
  double best = gini(static_cast<double>(total_pos), static_cast<double>(n));

  std::vector<std::size_t> order(n);
  for (std::size_t j = 0; j < features.cols(); ++j) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return features(a, j) < features(b, j);
    });
    std::size_t left_pos = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left_pos += static_cast<std::size_t>(target[order[i]]);
      const double here = features(order[i], j);
      const double next = features(order[i + 1], j);
      if (here == next) continue;
      const double left_n = static_cast<double>(i + 1);
      const double right_n = static_cast<double>(n - i - 1);
      const double lp = static_cast<double>(left_pos);
      const double rp = static_cast<double>(total_pos - left_pos);
      const double impurity = gini(lp, left_n) + gini(rp, right_n);
      if (impurity < best - 1e-12) {
        best = impurity;
        m.split.feature = j;
        m.split.threshold = here + 0.5 * (next - here);
        m.split.left_rate = lp / left_n;
        m.split.right_rate = rp / right_n;
        m.split.polarity = m.split.right_rate >= m.split.left_rate ? 1 : -1;
      }
    }
  }
  return m;
}

LearnerModel majority_baseline(std::span<const int> target) {
  if (target.empty()) throw PreconditionError("baseline needs a non-empty target");
  require_binary(target, "target");
  LearnerModel m;
  m.kind = LearnerKind::kMajorityBaseline;
  const std::size_t pos = count_positive(target);
  m.positive_rate = 2 * pos >= target.size() ? 1.0 : 0.0;
  return m;
}

LearnerModel random_baseline(std::span<const int> target) {
  if (target.empty()) throw PreconditionError("baseline needs a non-empty target");
  require_binary(target, "target");
  LearnerModel m;
  m.kind = LearnerKind::kRandomBaseline;
  m.positive_rate =
      static_cast<double>(count_positive(target)) / static_cast<double>(target.size());
  return m;
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw PreconditionError("scores and labels differ in length");
  }
  require_binary(labels, "labels");
  const std::size_t n = scores.size();
  const std::size_t pos = count_positive(labels);
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) {
    throw PreconditionError("AUC needs both classes present");
  }
  for (double s : scores) {
    if (std::isnan(s)) throw PreconditionError("AUC scores must not be NaN");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Sum of midranks (1-based) of the positives.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]] == 1) rank_sum += midrank;
    }
    i = j + 1;
  }
  const double p = static_cast<double>(pos);
  const double u = rank_sum - p * (p + 1.0) / 2.0;
  return u / (p * static_cast<double>(neg));
}

ClassBalance class_balance(std::span<const int> target) {
  if (target.empty()) throw PreconditionError("class balance of an empty target");
  require_binary(target, "target");
  ClassBalance b;
  b.n = target.size();
  b.positives = count_positive(target);
  b.positive_proportion = static_cast<double>(b.positives) / static_cast<double>(b.n);
  if (b.positives == 0) {
    b.warning = "no positive observations: the treatment would impact no traffic";
  } else if (b.positives == b.n) {
    b.warning = "every observation is positive: the model cannot change who is treated";
  }
  std::ostringstream os;
  os << "treated share of traffic is " << b.positive_proportion
     << "; experiment power scales with it (see the power command)";
  b.note = os.str();
  return b;
}

LearnabilityReport learnability_gap(const TabularDataset& dataset,
                                    const CvConfig& config) {
  validate_logistic_config(config.logistic);
  const auto& x = dataset.features;
  const auto& y = dataset.target;
  if (config.folds < 2) throw PreconditionError("folds must be >= 2");
  if (x.rows() != y.size()) throw PreconditionError("feature rows and target length differ");
  if (y.size() < config.folds) throw PreconditionError("fewer rows than folds");
  require_binary(y, "target");
  const std::size_t pos = count_positive(y);
  if (pos == 0 || pos == y.size()) {
    throw PreconditionError("learnability needs both classes present");
  }
  require_finite(x);

  const auto folds = prepare_folds(x, assign_folds(y.size(), config.folds, config.seed));
  LearnabilityReport rep;
  rep.folds = config.folds;
  double stump_sum = 0.0;
  double maj_acc_sum = 0.0;
  double log_acc_sum = 0.0;
  std::vector<double> scores;
  std::vector<int> test_labels;
  for (std::size_t k = 0; k < folds.size(); ++k) {
    const auto& pf = folds[k];
    test_labels.clear();
    for (auto r : pf.test_rows) test_labels.push_back(y[r]);
    std::size_t train_pos = 0;
    for (auto r : pf.train_rows) train_pos += static_cast<std::size_t>(y[r]);
    const std::size_t test_pos = count_positive(test_labels);
    if (train_pos == 0 || train_pos == pf.train_rows.size() || test_pos == 0 ||
        test_pos == test_labels.size()) {
      rep.skipped_folds.push_back(k);
      continue;
    }
    scores.assign(pf.test_rows.size(), 0.0);
    fit_and_score(pf, y, config.logistic, scores);
    rep.fold_auc.push_back(auc(scores, test_labels));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      correct += static_cast<std::size_t>((scores[i] >= 0.0 ? 1 : 0) == test_labels[i]);
    }
    log_acc_sum += static_cast<double>(correct) / static_cast<double>(scores.size());

    const FeatureMatrix train_x = x.select_rows(pf.train_rows);
    std::vector<int> train_y;
    for (auto r : pf.train_rows) train_y.push_back(y[r]);
    const LearnerModel stump = train_stump(train_x, train_y);
    const LearnerModel majority = majority_baseline(train_y);
    const FeatureMatrix test_x = x.select_rows(pf.test_rows);
    stump_sum += auc(stump.predict(test_x), test_labels);
    const int majority_class = majority.positive_rate >= 0.5 ? 1 : 0;
    maj_acc_sum += static_cast<double>(std::count(test_labels.begin(), test_labels.end(),
                                                  majority_class)) /
                   static_cast<double>(test_labels.size());
  }
  if (rep.fold_auc.empty()) {
    throw PreconditionError("every fold had a single class; cannot estimate learnability");
  }
  const double used = static_cast<double>(rep.fold_auc.size());
  rep.logistic_auc =
      std::accumulate(rep.fold_auc.begin(), rep.fold_auc.end(), 0.0) / used;
  rep.stump_auc = stump_sum / used;
  rep.majority_accuracy = maj_acc_sum / used;
  rep.logistic_accuracy = log_acc_sum / used;
  rep.gap = rep.logistic_auc -
            std::max(rep.random_baseline_auc, rep.majority_baseline_auc);
  return rep;
}

Severity classify_severity(double auc_value, double permutation_p,
                           const BiasConfig& config) {
  if (auc_value >= config.severe_auc && permutation_p <= config.severe_p) {
    return Severity::kSevere;
  }
  if (auc_value >= config.mild_auc && permutation_p <= config.mild_p) {
    return Severity::kMild;
  }
  return Severity::kNone;
}

BiasReport bias_severity(const FeatureMatrix& features, std::span<const int> has_label,
                         const BiasConfig& config) {
  validate_logistic_config(config.logistic);
  if (features.rows() != has_label.size()) {
    throw PreconditionError("feature rows and label-availability length differ");
  }
  if (config.folds < 2) throw PreconditionError("folds must be >= 2");
  if (config.permutations == 0) throw PreconditionError("permutations must be >= 1");
  if (has_label.size() < config.folds) throw PreconditionError("fewer rows than folds");
  require_binary(has_label, "label availability");
  require_finite(features);

  BiasReport rep;
  rep.n_labeled = count_positive(has_label);
  rep.n_unlabeled = has_label.size() - rep.n_labeled;
  rep.permutations = config.permutations;
  if (rep.n_labeled == 0 || rep.n_unlabeled == 0) {
    throw PreconditionError(
        "bias probe needs both labelled and unlabelled observations");
  }

  const auto folds = prepare_folds(
      features, assign_folds(has_label.size(), config.folds, derive_seed(config.seed, 0)));
  rep.auc = pooled_oof_auc(folds, has_label, config.logistic);

  // Permutation k is a pure function of (seed, k); workers fill disjoint slots.
  std::vector<double> null_auc(config.permutations, 0.0);
  auto run_permutation = [&](std::size_t k) {
    std::vector<int> shuffled(has_label.begin(), has_label.end());
    Rng rng(derive_seed(config.seed, k + 1));
    rng.shuffle(std::span<int>(shuffled));
    null_auc[k] = pooled_oof_auc(folds, shuffled, config.logistic);
  };
  unsigned threads = config.threads != 0 ? config.threads
                                         : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(
      std::min<std::size_t>(threads, config.permutations));
  if (threads <= 1) {
    for (std::size_t k = 0; k < config.permutations; ++k) run_permutation(k);
  } else {
    std::vector<std::exception_ptr> errors(threads);
    {
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
          try {
            for (std::size_t k = t; k < config.permutations; k += threads) {
              run_permutation(k);
            }
          } catch (...) {
            errors[t] = std::current_exception();
          }
        });
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  const auto at_least = std::count_if(null_auc.begin(), null_auc.end(),
                                      [&](double a) { return a >= rep.auc; });
  rep.permutation_p =
      static_cast<double>(at_least) / static_cast<double>(config.permutations);
  rep.severity = classify_severity(rep.auc, rep.permutation_p, config);
  return rep;
}

ConstructionScore score_construction(const TabularDataset& dataset,
                                     const CvConfig& cv, const BiasConfig& bias) {
  const auto& y = dataset.target;
  if (dataset.features.rows() != y.size()) {
    throw PreconditionError("feature rows and target length differ");
  }
  std::vector<std::size_t> labeled;
  std::vector<int> has_label(y.size(), 0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == kMissingTarget) continue;
    labeled.push_back(i);
    has_label[i] = 1;
  }
  if (labeled.empty()) throw PreconditionError("no labelled rows");

  TabularDataset sub;
  sub.feature_names = dataset.feature_names;
  sub.features = dataset.features.select_rows(labeled);
  for (auto i : labeled) sub.target.push_back(y[i]);

  ConstructionScore out;
  out.balance = class_balance(sub.target);
  if (out.balance.positives > 0 && out.balance.positives < out.balance.n) {
    out.learnability = learnability_gap(sub, cv);
  }
  out.n_unlabeled = y.size() - labeled.size();
  if (out.n_unlabeled > 0) out.bias = bias_severity(dataset.features, has_label, bias);
  return out;
}

}  // namespace scorescope
