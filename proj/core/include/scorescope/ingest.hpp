#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace scorescope {

/// One serving-time prediction event.
struct ScoreRecord {
  std::string model_id;
  std::int64_t ts = 0;  // epoch milliseconds, >= 0
  double score = 0.0;   // in [0, 1] once validated
  std::optional<std::string> entity_id;
  std::optional<std::string> class_label;
  std::optional<int> true_label;  // 0 or 1

  bool operator==(const ScoreRecord&) const = default;
};

/// One entity scored by two models.
struct PairedPrediction {
  std::string entity_id;
  double pred_a = 0.0;
  double pred_b = 0.0;
  std::optional<int> true_label;

  bool operator==(const PairedPrediction&) const = default;
};

/// Dense row-major matrix of real features.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  void append_row(std::span<const double> values);

  /// Rows picked by index, in the given order.
  FeatureMatrix select_rows(std::span<const std::size_t> indices) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct TabularDataset {
  std::vector<std::string> feature_names;
  FeatureMatrix features;
  std::vector<int> target;  // binary labels or label-availability flags
};

struct ScoreLogOptions {
  bool rescale = false;                 // min-max rescale over the whole file
  double max_malformed_fraction = 0.10;
};

struct ScoreLog {
  std::vector<ScoreRecord> records;
  std::size_t skipped = 0;  // malformed lines
  std::size_t lines = 0;    // non-blank lines seen
};

enum class LineStatus { kRecord, kBlank, kMalformed };

struct ParsedLine {
  LineStatus status = LineStatus::kBlank;
  ScoreRecord record;
};

/// Parses one score-log line. Range of `score` is not checked here; a line is
/// malformed when it is not a JSON object, a required field is missing or
/// mistyped, ts is negative, or the score is not finite.
ParsedLine parse_score_line(std::string_view line);

/// Throws InputError naming `line_no` when the score lies outside [0, 1].
void validate_score_range(const ScoreRecord& record, std::size_t line_no);

ScoreLog read_score_log(const std::filesystem::path& path,
                        const ScoreLogOptions& options = {});
ScoreLog parse_score_log(std::istream& in, const ScoreLogOptions& options = {},
                         std::string_view source = "<stream>");

std::string format_score_record(const ScoreRecord& record);
void write_score_log(std::ostream& out, std::span<const ScoreRecord> records);

std::vector<PairedPrediction> read_paired(const std::filesystem::path& path);
std::vector<PairedPrediction> parse_paired(std::istream& in,
                                           std::string_view source = "<stream>");

inline constexpr int kMissingTarget = -1;

struct TabularOptions {
  bool impute = false;  // replace missing cells with the column mean
  // Rows with an empty target cell are kept with target kMissingTarget
  // (unlabelled observations) instead of being rejected.
  bool allow_missing_target = false;
  std::vector<std::string> drop_columns;  // excluded from the features
};

TabularDataset read_tabular(const std::filesystem::path& path,
                            std::string_view target_column,
                            const TabularOptions& options = {});
TabularDataset parse_tabular(std::istream& in, std::string_view target_column,
                             const TabularOptions& options = {},
                             std::string_view source = "<stream>");

}  // namespace scorescope
