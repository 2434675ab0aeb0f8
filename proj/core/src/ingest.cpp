#include "scorescope/ingest.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "csv.hpp"
#include "scorescope/error.hpp"

namespace scorescope {

using nlohmann::json;

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError("cannot open " + path.string());
  }
  return in;
}

std::string where(std::string_view source, std::size_t line_no) {
  std::ostringstream os;
  os << source << ':' << line_no;
  return os.str();
}

std::optional<std::string> optional_text(const json& obj, const char* key,
                                         bool& ok) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer() || it->is_number_unsigned()) return it->dump();
  ok = false;
  return std::nullopt;
}

bool is_missing_cell(std::string_view cell) {
  cell = csv::trim(cell);
  return cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan" ||
         cell == "null";
}

std::optional<int> parse_binary(std::string_view cell) {
  const auto v = csv::parse_double(cell);
  if (!v) return std::nullopt;
  if (*v == 0.0) return 0;
  if (*v == 1.0) return 1;
  return std::nullopt;
}

}  // namespace

void FeatureMatrix::append_row(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  if (values.size() != cols_) {
    throw InputError("row arity mismatch in feature matrix");
  }
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

FeatureMatrix FeatureMatrix::select_rows(
    std::span<const std::size_t> indices) const {
  FeatureMatrix out(indices.size(), cols_);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(indices[i] * cols_),
                cols_, out.data_.begin() + static_cast<std::ptrdiff_t>(i * cols_));
  }
  return out;
}

ParsedLine parse_score_line(std::string_view line) {
  ParsedLine parsed;
  if (csv::trim(line).empty()) return parsed;
  parsed.status = LineStatus::kMalformed;

  const json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (obj.is_discarded() || !obj.is_object()) return parsed;

  const auto model = obj.find("model_id");
  const auto ts = obj.find("ts");
  const auto score = obj.find("score");
  if (model == obj.end() || !model->is_string()) return parsed;
  if (ts == obj.end() || !(ts->is_number_integer() || ts->is_number_unsigned())) {
    return parsed;
  }
  if (score == obj.end() || !score->is_number()) return parsed;

  ScoreRecord& r = parsed.record;
  r.model_id = model->get<std::string>();
  if (ts->is_number_unsigned()) {
    const auto u = ts->get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
      return parsed;
    }
    r.ts = static_cast<std::int64_t>(u);
  } else {
    r.ts = ts->get<std::int64_t>();
  }
  if (r.ts < 0) return parsed;
  r.score = score->get<double>();
  if (!std::isfinite(r.score)) return parsed;

  bool ok = true;
  r.entity_id = optional_text(obj, "entity_id", ok);
  r.class_label = optional_text(obj, "class", ok);
  if (!ok) return parsed;

  if (const auto label = obj.find("label");
      label != obj.end() && !label->is_null()) {
    if (label->is_boolean()) {
      r.true_label = label->get<bool>() ? 1 : 0;
    } else if (label->is_number_integer() || label->is_number_unsigned()) {
      const auto v = label->get<std::int64_t>();
      if (v != 0 && v != 1) return parsed;
      r.true_label = static_cast<int>(v);
    } else {
      return parsed;
    }
  }
  parsed.status = LineStatus::kRecord;
  return parsed;
}

void validate_score_range(const ScoreRecord& record, std::size_t line_no) {
  if (record.score < 0.0 || record.score > 1.0) {
    std::ostringstream os;
    os << "line " << line_no << ": score " << record.score
       << " outside [0, 1] (use --rescale to min-max rescale the file)";
    throw InputError(os.str());
  }
}

ScoreLog parse_score_log(std::istream& in, const ScoreLogOptions& options,
                         std::string_view source) {
  ScoreLog log;
  std::string line;
  std::size_t line_no = 0;
  while (csv::next_line(in, line, line_no)) {
    ++log.lines;
    ParsedLine parsed = parse_score_line(line);
    if (parsed.status == LineStatus::kMalformed) {
      ++log.skipped;
      continue;
    }
    if (!options.rescale) {
      try {
        validate_score_range(parsed.record, line_no);
      } catch (const InputError& e) {
        throw InputError(std::string(source) + ": " + e.what());
      }
    }
    log.records.push_back(std::move(parsed.record));
  }
  if (in.bad()) {
    throw InputError(std::string(source) + ": read error");
  }

  // A lone bad line is tolerated; beyond that the fraction decides.
  if (log.skipped > 1 &&
      static_cast<double>(log.skipped) >
          options.max_malformed_fraction * static_cast<double>(log.lines)) {
    std::ostringstream os;
    os << source << ": " << log.skipped << " of " << log.lines
       << " lines malformed (limit " << options.max_malformed_fraction * 100.0
       << "%)";
    throw InputError(os.str());
  }

  if (options.rescale && !log.records.empty()) {
    const auto [lo, hi] = std::minmax_element(
        log.records.begin(), log.records.end(),
        [](const ScoreRecord& a, const ScoreRecord& b) { return a.score < b.score; });
    const double min = lo->score;
    const double max = hi->score;
    if (!(max > min)) {
      throw InputError(std::string(source) +
                       ": cannot rescale a log whose scores are all equal");
    }
    for (auto& r : log.records) {
      r.score = (r.score - min) / (max - min);
    }
  }
  return log;
}

ScoreLog read_score_log(const std::filesystem::path& path,
                        const ScoreLogOptions& options) {
  auto in = open_input(path);
  return parse_score_log(in, options, path.string());
}

std::string format_score_record(const ScoreRecord& record) {
  json obj = json::object();
  obj["model_id"] = record.model_id;
  obj["ts"] = record.ts;
  obj["score"] = record.score;
  if (record.entity_id) obj["entity_id"] = *record.entity_id;
  if (record.class_label) obj["class"] = *record.class_label;
  if (record.true_label) obj["label"] = *record.true_label;
  return obj.dump();
}

void write_score_log(std::ostream& out, std::span<const ScoreRecord> records) {
  for (const auto& r : records) {
    out << format_score_record(r) << '\n';
  }
}

std::vector<PairedPrediction> parse_paired(std::istream& in,
                                           std::string_view source) {
  std::string line;
  std::size_t line_no = 0;
  if (!csv::next_line(in, line, line_no)) {
    throw InputError(std::string(source) + ": missing CSV header");
  }
  const auto header = csv::split_line(line);
  const auto entity_col = csv::column_index(header, "entity_id");
  const auto a_col = csv::column_index(header, "pred_a");
  const auto b_col = csv::column_index(header, "pred_b");
  const auto label_col = csv::column_index(header, "label");
  for (const auto& [name, col] : {std::pair{"entity_id", entity_col},
                                  std::pair{"pred_a", a_col},
                                  std::pair{"pred_b", b_col}}) {
    if (!col) {
      throw InputError(std::string(source) + ": missing required column '" +
                       name + "'");
    }
  }

  std::vector<PairedPrediction> out;
  while (csv::next_line(in, line, line_no)) {
    const auto cells = csv::split_line(line);
    if (cells.size() != header.size()) {
      throw InputError(where(source, line_no) + ": expected " +
                       std::to_string(header.size()) + " fields, found " +
                       std::to_string(cells.size()));
    }
    PairedPrediction p;
    p.entity_id = cells[*entity_col];
    const auto a = csv::parse_double(cells[*a_col]);
    const auto b = csv::parse_double(cells[*b_col]);
    if (!a || !b) {
      throw InputError(where(source, line_no) + ": pred_a and pred_b must be numeric");
    }
    if (*a < 0.0 || *a > 1.0 || *b < 0.0 || *b > 1.0) {
      throw InputError(where(source, line_no) + ": predictions must lie in [0, 1]");
    }
    p.pred_a = *a;
    p.pred_b = *b;
    if (label_col && !csv::trim(cells[*label_col]).empty()) {
      p.true_label = parse_binary(cells[*label_col]);
      if (!p.true_label) {
        throw InputError(where(source, line_no) + ": label must be 0 or 1");
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<PairedPrediction> read_paired(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_paired(in, path.string());
}

TabularDataset parse_tabular(std::istream& in, std::string_view target_column,
                             const TabularOptions& options,
                             std::string_view source) {
  std::string line;
  std::size_t line_no = 0;
  if (!csv::next_line(in, line, line_no)) {
    throw InputError(std::string(source) + ": missing CSV header");
  }
  const auto header = csv::split_line(line);
  const auto target_col = csv::column_index(header, target_column);
  if (!target_col) {
    throw InputError(std::string(source) + ": target column '" +
                     std::string(target_column) + "' not found");
  }

  TabularDataset ds;
  std::vector<std::size_t> feature_cols;
  for (const auto& name : options.drop_columns) {
    if (!csv::column_index(header, name)) {
      throw InputError(std::string(source) + ": column '" + name + "' not found");
    }
    if (name == target_column) {
      throw InputError(std::string(source) + ": cannot drop the target column '" +
                       name + "'");
    }
  }
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == *target_col) continue;
    if (std::find(options.drop_columns.begin(), options.drop_columns.end(),
                  header[c]) != options.drop_columns.end()) {
      continue;
    }
    feature_cols.push_back(c);
    ds.feature_names.push_back(header[c]);
  }
  const double kMissing = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> row(feature_cols.size());
  std::vector<std::pair<std::size_t, std::size_t>> missing;  // (row, col)

  while (csv::next_line(in, line, line_no)) {
    const auto cells = csv::split_line(line);
    if (cells.size() != header.size()) {
      throw InputError(where(source, line_no) + ": expected " +
                       std::to_string(header.size()) + " fields, found " +
                       std::to_string(cells.size()));
    }
    auto t = parse_binary(cells[*target_col]);
    if (!t && options.allow_missing_target && is_missing_cell(cells[*target_col])) {
      t = kMissingTarget;
    }
    if (!t) {
      throw InputError(where(source, line_no) + ": target '" +
                       std::string(target_column) + "' must be 0 or 1, got '" +
                       cells[*target_col] + "'");
    }
    for (std::size_t j = 0; j < feature_cols.size(); ++j) {
      const auto& cell = cells[feature_cols[j]];
      if (is_missing_cell(cell)) {
        if (!options.impute) {
          throw InputError(where(source, line_no) + ": missing value in column '" +
                           ds.feature_names[j] + "' (use --impute for mean imputation)");
        }
        row[j] = kMissing;
        missing.emplace_back(ds.target.size(), j);
        continue;
      }
      const auto v = csv::parse_double(cell);
      if (!v) {
        throw InputError(where(source, line_no) + ": non-numeric value '" + cell +
                         "' in column '" + ds.feature_names[j] + "'");
      }
      row[j] = *v;
    }
    if (ds.target.empty()) ds.features = FeatureMatrix(0, feature_cols.size());
    ds.features.append_row(row);
    ds.target.push_back(*t);
  }
  if (ds.target.empty()) {
    throw InputError(std::string(source) + ": no data rows");
  }

  if (!missing.empty()) {
    const std::size_t cols = feature_cols.size();
    std::vector<double> sum(cols, 0.0);
    std::vector<std::size_t> present(cols, 0);
    for (std::size_t r = 0; r < ds.features.rows(); ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        const double v = ds.features(r, c);
        if (!std::isnan(v)) {
          sum[c] += v;
          ++present[c];
        }
      }
    }
    for (const auto& [r, c] : missing) {
      if (present[c] == 0) {
        throw InputError(std::string(source) + ": column '" + ds.feature_names[c] +
                         "' has no values to impute from");
      }
      ds.features(r, c) = sum[c] / static_cast<double>(present[c]);
    }
  }
  return ds;
}

TabularDataset read_tabular(const std::filesystem::path& path,
                            std::string_view target_column,
                            const TabularOptions& options) {
  auto in = open_input(path);
  return parse_tabular(in, target_column, options, path.string());
}

}  // namespace scorescope
