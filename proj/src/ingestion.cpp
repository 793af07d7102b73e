#include "xeq/ingestion.hpp"

#include <charconv>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

#include "xeq/content_validity.hpp"
#include "xeq/csv.hpp"
#include "xeq/errors.hpp"

namespace xeq {

namespace {

bool parse_int(const std::string& text, int& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool parse_double(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  try {
    size_t pos = 0;
    out = std::stod(t, &pos);
    return pos == t.size();
  } catch (const std::exception&) {
    return false;
  }
}

// Header name -> column index, names trimmed and matched case-insensitively.
std::unordered_map<std::string, int> index_header(
    const std::vector<std::string>& header) {
  std::unordered_map<std::string, int> out;
  for (size_t i = 0; i < header.size(); ++i) {
    std::string key = trim(header[i]);
    for (char& ch : key) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    out[key] = static_cast<int>(i);
  }
  return out;
}

int require_column(const std::unordered_map<std::string, int>& index,
                   const std::string& name, const std::string& path) {
  auto it = index.find(name);
  if (it == index.end()) {
    fail(Errc::MissingColumn, "'" + path + "' lacks column '" + name + "'");
  }
  return it->second;
}

int encode_cell(const std::string& cell, const ScaleDefinition& scale,
                int line, int column_1based) {
  int code = 0;
  if (parse_int(cell, code)) {
    if (!scale.is_valid_code(code)) {
      fail(Errc::ParseError, "line " + std::to_string(line) + ", item_" +
                                 std::to_string(column_1based) + ": code " +
                                 std::to_string(code) +
                                 " outside the scale's likert codes");
    }
    return code;
  }
  return encode_response(cell, scale);  // throws UnknownLabel on no match
}

}  // namespace

const char* exclusion_reason_name(ExclusionReason reason) {
  switch (reason) {
    case ExclusionReason::UnderTime: return "UnderTime";
    case ExclusionReason::PatternResponse: return "PatternResponse";
  }
  return "Unknown";
}

ScaleDefinition load_scale(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::ParseError, "cannot open scale file '" + path + "'");

  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::ParseError, "scale file '" + path + "': " + e.what());
  }

  ScaleDefinition scale;
  try {
    scale.scale_id = doc.at("scale_id").get<std::string>();
    scale.version = doc.at("version").get<std::string>();
    const auto& labels = doc.at("likert_labels");
    if (labels.size() != 5) {
      fail(Errc::ParseError, "scale '" + path + "' needs 5 likert labels");
    }
    for (size_t i = 0; i < 5; ++i) {
      scale.likert_labels[i] = labels.at(i).get<std::string>();
    }
    if (doc.contains("likert_codes")) {
      const auto& codes = doc.at("likert_codes");
      if (codes.size() != 5) {
        fail(Errc::ParseError, "scale '" + path + "' needs 5 likert codes");
      }
      for (size_t i = 0; i < 5; ++i) scale.likert_codes[i] = codes.at(i).get<int>();
    }
    for (const auto& item : doc.at("items")) {
      scale.items.push_back(Item{item.at("id").get<int>(),
                                 item.at("text").get<std::string>(),
                                 item.at("dimension").get<std::string>()});
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::ParseError, "scale file '" + path + "': " + e.what());
  }
  scale.validate();
  return scale;
}

LoadResult load_responses(const std::string& path,
                          const ScaleDefinition& scale,
                          const LoadOptions& options) {
  const auto rows = csv::read_file(path);
  if (rows.empty()) fail(Errc::ParseError, "'" + path + "' is empty");

  const auto header = index_header(rows[0]);
  const int col_id = require_column(header, "respondent_id", path);
  const int col_group = require_column(header, "group", path);
  const int col_duration = require_column(header, "duration_seconds", path);
  const int col_allocated = require_column(header, "allocated_seconds", path);
  const int m = scale.item_count();
  std::vector<int> item_cols(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) {
    item_cols[static_cast<size_t>(i)] =
        require_column(header, "item_" + std::to_string(i + 1), path);
  }

  LoadResult result;
  std::vector<RespondentMeta> metas;
  std::vector<std::vector<int>> codes;

  for (size_t row_idx = 1; row_idx < rows.size(); ++row_idx) {
    const auto& row = rows[row_idx];
    const int line = static_cast<int>(row_idx) + 1;
    if (row.size() != rows[0].size()) {
      fail(Errc::ParseError, "line " + std::to_string(line) + " has " +
                                 std::to_string(row.size()) + " cells, header has " +
                                 std::to_string(rows[0].size()));
    }

    const std::string rid = trim(row[static_cast<size_t>(col_id)]);
    std::string blank_reason;
    if (rid.empty()) blank_reason = "blank respondent_id";
    if (blank_reason.empty() && trim(row[static_cast<size_t>(col_duration)]).empty()) {
      blank_reason = "blank duration_seconds";
    }
    if (blank_reason.empty() && trim(row[static_cast<size_t>(col_allocated)]).empty()) {
      blank_reason = "blank allocated_seconds";
    }
    if (blank_reason.empty()) {
      for (int i = 0; i < m; ++i) {
        if (trim(row[static_cast<size_t>(item_cols[static_cast<size_t>(i)])]).empty()) {
          blank_reason = "blank item_" + std::to_string(i + 1);
          break;
        }
      }
    }
    if (!blank_reason.empty()) {
      if (options.strict_missing) {
        fail(Errc::MissingValue,
             "line " + std::to_string(line) + ": " + blank_reason);
      }
      result.dropped.push_back(DroppedRow{line, rid, blank_reason});
      continue;
    }

    RespondentMeta meta;
    meta.respondent_id = rid;
    meta.group = trim(row[static_cast<size_t>(col_group)]);
    if (!parse_double(row[static_cast<size_t>(col_duration)], meta.duration_seconds) ||
        meta.duration_seconds < 0.0) {
      fail(Errc::ParseError,
           "line " + std::to_string(line) + ": bad duration_seconds '" +
               row[static_cast<size_t>(col_duration)] + "'");
    }
    if (!parse_double(row[static_cast<size_t>(col_allocated)], meta.allocated_seconds) ||
        meta.allocated_seconds <= 0.0) {
      fail(Errc::ParseError,
           "line " + std::to_string(line) + ": bad allocated_seconds '" +
               row[static_cast<size_t>(col_allocated)] + "'");
    }

    std::vector<int> row_codes(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
      row_codes[static_cast<size_t>(i)] = encode_cell(
          row[static_cast<size_t>(item_cols[static_cast<size_t>(i)])], scale,
          line, i + 1);
    }
    metas.push_back(std::move(meta));
    codes.push_back(std::move(row_codes));
  }

  if (metas.empty()) {
    fail(Errc::EmptyDataset, "'" + path + "' yields no usable rows (" +
                                 std::to_string(result.dropped.size()) +
                                 " dropped)");
  }

  ResponseMatrix matrix;
  matrix.scale_id = scale.scale_id;
  matrix.wave = options.wave;
  matrix.respondents = std::move(metas);
  matrix.values.resize(static_cast<Eigen::Index>(codes.size()), m);
  for (size_t r = 0; r < codes.size(); ++r) {
    for (int c = 0; c < m; ++c) {
      matrix.values(static_cast<Eigen::Index>(r), c) = codes[r][static_cast<size_t>(c)];
    }
  }
  matrix.validate(scale);
  result.matrix = std::move(matrix);
  return result;
}

ExpertRatingMatrix load_expert_ratings(const std::string& path, int n_items,
                                       const std::array<std::string, 5>& labels) {
  const auto rows = csv::read_file(path);
  if (rows.empty()) fail(Errc::ParseError, "'" + path + "' is empty");

  const auto header = index_header(rows[0]);
  const int col_id = require_column(header, "expert_id", path);
  std::vector<int> item_cols(static_cast<size_t>(n_items));
  for (int i = 0; i < n_items; ++i) {
    item_cols[static_cast<size_t>(i)] =
        require_column(header, "item_" + std::to_string(i + 1), path);
  }

  ExpertRatingMatrix ratings;
  std::vector<std::vector<int>> values;
  for (size_t row_idx = 1; row_idx < rows.size(); ++row_idx) {
    const auto& row = rows[row_idx];
    const int line = static_cast<int>(row_idx) + 1;
    if (row.size() != rows[0].size()) {
      fail(Errc::ParseError, "line " + std::to_string(line) + " has " +
                                 std::to_string(row.size()) +
                                 " cells, header has " +
                                 std::to_string(rows[0].size()));
    }
    ratings.experts.push_back(trim(row[static_cast<size_t>(col_id)]));
    std::vector<int> rating_row(static_cast<size_t>(n_items));
    for (int i = 0; i < n_items; ++i) {
      const std::string& cell = row[static_cast<size_t>(item_cols[static_cast<size_t>(i)])];
      if (trim(cell).empty()) {
        fail(Errc::MissingValue, "line " + std::to_string(line) +
                                     ": blank rating for item_" +
                                     std::to_string(i + 1));
      }
      int code = 0;
      if (parse_int(cell, code)) {
        if (code < 1 || code > 5) {
          fail(Errc::ParseError, "line " + std::to_string(line) + ", item_" +
                                     std::to_string(i + 1) + ": rating " +
                                     std::to_string(code) + " outside 1..5");
        }
      } else {
        code = 0;
        for (size_t l = 0; l < labels.size(); ++l) {
          if (label_matches(cell, labels[l])) {
            code = static_cast<int>(l) + 1;
            break;
          }
        }
        if (code == 0) {
          fail(Errc::UnknownLabel, "line " + std::to_string(line) + ", item_" +
                                       std::to_string(i + 1) + ": '" +
                                       trim(cell) + "' is not a rating label");
        }
      }
      rating_row[static_cast<size_t>(i)] = code;
    }
    values.push_back(std::move(rating_row));
  }

  if (values.empty()) fail(Errc::EmptyPanel, "'" + path + "' has no experts");
  ratings.values.resize(static_cast<Eigen::Index>(values.size()), n_items);
  for (size_t r = 0; r < values.size(); ++r) {
    for (int c = 0; c < n_items; ++c) {
      ratings.values(static_cast<Eigen::Index>(r), c) = values[r][static_cast<size_t>(c)];
    }
  }
  ratings.validate();
  return ratings;
}

namespace {

bool is_pattern_response(const Eigen::MatrixXi& values, int row,
                         const PatternRule& rule) {
  const int m = static_cast<int>(values.cols());
  if (rule.straight_line) {
    bool constant = true;
    for (int c = 1; c < m; ++c) {
      if (values(row, c) != values(row, 0)) {
        constant = false;
        break;
      }
    }
    if (constant) return true;
  }
  if (rule.max_constant_run_fraction <= 1.0) {
    int longest = 1;
    int current = 1;
    for (int c = 1; c < m; ++c) {
      current = (values(row, c) == values(row, c - 1)) ? current + 1 : 1;
      longest = std::max(longest, current);
    }
    if (static_cast<double>(longest) >=
        rule.max_constant_run_fraction * static_cast<double>(m)) {
      return true;
    }
  }
  return false;
}

}  // namespace

ExclusionReport apply_attention_filters(const ResponseMatrix& matrix,
                                        double min_time_fraction,
                                        const PatternRule& rule) {
  if (min_time_fraction <= 0.0 || min_time_fraction > 1.0) {
    fail(Errc::BadConfig, "min_time_fraction must lie in (0, 1]");
  }

  ExclusionReport report;
  report.min_time_fraction = min_time_fraction;
  report.rule = rule;

  std::vector<int> kept_rows;
  for (int r = 0; r < matrix.n_respondents(); ++r) {
    const RespondentMeta& meta = matrix.respondents[static_cast<size_t>(r)];
    if (meta.duration_seconds < min_time_fraction * meta.allocated_seconds) {
      report.excluded.emplace_back(meta.respondent_id,
                                   ExclusionReason::UnderTime);
      continue;
    }
    if (is_pattern_response(matrix.values, r, rule)) {
      report.excluded.emplace_back(meta.respondent_id,
                                   ExclusionReason::PatternResponse);
      continue;
    }
    kept_rows.push_back(r);
  }

  report.retained.scale_id = matrix.scale_id;
  report.retained.wave = matrix.wave;
  report.retained.values.resize(static_cast<Eigen::Index>(kept_rows.size()),
                                matrix.values.cols());
  for (size_t i = 0; i < kept_rows.size(); ++i) {
    report.retained.respondents.push_back(
        matrix.respondents[static_cast<size_t>(kept_rows[i])]);
    report.retained.values.row(static_cast<Eigen::Index>(i)) =
        matrix.values.row(kept_rows[i]);
  }
  return report;
}

void write_responses_csv(const ResponseMatrix& matrix,
                         const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::WriteError, "cannot open '" + path + "' for writing");
  out << "respondent_id,group,duration_seconds,allocated_seconds";
  for (int c = 0; c < matrix.n_items(); ++c) out << ",item_" << (c + 1);
  out << '\n';
  for (int r = 0; r < matrix.n_respondents(); ++r) {
    const RespondentMeta& meta = matrix.respondents[static_cast<size_t>(r)];
    out << csv::escape(meta.respondent_id) << ',' << csv::escape(meta.group)
        << ',' << meta.duration_seconds << ',' << meta.allocated_seconds;
    for (int c = 0; c < matrix.n_items(); ++c) out << ',' << matrix.values(r, c);
    out << '\n';
  }
  if (!out) fail(Errc::WriteError, "write to '" + path + "' failed");
}

RetestPairs pair_retest(const ResponseMatrix& test,
                        const ResponseMatrix& retest) {
  if (test.scale_id != retest.scale_id) {
    fail(Errc::DimensionMismatch, "waves reference different scales ('" +
                                      test.scale_id + "' vs '" +
                                      retest.scale_id + "')");
  }
  if (test.n_items() != retest.n_items()) {
    fail(Errc::DimensionMismatch, "waves have different item counts");
  }

  auto index_wave = [](const ResponseMatrix& wave, const char* name) {
    std::unordered_map<std::string, int> index;
    for (int r = 0; r < wave.n_respondents(); ++r) {
      const std::string& id = wave.respondents[static_cast<size_t>(r)].respondent_id;
      if (!index.emplace(id, r).second) {
        fail(Errc::DuplicateRespondent,
             "respondent '" + id + "' appears twice in the " + name + " wave");
      }
    }
    return index;
  };
  const auto test_index = index_wave(test, "test");
  const auto retest_index = index_wave(retest, "retest");

  RetestPairs out;
  for (int r = 0; r < test.n_respondents(); ++r) {
    const std::string& id = test.respondents[static_cast<size_t>(r)].respondent_id;
    auto it = retest_index.find(id);
    if (it == retest_index.end()) {
      out.unmatched_test.push_back(id);
      continue;
    }
    out.pairs.push_back(RetestPair{id, test.values.row(r).transpose(),
                                   retest.values.row(it->second).transpose()});
  }
  for (int r = 0; r < retest.n_respondents(); ++r) {
    const std::string& id = retest.respondents[static_cast<size_t>(r)].respondent_id;
    if (test_index.find(id) == test_index.end()) {
      out.unmatched_retest.push_back(id);
    }
  }
  return out;
}

}  // namespace xeq
