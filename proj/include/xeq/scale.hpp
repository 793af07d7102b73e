#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace xeq {

// One questionnaire item. Dimensions are free-form labels so instruments
// other than the built-in reference scale can define their own; the
// reference scale uses Learning / Utility / Fulfilment / Engagement.
struct Item {
  int id = 0;  // 1-based position in the scale
  std::string text;
  std::string dimension;
};

// An instrument: ordered items plus the Likert response format. Immutable
// after construction (validate() is called by every loader), so concurrent
// reads need no synchronization.
struct ScaleDefinition {
  std::string scale_id;
  std::string version;
  std::vector<Item> items;
  std::array<std::string, 5> likert_labels;
  std::array<int, 5> likert_codes{1, 2, 3, 4, 5};

  int item_count() const { return static_cast<int>(items.size()); }

  // Dimension labels in order of first appearance over the item list.
  std::vector<std::string> dimensions() const;

  // 0-based item positions belonging to one dimension.
  std::vector<int> dimension_items(const std::string& dimension) const;

  bool is_valid_code(int code) const;
  bool has_item(int item_id) const;

  // Throws on duplicate item ids, fewer than 2 items, empty dimensions,
  // or non-increasing codes.
  void validate() const;

  // The 18-item XEQ instrument shipped with the toolkit.
  static ScaleDefinition xeq_reference();
};

enum class Wave { Test, Retest };

struct RespondentMeta {
  std::string respondent_id;
  std::string group;  // empty when the respondent has no arm assignment
  double duration_seconds = 0.0;
  double allocated_seconds = 1.0;
};

// N respondents by M items of Likert codes, tied to one scale and wave.
struct ResponseMatrix {
  std::string scale_id;
  Wave wave = Wave::Test;
  std::vector<RespondentMeta> respondents;
  Eigen::MatrixXi values;  // N x M

  int n_respondents() const { return static_cast<int>(values.rows()); }
  int n_items() const { return static_cast<int>(values.cols()); }

  // Item column as doubles, ready for the statistics layer.
  std::vector<double> item_column(int item_id) const;

  // Per-respondent row sums as doubles.
  std::vector<double> participant_totals() const;

  // Checks cell ranges against the scale, N >= 1, M = scale item count,
  // and respondent id uniqueness within the wave.
  void validate(const ScaleDefinition& scale) const;
};

// Positional label -> code match, case-insensitive after trimming.
int encode_response(const std::string& label, const ScaleDefinition& scale);

// Sum of one respondent's codes; the scale is only consulted for M.
int participant_total(std::span<const int> row, const ScaleDefinition& scale);

// Column sum over respondents for one item.
int item_total(const ResponseMatrix& matrix, int item_id);

// Case-insensitive comparison after trimming ASCII whitespace. Shared by
// every label-matching path (responses, expert ratings, CLI parsing).
bool label_matches(const std::string& a, const std::string& b);
std::string trim(const std::string& s);

}  // namespace xeq
