#include "xeq/scale.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "xeq/errors.hpp"

namespace xeq {

std::string trim(const std::string& s) {
  auto begin = s.begin();
  auto end = s.end();
  while (begin != end && std::isspace(static_cast<unsigned char>(*begin))) ++begin;
  while (end != begin && std::isspace(static_cast<unsigned char>(*(end - 1)))) --end;
  return std::string(begin, end);
}

bool label_matches(const std::string& a, const std::string& b) {
  const std::string ta = trim(a);
  const std::string tb = trim(b);
  if (ta.size() != tb.size()) return false;
  for (size_t i = 0; i < ta.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(ta[i])) !=
        std::tolower(static_cast<unsigned char>(tb[i]))) {
      return false;
    }
  }
  return true;
}

std::vector<std::string> ScaleDefinition::dimensions() const {
  std::vector<std::string> out;
  for (const Item& item : items) {
    if (std::find(out.begin(), out.end(), item.dimension) == out.end()) {
      out.push_back(item.dimension);
    }
  }
  return out;
}

std::vector<int> ScaleDefinition::dimension_items(
    const std::string& dimension) const {
  std::vector<int> out;
  for (size_t i = 0; i < items.size(); ++i) {
    if (items[i].dimension == dimension) out.push_back(static_cast<int>(i));
  }
  return out;
}

bool ScaleDefinition::is_valid_code(int code) const {
  return std::find(likert_codes.begin(), likert_codes.end(), code) !=
         likert_codes.end();
}

bool ScaleDefinition::has_item(int item_id) const {
  return std::any_of(items.begin(), items.end(),
                     [item_id](const Item& it) { return it.id == item_id; });
}

void ScaleDefinition::validate() const {
  if (items.size() < 2) {
    fail(Errc::EmptyScale, "scale '" + scale_id + "' needs at least 2 items");
  }
  std::unordered_set<int> seen_ids;
  for (const Item& item : items) {
    if (!seen_ids.insert(item.id).second) {
      fail(Errc::ParseError, "duplicate item id " + std::to_string(item.id) +
                                 " in scale '" + scale_id + "'");
    }
    if (trim(item.dimension).empty()) {
      fail(Errc::ParseError, "item " + std::to_string(item.id) +
                                 " has no dimension label");
    }
  }
  for (size_t i = 1; i < likert_codes.size(); ++i) {
    if (likert_codes[i] <= likert_codes[i - 1]) {
      fail(Errc::ParseError, "likert codes must be strictly increasing");
    }
  }
  for (const std::string& label : likert_labels) {
    if (trim(label).empty()) fail(Errc::ParseError, "empty likert label");
  }
}

std::vector<double> ResponseMatrix::item_column(int item_id) const {
  const int col = item_id - 1;
  if (col < 0 || col >= n_items()) {
    fail(Errc::UnknownItem, "item id " + std::to_string(item_id) +
                                " outside 1.." + std::to_string(n_items()));
  }
  std::vector<double> out(static_cast<size_t>(n_respondents()));
  for (int r = 0; r < n_respondents(); ++r) {
    out[static_cast<size_t>(r)] = static_cast<double>(values(r, col));
  }
  return out;
}

std::vector<double> ResponseMatrix::participant_totals() const {
  std::vector<double> out(static_cast<size_t>(n_respondents()));
  for (int r = 0; r < n_respondents(); ++r) {
    out[static_cast<size_t>(r)] = static_cast<double>(values.row(r).sum());
  }
  return out;
}

void ResponseMatrix::validate(const ScaleDefinition& scale) const {
  if (n_respondents() < 1) {
    fail(Errc::EmptyDataset, "response matrix for '" + scale_id +
                                 "' has no respondents");
  }
  if (n_items() != scale.item_count()) {
    fail(Errc::DimensionMismatch,
         "matrix has " + std::to_string(n_items()) + " columns, scale '" +
             scale.scale_id + "' defines " +
             std::to_string(scale.item_count()) + " items");
  }
  if (static_cast<int>(respondents.size()) != n_respondents()) {
    fail(Errc::DimensionMismatch, "respondent metadata rows do not match N");
  }
  std::unordered_set<std::string> ids;
  for (const RespondentMeta& meta : respondents) {
    if (!ids.insert(meta.respondent_id).second) {
      fail(Errc::DuplicateRespondent,
           "respondent '" + meta.respondent_id + "' appears twice in wave");
    }
    if (meta.duration_seconds < 0.0) {
      fail(Errc::ParseError,
           "negative duration for respondent '" + meta.respondent_id + "'");
    }
    if (meta.allocated_seconds <= 0.0) {
      fail(Errc::ParseError, "allocated duration must be positive for '" +
                                 meta.respondent_id + "'");
    }
  }
  for (int r = 0; r < n_respondents(); ++r) {
    for (int c = 0; c < n_items(); ++c) {
      if (!scale.is_valid_code(values(r, c))) {
        fail(Errc::ParseError,
             "cell (" + respondents[static_cast<size_t>(r)].respondent_id +
                 ", item_" + std::to_string(c + 1) + ") holds code " +
                 std::to_string(values(r, c)) +
                 " outside the scale's likert codes");
      }
    }
  }
}

int encode_response(const std::string& label, const ScaleDefinition& scale) {
  for (size_t i = 0; i < scale.likert_labels.size(); ++i) {
    if (label_matches(label, scale.likert_labels[i])) {
      return scale.likert_codes[i];
    }
  }
  fail(Errc::UnknownLabel,
       "'" + trim(label) + "' is not a likert label of scale '" +
           scale.scale_id + "'");
}

int participant_total(std::span<const int> row, const ScaleDefinition& scale) {
  if (static_cast<int>(row.size()) != scale.item_count()) {
    fail(Errc::DimensionMismatch,
         "row has " + std::to_string(row.size()) + " entries, scale needs " +
             std::to_string(scale.item_count()));
  }
  int total = 0;
  for (int code : row) {
    if (!scale.is_valid_code(code)) {
      fail(Errc::ParseError,
           "code " + std::to_string(code) + " outside the scale's codes");
    }
    total += code;
  }
  return total;
}

int item_total(const ResponseMatrix& matrix, int item_id) {
  if (matrix.n_respondents() < 1) {
    fail(Errc::EmptyDataset, "item_total on empty matrix");
  }
  const int col = item_id - 1;
  if (col < 0 || col >= matrix.n_items()) {
    fail(Errc::UnknownItem, "item id " + std::to_string(item_id) +
                                " outside 1.." +
                                std::to_string(matrix.n_items()));
  }
  return matrix.values.col(col).sum();
}

ScaleDefinition ScaleDefinition::xeq_reference() {
  ScaleDefinition scale;
  scale.scale_id = "xeq";
  scale.version = "1.0";
  scale.likert_labels = {"Strongly Disagree", "Somewhat Disagree", "Neutral",
                         "Somewhat Agree", "Strongly Agree"};
  scale.likert_codes = {1, 2, 3, 4, 5};
  scale.items = {
      {1,
       "The explanations received throughout the experience were consistent.",
       "Engagement"},
      {2,
       "The experience helped me understand the reliability of the AI system.",
       "Learning"},
      {3, "I am confident about using the AI system.", "Utility"},
      {4, "The information presented during the experience was clear.",
       "Learning"},
      {5, "The experience was consistent with my expectations.", "Fulfilment"},
      {6,
       "The presentation of the experience was appropriate for my "
       "requirements.",
       "Fulfilment"},
      {7,
       "The experience has improved my understanding of how the AI system "
       "works.",
       "Learning"},
      {8, "The experience helped me build trust in the AI system.",
       "Learning"},
      {9, "The experience helped me make more informed decisions.", "Utility"},
      {10, "I received the explanations in a timely and efficient manner.",
       "Engagement"},
      {11,
       "The information presented was personalised to the requirements of my "
       "role.",
       "Utility"},
      {12,
       "The information presented was understandable within the requirements "
       "of my role.",
       "Utility"},
      {13,
       "The information presented showed me that the AI system performs "
       "well.",
       "Fulfilment"},
      {14,
       "The experience helped to complete the intended task using the AI "
       "system.",
       "Utility"},
      {15, "The experience progressed sensibly.", "Engagement"},
      {16, "The experience was satisfying.", "Fulfilment"},
      {17,
       "The information presented during the experience was sufficiently "
       "detailed.",
       "Utility"},
      {18, "The experience provided answers to all of my explanation needs.",
       "Fulfilment"},
  };
  scale.validate();
  return scale;
}

}  // namespace xeq
