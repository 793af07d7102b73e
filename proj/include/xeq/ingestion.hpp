#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "xeq/scale.hpp"

namespace xeq {

struct ExpertRatingMatrix;

enum class ExclusionReason { UnderTime, PatternResponse };

const char* exclusion_reason_name(ExclusionReason reason);

// Attention-check pattern rule. A row is a pattern response when it
// straight-lines (zero variance) or its longest constant run covers at
// least max_constant_run_fraction of the items. Both knobs are recorded in
// reports so an exclusion can be reproduced.
struct PatternRule {
  bool straight_line = true;
  double max_constant_run_fraction = 0.8;  // > 1 disables the run check
};

struct ExclusionReport {
  ResponseMatrix retained;
  std::vector<std::pair<std::string, ExclusionReason>> excluded;
  double min_time_fraction = 0.5;
  PatternRule rule;
};

struct DroppedRow {
  int line_number = 0;  // 1-based, header is line 1
  std::string respondent_id;
  std::string reason;
};

struct LoadOptions {
  // Default: a blank cell drops the row (listwise deletion), recorded in
  // LoadResult::dropped. Strict mode turns any blank into a MissingValue
  // error instead.
  bool strict_missing = false;
  Wave wave = Wave::Test;
};

struct LoadResult {
  ResponseMatrix matrix;
  std::vector<DroppedRow> dropped;
};

struct RetestPair {
  std::string respondent_id;
  Eigen::VectorXi test_row;
  Eigen::VectorXi retest_row;
};

struct RetestPairs {
  std::vector<RetestPair> pairs;
  std::vector<std::string> unmatched_test;
  std::vector<std::string> unmatched_retest;
};

// Scale definition from its JSON document (scale_id, version,
// likert_labels, items[{id, text, dimension}], optional likert_codes).
ScaleDefinition load_scale(const std::string& path);

// Response CSV with header respondent_id, group, duration_seconds,
// allocated_seconds, item_1..item_M. Cells hold integer codes or the
// scale's labels. Throws ParseError / UnknownLabel / MissingColumn on
// malformed content; blank cells follow LoadOptions.
LoadResult load_responses(const std::string& path,
                          const ScaleDefinition& scale,
                          const LoadOptions& options = {});

// Expert rating CSV with header expert_id, item_1..item_M. Cells hold
// codes 1..5 or the given rating labels (relevance labels by default).
ExpertRatingMatrix load_expert_ratings(
    const std::string& path, int n_items,
    const std::array<std::string, 5>& labels);

ExclusionReport apply_attention_filters(const ResponseMatrix& matrix,
                                        double min_time_fraction = 0.5,
                                        const PatternRule& rule = {});

// Inner join on respondent_id; ids present in only one wave land in the
// unmatched lists instead of being dropped silently. Pair order follows
// the test wave.
RetestPairs pair_retest(const ResponseMatrix& test,
                        const ResponseMatrix& retest);

// Inverse of load_responses: writes a CSV the loader reads back verbatim
// (integer codes, same header layout).
void write_responses_csv(const ResponseMatrix& matrix,
                         const std::string& path);

}  // namespace xeq
