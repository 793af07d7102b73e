#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "xeq/ingestion.hpp"
#include "xeq/scale.hpp"

namespace xeq::reliability {

// Pearson product-moment correlation. Throws LengthMismatch when the spans
// differ, TooFewObservations below N = 3, ConstantInput when either side has
// zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

struct CorrelationTest {
  double r = 0.0;
  double p_value = 1.0;  // two-sided, via the t transform with N-2 df
  int n = 0;
};

CorrelationTest pearson_with_p(std::span<const double> x,
                               std::span<const double> y);

// Correlation between each item and the participant total. The total includes
// the item itself unless `corrected` is set, which subtracts the item from the
// total before correlating.
std::vector<double> item_total_correlations(const ResponseMatrix& matrix,
                                            const ScaleDefinition& scale,
                                            bool corrected = false);

struct InterItemFlag {
  int item_a = 0;  // item ids, a < b
  int item_b = 0;
  double r = 0.0;
  bool redundant = false;         // |r| at or above the upper bound
  bool poor_homogeneity = false;  // |r| at or below the lower bound
};

struct InterItemReport {
  Eigen::MatrixXd correlations;  // symmetric, unit diagonal; NaN where undefined
  std::vector<InterItemFlag> flagged;
  double lower_bound = 0.2;
  double upper_bound = 0.8;
};

InterItemReport inter_item_matrix(const ResponseMatrix& matrix,
                                  const ScaleDefinition& scale,
                                  double lower_bound = 0.2,
                                  double upper_bound = 0.8);

// Cronbach's alpha over the raw item columns, sample (N-1) variances
// throughout. Throws TooFewItems below M = 2, TooFewObservations below N = 2,
// ZeroTotalVariance when every participant total is identical.
double cronbach_alpha(const ResponseMatrix& matrix);
double cronbach_alpha(const Eigen::MatrixXd& columns);

enum class IccVariant {
  // Between mean square without the session-count factor; the error term keeps
  // deviations from the respondent mean in both sessions. Matches the printed
  // mean-square definitions this scale's reliability study reported.
  UnscaledMeanSquares,
  // Two-way mixed, single rater, consistency: ICC(3,1).
  ShroutFleiss3_1,
};

const char* icc_variant_name(IccVariant variant);

struct IccResult {
  double icc = 0.0;
  double f_statistic = 0.0;
  double p_value = 1.0;
  int df1 = 0;
  int df2 = 0;
  IccVariant variant = IccVariant::UnscaledMeanSquares;
};

// Two-session ICC over paired totals (k = 2 sessions). Throws
// TooFewObservations below N = 2 pairs, ConstantInput when all scores across
// both sessions are identical.
IccResult icc_two_way(std::span<const double> session1,
                      std::span<const double> session2,
                      IccVariant variant = IccVariant::UnscaledMeanSquares);

// Reliability band for an ICC value: Excellent at or above 0.90, Good at or
// above 0.75, Poor below.
std::string icc_band(double icc);

struct RetestReport {
  CorrelationTest total_correlation;  // Pearson over participant totals
  IccResult icc_unscaled;
  IccResult icc_sf31;
  std::string band_unscaled;
  std::string band_sf31;
  int n_pairs = 0;
};

RetestReport retest_reliability(const RetestPairs& pairs,
                                const ScaleDefinition& scale);

struct ItemReliability {
  int item_id = 0;
  double item_total = 0.0;
  bool below_threshold = false;
};

struct ReliabilityReport {
  std::vector<ItemReliability> items;
  InterItemReport inter_item;
  double alpha = 0.0;
  bool alpha_acceptable = false;  // alpha at or above 0.7
  double item_total_threshold = 0.5;
};

ReliabilityReport internal_consistency(const ResponseMatrix& matrix,
                                       const ScaleDefinition& scale,
                                       double item_total_threshold = 0.5,
                                       double inter_item_lower = 0.2,
                                       double inter_item_upper = 0.8);

}  // namespace xeq::reliability
