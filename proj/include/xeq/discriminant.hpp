#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "xeq/rng.hpp"
#include "xeq/scale.hpp"

namespace xeq::discriminant {

// Rows of `data` labelled by `labels`; classes appear in first-appearance
// order. Exactly two classes are supported throughout this module.
struct LabelledData {
  Eigen::MatrixXd features;  // N x d
  std::vector<std::string> labels;

  static LabelledData from_responses(const ResponseMatrix& matrix);
};

struct SplitIndices {
  std::vector<int> train;
  std::vector<int> test;
};

// Stratified split: per class, round(fraction * n_c) training rows, clamped so
// both sides keep at least one row. Throws ClassTooSmall when a class has
// fewer than 2 rows. Deterministic given the stream.
SplitIndices stratified_split(const std::vector<std::string>& labels,
                              double train_fraction, RngStream& stream);

struct LinearDiscriminant {
  Eigen::VectorXd weights;
  double bias = 0.0;
  std::string class_a;  // predicted when w.x + b >= 0
  std::string class_b;

  std::string predict(const Eigen::VectorXd& x) const;
};

// Fisher discriminant with pooled covariance and shrinkage toward the scaled
// identity: (1 - gamma) S_p + gamma (tr(S_p)/d) I. Throws ClassTooSmall when
// a class has fewer than 2 rows, BadSpec when labels do not form 2 classes,
// SingularCovariance when the shrunk pooled covariance cannot be solved.
LinearDiscriminant fit_linear_discriminant(const LabelledData& data,
                                           const std::vector<int>& rows,
                                           double shrinkage = 0.1);

struct TrialConfig {
  int n_trials = 100;
  double train_fraction = 0.7;
  double shrinkage = 0.1;
  uint64_t seed = 0;
};

struct TrialOutcome {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
};

struct DiscriminantReport {
  std::vector<TrialOutcome> trials;
  double mean_accuracy = 0.0;
  double sd_accuracy = 0.0;
  double mean_macro_f1 = 0.0;
  double sd_macro_f1 = 0.0;
  double chance_level = 0.5;  // two balanced classes
  TrialConfig config;
};

// Repeated stratified train/test trials; trial i draws from the seed's
// substream i so the whole report is reproducible from (data, config).
DiscriminantReport run_discriminant_trials(const LabelledData& data,
                                           const TrialConfig& config = {});

struct GroupComparison {
  // One-way ANOVA over participant totals (two groups).
  double f_statistic = 0.0;
  double f_p_value = 1.0;
  int f_df1 = 0;
  int f_df2 = 0;

  // Welch t-test (unequal variances) and the pooled-variance variant.
  double welch_t = 0.0;
  double welch_p = 1.0;
  double welch_df = 0.0;
  double pooled_t = 0.0;
  double pooled_p = 1.0;
  int pooled_df = 0;

  double cohens_d = 0.0;  // pooled-sd standardized mean difference
  double mean_a = 0.0;
  double mean_b = 0.0;
  int n_a = 0;
  int n_b = 0;

  // Present when a blocking factor was supplied: the group effect after
  // removing additive block differences.
  std::optional<double> blocked_f;
  std::optional<double> blocked_p;
  std::optional<int> blocked_df1;
  std::optional<int> blocked_df2;
};

// Two-group comparison of scores. `blocks` may be empty (no blocking) or give
// one block label per observation. Throws DegenerateGroup when the pooled
// standard deviation is zero, BadSpec unless exactly 2 groups are present.
GroupComparison group_comparison(const std::vector<double>& scores,
                                 const std::vector<std::string>& groups,
                                 const std::vector<std::string>& blocks = {});

}  // namespace xeq::discriminant
