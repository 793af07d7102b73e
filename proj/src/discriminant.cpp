#include "xeq/discriminant.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "xeq/errors.hpp"
#include "xeq/stats.hpp"

namespace xeq::discriminant {

namespace {

// Class labels in first-appearance order; exactly two expected.
std::vector<std::string> two_classes(const std::vector<std::string>& labels) {
  std::vector<std::string> classes;
  for (const std::string& label : labels) {
    if (std::find(classes.begin(), classes.end(), label) == classes.end()) {
      classes.push_back(label);
    }
  }
  if (classes.size() != 2) {
    fail(Errc::BadSpec, "expected exactly 2 classes, found " +
                            std::to_string(classes.size()));
  }
  return classes;
}

// Fisher-Yates over `indices` driven by the stream.
void shuffle_indices(std::vector<int>& indices, RngStream& stream) {
  for (size_t i = indices.size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(stream.next_u64() % i);
    std::swap(indices[i - 1], indices[j]);
  }
}

}  // namespace

LabelledData LabelledData::from_responses(const ResponseMatrix& matrix) {
  LabelledData data;
  data.features = matrix.values.cast<double>();
  data.labels.reserve(matrix.respondents.size());
  for (const RespondentMeta& meta : matrix.respondents) {
    if (meta.group.empty()) {
      fail(Errc::BadSpec, "respondent '" + meta.respondent_id +
                              "' has no group label");
    }
    data.labels.push_back(meta.group);
  }
  return data;
}

SplitIndices stratified_split(const std::vector<std::string>& labels,
                              double train_fraction, RngStream& stream) {
  if (train_fraction <= 0.0 || train_fraction >= 1.0) {
    fail(Errc::BadConfig, "train_fraction must lie strictly between 0 and 1");
  }
  const auto classes = two_classes(labels);

  SplitIndices split;
  for (const std::string& cls : classes) {
    std::vector<int> members;
    for (size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) members.push_back(static_cast<int>(i));
    }
    const int n_c = static_cast<int>(members.size());
    if (n_c < 2) {
      fail(Errc::ClassTooSmall, "class '" + cls + "' has " +
                                    std::to_string(n_c) +
                                    " row(s); need at least 2");
    }
    shuffle_indices(members, stream);
    const int train_c = std::clamp(
        static_cast<int>(std::lround(train_fraction * n_c)), 1, n_c - 1);
    split.train.insert(split.train.end(), members.begin(),
                       members.begin() + train_c);
    split.test.insert(split.test.end(), members.begin() + train_c,
                      members.end());
  }
  return split;
}

std::string LinearDiscriminant::predict(const Eigen::VectorXd& x) const {
  return weights.dot(x) + bias >= 0.0 ? class_a : class_b;
}

LinearDiscriminant fit_linear_discriminant(const LabelledData& data,
                                           const std::vector<int>& rows,
                                           double shrinkage) {
  if (shrinkage < 0.0 || shrinkage > 1.0) {
    fail(Errc::BadConfig, "shrinkage must lie in [0, 1]");
  }
  std::vector<std::string> row_labels;
  row_labels.reserve(rows.size());
  for (int r : rows) row_labels.push_back(data.labels[static_cast<size_t>(r)]);
  const auto classes = two_classes(row_labels);

  const int d = static_cast<int>(data.features.cols());
  Eigen::VectorXd mean_a = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd mean_b = Eigen::VectorXd::Zero(d);
  std::vector<int> rows_a, rows_b;
  for (int r : rows) {
    if (data.labels[static_cast<size_t>(r)] == classes[0]) {
      rows_a.push_back(r);
      mean_a += data.features.row(r).transpose();
    } else {
      rows_b.push_back(r);
      mean_b += data.features.row(r).transpose();
    }
  }
  if (rows_a.size() < 2 || rows_b.size() < 2) {
    fail(Errc::ClassTooSmall,
         "both classes need at least 2 training rows (got " +
             std::to_string(rows_a.size()) + " and " +
             std::to_string(rows_b.size()) + ")");
  }
  mean_a /= static_cast<double>(rows_a.size());
  mean_b /= static_cast<double>(rows_b.size());

  // Pooled within-class covariance, (N-1)-weighted per class.
  Eigen::MatrixXd pooled = Eigen::MatrixXd::Zero(d, d);
  for (int r : rows_a) {
    const Eigen::VectorXd dev = data.features.row(r).transpose() - mean_a;
    pooled += dev * dev.transpose();
  }
  for (int r : rows_b) {
    const Eigen::VectorXd dev = data.features.row(r).transpose() - mean_b;
    pooled += dev * dev.transpose();
  }
  pooled /= static_cast<double>(rows_a.size() + rows_b.size() - 2);

  const double scale = pooled.trace() / static_cast<double>(d);
  Eigen::MatrixXd shrunk =
      (1.0 - shrinkage) * pooled +
      shrinkage * scale * Eigen::MatrixXd::Identity(d, d);

  Eigen::LLT<Eigen::MatrixXd> llt(shrunk);
  if (llt.info() != Eigen::Success) {
    fail(Errc::SingularCovariance,
         "pooled covariance is singular even after shrinkage");
  }

  LinearDiscriminant model;
  model.class_a = classes[0];
  model.class_b = classes[1];
  model.weights = llt.solve(mean_a - mean_b);
  model.bias = -model.weights.dot((mean_a + mean_b) / 2.0);
  return model;
}

DiscriminantReport run_discriminant_trials(const LabelledData& data,
                                           const TrialConfig& config) {
  if (config.n_trials < 1) {
    fail(Errc::BadConfig, "n_trials must be at least 1");
  }
  if (data.features.rows() != static_cast<Eigen::Index>(data.labels.size())) {
    fail(Errc::LengthMismatch, "feature rows and labels differ in count");
  }
  const auto classes = two_classes(data.labels);

  DiscriminantReport report;
  report.config = config;
  report.trials.reserve(static_cast<size_t>(config.n_trials));

  for (int trial = 0; trial < config.n_trials; ++trial) {
    RngStream stream(config.seed, static_cast<uint64_t>(trial));
    const SplitIndices split =
        stratified_split(data.labels, config.train_fraction, stream);
    const LinearDiscriminant model =
        fit_linear_discriminant(data, split.train, config.shrinkage);

    // Confusion counts keyed by (actual == class_a, predicted == class_a).
    int tp = 0, fn = 0, fp = 0, tn = 0;
    for (int r : split.test) {
      const bool actual_a = data.labels[static_cast<size_t>(r)] == classes[0];
      const bool predicted_a =
          model.predict(data.features.row(r).transpose()) == classes[0];
      if (actual_a && predicted_a) ++tp;
      else if (actual_a) ++fn;
      else if (predicted_a) ++fp;
      else ++tn;
    }
    const int total = tp + fn + fp + tn;

    TrialOutcome outcome;
    outcome.accuracy = static_cast<double>(tp + tn) / static_cast<double>(total);
    auto f1 = [](int tp_c, int fp_c, int fn_c) {
      const double denom = 2.0 * tp_c + fp_c + fn_c;
      return denom == 0.0 ? 0.0 : 2.0 * tp_c / denom;
    };
    outcome.macro_f1 = (f1(tp, fp, fn) + f1(tn, fn, fp)) / 2.0;
    report.trials.push_back(outcome);
  }

  std::vector<double> accs, f1s;
  accs.reserve(report.trials.size());
  f1s.reserve(report.trials.size());
  for (const TrialOutcome& t : report.trials) {
    accs.push_back(t.accuracy);
    f1s.push_back(t.macro_f1);
  }
  report.mean_accuracy = stats::mean(accs);
  report.mean_macro_f1 = stats::mean(f1s);
  report.sd_accuracy = accs.size() > 1 ? stats::sample_sd(accs) : 0.0;
  report.sd_macro_f1 = f1s.size() > 1 ? stats::sample_sd(f1s) : 0.0;
  return report;
}

namespace {

// Residual sum of squares after least-squares fit of `design` to `y`.
double residual_ss(const Eigen::MatrixXd& design, const Eigen::VectorXd& y) {
  const Eigen::VectorXd beta =
      design.colPivHouseholderQr().solve(y);
  const Eigen::VectorXd residual = y - design * beta;
  return residual.squaredNorm();
}

}  // namespace

GroupComparison group_comparison(const std::vector<double>& scores,
                                 const std::vector<std::string>& groups,
                                 const std::vector<std::string>& blocks) {
  if (scores.size() != groups.size()) {
    fail(Errc::LengthMismatch, "scores and group labels differ in count");
  }
  if (!blocks.empty() && blocks.size() != scores.size()) {
    fail(Errc::LengthMismatch, "blocks must be empty or match the scores");
  }
  const auto classes = two_classes(groups);

  std::vector<double> a, b;
  for (size_t i = 0; i < scores.size(); ++i) {
    (groups[i] == classes[0] ? a : b).push_back(scores[i]);
  }
  if (a.size() < 2 || b.size() < 2) {
    fail(Errc::ClassTooSmall, "both groups need at least 2 observations");
  }

  GroupComparison out;
  out.n_a = static_cast<int>(a.size());
  out.n_b = static_cast<int>(b.size());
  out.mean_a = stats::mean(a);
  out.mean_b = stats::mean(b);

  const double var_a = stats::sample_variance(a);
  const double var_b = stats::sample_variance(b);
  const double na = static_cast<double>(out.n_a);
  const double nb = static_cast<double>(out.n_b);

  const double pooled_var =
      ((na - 1.0) * var_a + (nb - 1.0) * var_b) / (na + nb - 2.0);
  if (pooled_var == 0.0) {
    fail(Errc::DegenerateGroup,
         "pooled standard deviation is zero; groups are constant");
  }
  const double pooled_sd = std::sqrt(pooled_var);
  out.cohens_d = (out.mean_a - out.mean_b) / pooled_sd;

  // Pooled t and the equivalent one-way ANOVA (F = t^2 for two groups).
  out.pooled_t = (out.mean_a - out.mean_b) /
                 (pooled_sd * std::sqrt(1.0 / na + 1.0 / nb));
  out.pooled_df = out.n_a + out.n_b - 2;
  out.pooled_p =
      stats::student_t_two_sided_p(out.pooled_t, static_cast<double>(out.pooled_df));

  const double grand = (na * out.mean_a + nb * out.mean_b) / (na + nb);
  const double ss_between = na * (out.mean_a - grand) * (out.mean_a - grand) +
                            nb * (out.mean_b - grand) * (out.mean_b - grand);
  const double ss_within = (na - 1.0) * var_a + (nb - 1.0) * var_b;
  out.f_df1 = 1;
  out.f_df2 = out.n_a + out.n_b - 2;
  out.f_statistic = ss_between / (ss_within / static_cast<double>(out.f_df2));
  out.f_p_value = stats::f_survival(out.f_statistic, out.f_df1, out.f_df2);

  // Welch: unequal variances, Satterthwaite degrees of freedom.
  const double se2 = var_a / na + var_b / nb;
  if (se2 == 0.0) {
    fail(Errc::DegenerateGroup, "both groups have zero variance");
  }
  out.welch_t = (out.mean_a - out.mean_b) / std::sqrt(se2);
  out.welch_df = se2 * se2 /
                 ((var_a / na) * (var_a / na) / (na - 1.0) +
                  (var_b / nb) * (var_b / nb) / (nb - 1.0));
  out.welch_p = stats::student_t_two_sided_p(out.welch_t, out.welch_df);

  if (!blocks.empty()) {
    // Two-factor additive model: compare RSS with and without the group
    // column, blocks always present.
    std::vector<std::string> block_levels;
    for (const std::string& blk : blocks) {
      if (std::find(block_levels.begin(), block_levels.end(), blk) ==
          block_levels.end()) {
        block_levels.push_back(blk);
      }
    }
    const int n = static_cast<int>(scores.size());
    const int n_blocks = static_cast<int>(block_levels.size());
    // Intercept + (blocks-1) indicators [+ group indicator in the full model].
    Eigen::MatrixXd reduced = Eigen::MatrixXd::Zero(n, n_blocks);
    Eigen::MatrixXd full = Eigen::MatrixXd::Zero(n, n_blocks + 1);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      y(i) = scores[static_cast<size_t>(i)];
      reduced(i, 0) = 1.0;
      full(i, 0) = 1.0;
      for (int blk = 1; blk < n_blocks; ++blk) {
        const double hit =
            blocks[static_cast<size_t>(i)] == block_levels[static_cast<size_t>(blk)]
                ? 1.0
                : 0.0;
        reduced(i, blk) = hit;
        full(i, blk) = hit;
      }
      full(i, n_blocks) = groups[static_cast<size_t>(i)] == classes[0] ? 1.0 : 0.0;
    }
    const double rss_reduced = residual_ss(reduced, y);
    const double rss_full = residual_ss(full, y);
    const int df1 = 1;
    const int df2 = n - (n_blocks + 1);
    if (df2 < 1) {
      fail(Errc::DegenerateData,
           "too few observations for the blocked comparison");
    }
    if (rss_full <= 0.0) {
      fail(Errc::DegenerateGroup, "blocked model fits the scores exactly");
    }
    const double f =
        (rss_reduced - rss_full) / static_cast<double>(df1) /
        (rss_full / static_cast<double>(df2));
    out.blocked_f = f;
    out.blocked_p = stats::f_survival(f, df1, df2);
    out.blocked_df1 = df1;
    out.blocked_df2 = df2;
  }
  return out;
}

}  // namespace xeq::discriminant
