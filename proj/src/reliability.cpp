#include "xeq/reliability.hpp"

#include <cmath>
#include <limits>

#include "xeq/errors.hpp"
#include "xeq/stats.hpp"

namespace xeq::reliability {

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    fail(Errc::LengthMismatch, "pearson: " + std::to_string(x.size()) +
                                   " vs " + std::to_string(y.size()) +
                                   " observations");
  }
  const size_t n = x.size();
  if (n < 3) {
    fail(Errc::TooFewObservations,
         "pearson needs at least 3 observations, got " + std::to_string(n));
  }
  const double mx = stats::mean(x);
  const double my = stats::mean(y);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    fail(Errc::ConstantInput, "pearson: an input has zero variance");
  }
  double r = sxy / std::sqrt(sxx * syy);
  // Guard against rounding pushing |r| a ulp past 1.
  if (r > 1.0) r = 1.0;
  if (r < -1.0) r = -1.0;
  return r;
}

CorrelationTest pearson_with_p(std::span<const double> x,
                               std::span<const double> y) {
  CorrelationTest out;
  out.r = pearson(x, y);
  out.n = static_cast<int>(x.size());
  const double df = static_cast<double>(out.n - 2);
  if (std::abs(out.r) >= 1.0) {
    out.p_value = 0.0;
  } else {
    const double t = out.r * std::sqrt(df / (1.0 - out.r * out.r));
    out.p_value = stats::student_t_two_sided_p(t, df);
  }
  return out;
}

std::vector<double> item_total_correlations(const ResponseMatrix& matrix,
                                            const ScaleDefinition& scale,
                                            bool corrected) {
  matrix.validate(scale);
  const auto totals = matrix.participant_totals();
  std::vector<double> out;
  out.reserve(scale.items.size());
  for (const Item& item : scale.items) {
    const auto column = matrix.item_column(item.id);
    if (corrected) {
      std::vector<double> rest(totals.size());
      for (size_t i = 0; i < totals.size(); ++i) rest[i] = totals[i] - column[i];
      out.push_back(pearson(column, rest));
    } else {
      out.push_back(pearson(column, totals));
    }
  }
  return out;
}

InterItemReport inter_item_matrix(const ResponseMatrix& matrix,
                                  const ScaleDefinition& scale,
                                  double lower_bound, double upper_bound) {
  matrix.validate(scale);
  if (lower_bound >= upper_bound) {
    fail(Errc::BadConfig, "inter-item bounds must satisfy lower < upper");
  }
  const int m = matrix.n_items();
  InterItemReport report;
  report.lower_bound = lower_bound;
  report.upper_bound = upper_bound;
  report.correlations =
      Eigen::MatrixXd::Constant(m, m, std::numeric_limits<double>::quiet_NaN());

  std::vector<std::vector<double>> columns;
  columns.reserve(static_cast<size_t>(m));
  for (const Item& item : scale.items) columns.push_back(matrix.item_column(item.id));

  for (int a = 0; a < m; ++a) {
    report.correlations(a, a) = 1.0;
    for (int b = a + 1; b < m; ++b) {
      double r = std::numeric_limits<double>::quiet_NaN();
      const bool const_a = stats::is_constant(columns[static_cast<size_t>(a)]);
      const bool const_b = stats::is_constant(columns[static_cast<size_t>(b)]);
      if (!const_a && !const_b) {
        r = pearson(columns[static_cast<size_t>(a)], columns[static_cast<size_t>(b)]);
      }
      report.correlations(a, b) = r;
      report.correlations(b, a) = r;
      if (std::isnan(r)) continue;
      const double magnitude = std::abs(r);
      InterItemFlag flag;
      flag.item_a = scale.items[static_cast<size_t>(a)].id;
      flag.item_b = scale.items[static_cast<size_t>(b)].id;
      flag.r = r;
      flag.redundant = magnitude >= upper_bound;
      flag.poor_homogeneity = magnitude <= lower_bound;
      if (flag.redundant || flag.poor_homogeneity) {
        report.flagged.push_back(flag);
      }
    }
  }
  return report;
}

double cronbach_alpha(const Eigen::MatrixXd& columns) {
  const int n = static_cast<int>(columns.rows());
  const int m = static_cast<int>(columns.cols());
  if (m < 2) {
    fail(Errc::TooFewItems, "alpha needs at least 2 items, got " + std::to_string(m));
  }
  if (n < 2) {
    fail(Errc::TooFewObservations,
         "alpha needs at least 2 observations, got " + std::to_string(n));
  }
  double item_variance_sum = 0.0;
  std::vector<double> totals(static_cast<size_t>(n), 0.0);
  for (int c = 0; c < m; ++c) {
    std::vector<double> column(static_cast<size_t>(n));
    for (int r = 0; r < n; ++r) {
      column[static_cast<size_t>(r)] = columns(r, c);
      totals[static_cast<size_t>(r)] += columns(r, c);
    }
    item_variance_sum += stats::sample_variance(column);
  }
  const double total_variance = stats::sample_variance(totals);
  if (total_variance == 0.0) {
    fail(Errc::ZeroTotalVariance, "alpha: all participant totals identical");
  }
  const double ratio = static_cast<double>(m) / static_cast<double>(m - 1);
  return ratio * (1.0 - item_variance_sum / total_variance);
}

double cronbach_alpha(const ResponseMatrix& matrix) {
  return cronbach_alpha(matrix.values.cast<double>());
}

const char* icc_variant_name(IccVariant variant) {
  switch (variant) {
    case IccVariant::UnscaledMeanSquares: return "UnscaledMeanSquares";
    case IccVariant::ShroutFleiss3_1: return "ShroutFleiss3_1";
  }
  return "Unknown";
}

IccResult icc_two_way(std::span<const double> session1,
                      std::span<const double> session2, IccVariant variant) {
  if (session1.size() != session2.size()) {
    fail(Errc::LengthMismatch, "icc: " + std::to_string(session1.size()) +
                                   " vs " + std::to_string(session2.size()) +
                                   " scores");
  }
  const int n = static_cast<int>(session1.size());
  if (n < 2) {
    fail(Errc::TooFewObservations,
         "icc needs at least 2 pairs, got " + std::to_string(n));
  }
  constexpr int k = 2;  // sessions

  double grand = 0.0;
  std::vector<double> row_means(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    row_means[static_cast<size_t>(i)] = (session1[static_cast<size_t>(i)] +
                                         session2[static_cast<size_t>(i)]) / 2.0;
    grand += session1[static_cast<size_t>(i)] + session2[static_cast<size_t>(i)];
  }
  grand /= static_cast<double>(n * k);

  bool all_equal = true;
  for (int i = 0; i < n && all_equal; ++i) {
    all_equal = session1[static_cast<size_t>(i)] == session1[0] &&
                session2[static_cast<size_t>(i)] == session1[0];
  }
  if (all_equal) {
    fail(Errc::ConstantInput, "icc: every score across both sessions is identical");
  }

  double between = 0.0;  // sum of squared row-mean deviations
  double within = 0.0;   // sum of squared deviations from the row mean
  for (int i = 0; i < n; ++i) {
    const double rm = row_means[static_cast<size_t>(i)];
    const double d = rm - grand;
    between += d * d;
    const double d1 = session1[static_cast<size_t>(i)] - rm;
    const double d2 = session2[static_cast<size_t>(i)] - rm;
    within += d1 * d1 + d2 * d2;
  }

  IccResult out;
  out.variant = variant;
  if (variant == IccVariant::UnscaledMeanSquares) {
    const double ms = between / static_cast<double>(n - 1);
    const double ms_e = within / static_cast<double>(n * (k - 1));
    out.icc = (ms - ms_e) / (ms + (k - 1) * ms_e);
    out.df1 = n - 1;
    out.df2 = n * (k - 1);
    if (ms_e == 0.0) {
      out.f_statistic = std::numeric_limits<double>::infinity();
      out.p_value = 0.0;
    } else {
      out.f_statistic = ms / ms_e;
      out.p_value = stats::f_survival(out.f_statistic, out.df1, out.df2);
    }
    return out;
  }

  // ICC(3,1): remove the session (column) effect from the error term.
  double col_effect = 0.0;
  {
    double c1 = 0.0, c2 = 0.0;
    for (int i = 0; i < n; ++i) {
      c1 += session1[static_cast<size_t>(i)];
      c2 += session2[static_cast<size_t>(i)];
    }
    c1 /= static_cast<double>(n);
    c2 /= static_cast<double>(n);
    col_effect = static_cast<double>(n) *
                 ((c1 - grand) * (c1 - grand) + (c2 - grand) * (c2 - grand));
  }
  const double msr = static_cast<double>(k) * between / static_cast<double>(n - 1);
  const double sse = within - col_effect;
  const double mse = sse / static_cast<double>((n - 1) * (k - 1));
  out.icc = (msr - mse) / (msr + (k - 1) * mse);
  out.df1 = n - 1;
  out.df2 = (n - 1) * (k - 1);
  if (mse <= 0.0) {
    out.icc = 1.0;
    out.f_statistic = std::numeric_limits<double>::infinity();
    out.p_value = 0.0;
  } else {
    out.f_statistic = msr / mse;
    out.p_value = stats::f_survival(out.f_statistic, out.df1, out.df2);
  }
  return out;
}

std::string icc_band(double icc) {
  if (icc >= 0.90) return "Excellent";
  if (icc >= 0.75) return "Good";
  return "Poor";
}

RetestReport retest_reliability(const RetestPairs& pairs,
                                const ScaleDefinition& scale) {
  if (pairs.pairs.empty()) {
    fail(Errc::EmptyDataset, "no matched test/retest pairs");
  }
  RetestReport report;
  report.n_pairs = static_cast<int>(pairs.pairs.size());

  std::vector<double> totals1, totals2;
  totals1.reserve(pairs.pairs.size());
  totals2.reserve(pairs.pairs.size());
  for (const RetestPair& pair : pairs.pairs) {
    std::vector<int> row1(pair.test_row.data(),
                          pair.test_row.data() + pair.test_row.size());
    std::vector<int> row2(pair.retest_row.data(),
                          pair.retest_row.data() + pair.retest_row.size());
    totals1.push_back(participant_total(row1, scale));
    totals2.push_back(participant_total(row2, scale));
  }

  report.total_correlation = pearson_with_p(totals1, totals2);
  report.icc_unscaled =
      icc_two_way(totals1, totals2, IccVariant::UnscaledMeanSquares);
  report.icc_sf31 = icc_two_way(totals1, totals2, IccVariant::ShroutFleiss3_1);
  report.band_unscaled = icc_band(report.icc_unscaled.icc);
  report.band_sf31 = icc_band(report.icc_sf31.icc);
  return report;
}

ReliabilityReport internal_consistency(const ResponseMatrix& matrix,
                                       const ScaleDefinition& scale,
                                       double item_total_threshold,
                                       double inter_item_lower,
                                       double inter_item_upper) {
  ReliabilityReport report;
  report.item_total_threshold = item_total_threshold;
  const auto correlations = item_total_correlations(matrix, scale);
  for (size_t i = 0; i < scale.items.size(); ++i) {
    ItemReliability entry;
    entry.item_id = scale.items[i].id;
    entry.item_total = correlations[i];
    entry.below_threshold = correlations[i] < item_total_threshold;
    report.items.push_back(entry);
  }
  report.inter_item =
      inter_item_matrix(matrix, scale, inter_item_lower, inter_item_upper);
  report.alpha = cronbach_alpha(matrix);
  report.alpha_acceptable = report.alpha >= 0.7;
  return report;
}

}  // namespace xeq::reliability
