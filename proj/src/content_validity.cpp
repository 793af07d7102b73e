#include "xeq/content_validity.hpp"

#include <numeric>

#include "xeq/errors.hpp"

namespace xeq {

Ratio Ratio::reduced() const {
  if (den == 0) fail(Errc::DegenerateData, "ratio with zero denominator");
  long long g = std::gcd(num < 0 ? -num : num, den < 0 ? -den : den);
  if (g == 0) g = 1;
  long long n = num / g;
  long long d = den / g;
  if (d < 0) {
    n = -n;
    d = -d;
  }
  return Ratio{n, d};
}

Ratio Ratio::operator+(const Ratio& other) const {
  const Ratio a = reduced();
  const Ratio b = other.reduced();
  const long long g = std::gcd(a.den, b.den);
  const long long scale_a = b.den / g;
  const long long scale_b = a.den / g;
  return Ratio{a.num * scale_a + b.num * scale_b, a.den * scale_a}.reduced();
}

Ratio Ratio::over(long long divisor) const {
  if (divisor == 0) fail(Errc::DegenerateData, "division of ratio by zero");
  return Ratio{num, den * divisor}.reduced();
}

bool Ratio::operator==(const Ratio& other) const {
  const Ratio a = reduced();
  const Ratio b = other.reduced();
  return a.num == b.num && a.den == b.den;
}

void ExpertRatingMatrix::validate() const {
  if (n_experts() < 1) {
    fail(Errc::EmptyPanel, "expert rating matrix has no experts");
  }
  if (n_items() < 1) {
    fail(Errc::EmptyScale, "expert rating matrix has no items");
  }
  if (static_cast<int>(experts.size()) != n_experts()) {
    fail(Errc::DimensionMismatch, "expert id list does not match rating rows");
  }
  for (int r = 0; r < n_experts(); ++r) {
    for (int c = 0; c < n_items(); ++c) {
      const int v = values(r, c);
      if (v < 1 || v > 5) {
        fail(Errc::ParseError, "rating (" + experts[static_cast<size_t>(r)] +
                                   ", item_" + std::to_string(c + 1) +
                                   ") = " + std::to_string(v) +
                                   " outside 1..5");
      }
    }
  }
}

const std::array<std::string, 5>& relevance_labels() {
  static const std::array<std::string, 5> labels = {
      "Not Relevant at All", "Slightly Relevant", "Neutral",
      "Somewhat Relevant", "Extremely Relevant"};
  return labels;
}

const std::array<std::string, 5>& clarity_labels() {
  static const std::array<std::string, 5> labels = {
      "Not Clear at All", "Slightly Clear", "Neutral", "Somewhat Clear",
      "Extremely Clear"};
  return labels;
}

Eigen::MatrixXi dichotomize_relevance(const ExpertRatingMatrix& ratings) {
  ratings.validate();
  Eigen::MatrixXi out(ratings.n_experts(), ratings.n_items());
  for (int r = 0; r < ratings.n_experts(); ++r) {
    for (int c = 0; c < ratings.n_items(); ++c) {
      out(r, c) = ratings.values(r, c) >= 4 ? 1 : 0;
    }
  }
  return out;
}

Ratio item_cvi(std::span<const int> dichotomized_column) {
  if (dichotomized_column.empty()) {
    fail(Errc::EmptyPanel, "item CVI over an empty panel");
  }
  long long count = 0;
  for (int v : dichotomized_column) count += (v != 0) ? 1 : 0;
  return Ratio{count, static_cast<long long>(dichotomized_column.size())};
}

Ratio scale_cvi_average(std::span<const Ratio> i_cvi) {
  if (i_cvi.empty()) fail(Errc::EmptyScale, "scale CVI over an empty scale");
  Ratio acc{0, 1};
  for (const Ratio& r : i_cvi) acc = acc + r;
  return acc.over(static_cast<long long>(i_cvi.size()));
}

Ratio scale_cvi_universal(std::span<const Ratio> i_cvi) {
  if (i_cvi.empty()) fail(Errc::EmptyScale, "scale CVI over an empty scale");
  long long ones = 0;
  for (const Ratio& r : i_cvi) ones += r.is_unity() ? 1 : 0;
  return Ratio{ones, static_cast<long long>(i_cvi.size())};
}

std::vector<int> select_items(std::span<const Ratio> i_cvi, double threshold) {
  std::vector<int> retained;
  for (size_t i = 0; i < i_cvi.size(); ++i) {
    // strictly greater: an item sitting exactly on the threshold is removed
    if (static_cast<double>(i_cvi[i].num) >
        threshold * static_cast<double>(i_cvi[i].den)) {
      retained.push_back(static_cast<int>(i) + 1);
    }
  }
  return retained;
}

CviReport content_validity_report(const ExpertRatingMatrix& relevance,
                                  double threshold,
                                  const ExpertRatingMatrix* clarity) {
  const Eigen::MatrixXi binary = dichotomize_relevance(relevance);

  CviReport report;
  report.threshold = threshold;
  report.i_cvi.reserve(static_cast<size_t>(relevance.n_items()));
  std::vector<int> column(static_cast<size_t>(relevance.n_experts()));
  for (int c = 0; c < relevance.n_items(); ++c) {
    for (int r = 0; r < relevance.n_experts(); ++r) {
      column[static_cast<size_t>(r)] = binary(r, c);
    }
    report.i_cvi.push_back(item_cvi(column));
  }
  report.s_cvi_average = scale_cvi_average(report.i_cvi);
  report.s_cvi_universal = scale_cvi_universal(report.i_cvi);
  report.retained_items = select_items(report.i_cvi, threshold);

  if (clarity != nullptr) {
    clarity->validate();
    if (clarity->n_items() != relevance.n_items()) {
      fail(Errc::DimensionMismatch,
           "clarity ratings cover " + std::to_string(clarity->n_items()) +
               " items, relevance ratings cover " +
               std::to_string(relevance.n_items()));
    }
    for (int c = 0; c < clarity->n_items(); ++c) {
      report.clarity_means.push_back(clarity->values.col(c).cast<double>().mean());
    }
  }
  return report;
}

}  // namespace xeq
