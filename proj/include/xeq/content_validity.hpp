#pragma once

#include <Eigen/Dense>
#include <array>
#include <span>
#include <string>
#include <vector>

namespace xeq {

// Exact count-based ratio. CVI equality tests (does every expert agree?)
// are decided on integers, never on rounded decimals.
struct Ratio {
  long long num = 0;
  long long den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool is_unity() const { return num == den; }

  Ratio reduced() const;
  Ratio operator+(const Ratio& other) const;
  Ratio over(long long divisor) const;  // (num/den) / divisor
  bool operator==(const Ratio& other) const;
};

// Expert-panel ratings: N experts by M items on a 5-step ordinal scale.
struct ExpertRatingMatrix {
  std::vector<std::string> experts;
  Eigen::MatrixXi values;  // N x M, codes 1..5

  int n_experts() const { return static_cast<int>(values.rows()); }
  int n_items() const { return static_cast<int>(values.cols()); }
  void validate() const;
};

// Rating label sets used by the expert CSV loaders.
const std::array<std::string, 5>& relevance_labels();
const std::array<std::string, 5>& clarity_labels();

struct CviReport {
  std::vector<Ratio> i_cvi;  // per item, input order
  Ratio s_cvi_average;
  Ratio s_cvi_universal;
  std::vector<int> retained_items;  // 1-based positions, input order
  double threshold = 0.75;
  std::vector<double> clarity_means;  // present only when clarity ratings given
};

// Cell = 1 iff the rating is one of the top two relevance levels (codes 4
// and 5), else 0.
Eigen::MatrixXi dichotomize_relevance(const ExpertRatingMatrix& ratings);

// Fraction of the panel endorsing one item, as an exact count ratio.
Ratio item_cvi(std::span<const int> dichotomized_column);

// Mean of the item-level values, exact.
Ratio scale_cvi_average(std::span<const Ratio> i_cvi);

// Fraction of items every expert endorsed; equality via counts.
Ratio scale_cvi_universal(std::span<const Ratio> i_cvi);

// Items kept when their I-CVI is strictly greater than the threshold.
// Returns 1-based positions in input order.
std::vector<int> select_items(std::span<const Ratio> i_cvi,
                              double threshold = 0.75);

// The full pipeline over one panel; clarity ratings contribute descriptive
// means only.
CviReport content_validity_report(const ExpertRatingMatrix& relevance,
                                  double threshold = 0.75,
                                  const ExpertRatingMatrix* clarity = nullptr);

}  // namespace xeq
