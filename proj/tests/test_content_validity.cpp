#include <string>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "xeq/content_validity.hpp"
#include "xeq/errors.hpp"
#include "xeq/ingestion.hpp"
#include "xeq/rng.hpp"

using namespace xeq;

namespace {

ExpertRatingMatrix fixture_panel() {
  return load_expert_ratings(std::string(XEQ_FIXTURE_DIR) + "/expert_ratings.csv",
                             18, relevance_labels());
}

}  // namespace

TEST_SUITE("content_validity") {
  TEST_CASE("ratio arithmetic is exact") {
    const Ratio a{1, 3};
    const Ratio b{1, 6};
    const Ratio sum = a + b;
    CHECK(sum == Ratio{1, 2});
    CHECK(sum.over(2) == Ratio{1, 4});
    CHECK(Ratio{13, 13}.is_unity());
    CHECK_FALSE(Ratio{12, 13}.is_unity());
    CHECK(Ratio{6, 8}.reduced().num == 3);
    CHECK(Ratio{6, 8}.reduced().den == 4);
  }

  TEST_CASE("dichotomization keeps exactly the top two levels") {
    ExpertRatingMatrix ratings;
    ratings.experts = {"e1"};
    ratings.values.resize(1, 5);
    ratings.values << 1, 2, 3, 4, 5;
    const Eigen::MatrixXi d = dichotomize_relevance(ratings);
    CHECK(d(0, 0) == 0);
    CHECK(d(0, 1) == 0);
    CHECK(d(0, 2) == 0);  // the middle level does not endorse
    CHECK(d(0, 3) == 1);
    CHECK(d(0, 4) == 1);
  }

  TEST_CASE("the 13-expert panel reproduces the published index ladder") {
    const CviReport report = content_validity_report(fixture_panel());
    REQUIRE(report.i_cvi.size() == 18);
    for (int i = 0; i < 4; ++i) CHECK(report.i_cvi[i] == Ratio{13, 13});
    for (int i = 4; i < 9; ++i) CHECK(report.i_cvi[i] == Ratio{12, 13});
    for (int i = 9; i < 14; ++i) CHECK(report.i_cvi[i] == Ratio{11, 13});
    for (int i = 14; i < 18; ++i) CHECK(report.i_cvi[i] == Ratio{10, 13});

    // Four-decimal views of the same quantities.
    CHECK(report.i_cvi[4].value() == doctest::Approx(0.9231).epsilon(5e-5));
    CHECK(report.i_cvi[9].value() == doctest::Approx(0.8462).epsilon(5e-5));
    CHECK(report.i_cvi[14].value() == doctest::Approx(0.7692).epsilon(5e-5));

    CHECK(report.s_cvi_average == Ratio{207, 234});
    CHECK(report.s_cvi_average.value() == doctest::Approx(0.8846).epsilon(5e-5));
    CHECK(report.s_cvi_universal == Ratio{4, 18});
    CHECK(report.s_cvi_universal.value() == doctest::Approx(0.2222).epsilon(5e-5));

    // Every item clears the 0.75 bar (the weakest sit at 0.7692).
    REQUIRE(report.retained_items.size() == 18);
    for (int i = 0; i < 18; ++i) CHECK(report.retained_items[i] == i + 1);
  }

  TEST_CASE("the 14-item subset is recomputed, not rescaled") {
    // Dropping the four weakest items re-derives both scale indices from the
    // surviving columns.
    const ExpertRatingMatrix full = fixture_panel();
    ExpertRatingMatrix subset;
    subset.experts = full.experts;
    subset.values = full.values.leftCols(14);
    const CviReport report = content_validity_report(subset);
    CHECK(report.s_cvi_average == Ratio{167, 182});
    CHECK(report.s_cvi_average.value() == doctest::Approx(0.9176).epsilon(5e-5));
    CHECK(report.s_cvi_universal == Ratio{4, 14});
    CHECK(report.s_cvi_universal.value() == doctest::Approx(0.2857).epsilon(5e-5));
  }

  TEST_CASE("an item sitting exactly on the threshold is removed") {
    // 4 experts: 3/4 = 0.75 exactly; only strictly greater survives.
    ExpertRatingMatrix ratings;
    ratings.experts = {"e1", "e2", "e3", "e4"};
    ratings.values.resize(4, 3);
    ratings.values << 5, 5, 4,   // item1: 4/4, item2: 3/4, item3: 4/4
        4, 4, 5,
        5, 2, 4,
        4, 5, 5;
    ratings.values(2, 1) = 2;  // third expert dissents on item 2
    const CviReport report = content_validity_report(ratings, 0.75);
    CHECK(report.i_cvi[1] == Ratio{3, 4});
    CHECK(report.retained_items == std::vector<int>{1, 3});
  }

  TEST_CASE("universal agreement is decided on counts, not rounded doubles") {
    // 3 experts, 1 item, all endorse: 3/3 must register as unity even though
    // other panels give fractions with repeating decimals.
    std::vector<Ratio> i_cvi{{3, 3}, {2, 3}};
    const Ratio universal = scale_cvi_universal(i_cvi);
    CHECK(universal == Ratio{1, 2});
  }

  TEST_CASE("random panels agree with the loop oracle") {
    RngStream rng(314, 0);
    for (int round = 0; round < 50; ++round) {
      const int n = 3 + static_cast<int>(rng.next_u64() % 20);
      const int m = 2 + static_cast<int>(rng.next_u64() % 24);
      ExpertRatingMatrix ratings;
      ratings.values.resize(n, m);
      std::vector<std::vector<int>> plain(static_cast<size_t>(n),
                                          std::vector<int>(static_cast<size_t>(m)));
      for (int i = 0; i < n; ++i) {
        ratings.experts.push_back("e" + std::to_string(i));
        for (int j = 0; j < m; ++j) {
          const int rating = 1 + static_cast<int>(rng.next_u64() % 5);
          ratings.values(i, j) = rating;
          plain[static_cast<size_t>(i)][static_cast<size_t>(j)] = rating;
        }
      }
      const CviReport report = content_validity_report(ratings);
      const std::vector<double> expected = oracle::i_cvi(plain);
      double expected_mean = 0.0;
      for (size_t j = 0; j < expected.size(); ++j) {
        CHECK(report.i_cvi[j].value() ==
              doctest::Approx(expected[j]).epsilon(1e-14));
        expected_mean += expected[j];
      }
      expected_mean /= static_cast<double>(m);
      CHECK(report.s_cvi_average.value() ==
            doctest::Approx(expected_mean).epsilon(1e-14));
    }
  }

  TEST_CASE("clarity ratings contribute per-item means") {
    const ExpertRatingMatrix relevance = fixture_panel();
    const ExpertRatingMatrix clarity = load_expert_ratings(
        std::string(XEQ_FIXTURE_DIR) + "/clarity_ratings.csv", 18,
        clarity_labels());
    const CviReport report = content_validity_report(relevance, 0.75, &clarity);
    REQUIRE(report.clarity_means.size() == 18);
    for (double mean : report.clarity_means) {
      CHECK(mean >= 1.0);
      CHECK(mean <= 5.0);
    }
    // Direct recomputation of the first item's clarity mean.
    double first = 0.0;
    for (int e = 0; e < clarity.n_experts(); ++e) first += clarity.values(e, 0);
    first /= static_cast<double>(clarity.n_experts());
    CHECK(report.clarity_means[0] == doctest::Approx(first).epsilon(1e-14));
  }

  TEST_CASE("clarity panel with a different item count is rejected") {
    ExpertRatingMatrix relevance;
    relevance.experts = {"e1", "e2", "e3"};
    relevance.values = Eigen::MatrixXi::Constant(3, 4, 5);
    ExpertRatingMatrix clarity;
    clarity.experts = {"e1", "e2", "e3"};
    clarity.values = Eigen::MatrixXi::Constant(3, 5, 4);
    try {
      content_validity_report(relevance, 0.75, &clarity);
      FAIL("expected DimensionMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::DimensionMismatch);
    }
  }

  TEST_CASE("an empty panel is rejected") {
    ExpertRatingMatrix ratings;
    ratings.values.resize(0, 5);
    CHECK_THROWS_AS(content_validity_report(ratings), Error);
  }
}
