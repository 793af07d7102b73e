#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "oracles.hpp"
#include "xeq/construct_validity.hpp"
#include "xeq/errors.hpp"
#include "xeq/rng.hpp"
#include "xeq/scale.hpp"

using namespace xeq;
namespace cv = xeq::construct;

namespace {

ScaleDefinition two_factor_scale() {
  ScaleDefinition scale;
  scale.scale_id = "two_factor";
  scale.version = "1";
  scale.likert_labels = {"a", "b", "c", "d", "e"};
  scale.items = {{1, "q1", "F1"}, {2, "q2", "F1"}, {3, "q3", "F1"},
                 {4, "q4", "F2"}, {5, "q5", "F2"}, {6, "q6", "F2"}};
  return scale;
}

// Columns with a sample covariance exactly equal to `target` (up to rounding):
// draw normals, centre, whiten by the sample covariance, recolour by the
// Cholesky factor of the target.
Eigen::MatrixXd columns_with_covariance(const Eigen::MatrixXd& target, int n,
                                        uint64_t seed) {
  const Eigen::Index m = target.rows();
  RngStream rng(seed, 0);
  Eigen::MatrixXd z(n, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) z(i, j) = rng.next_normal();
  z.rowwise() -= z.colwise().mean();
  const Eigen::MatrixXd own = (z.transpose() * z) / static_cast<double>(n - 1);
  const Eigen::MatrixXd white = own.llt().matrixL().solve(z.transpose());
  const Eigen::MatrixXd l = target.llt().matrixL();
  return (l * white).transpose();
}

struct PlantedModel {
  Eigen::MatrixXd lambda;  // 6 x 2
  Eigen::MatrixXd phi;     // 2 x 2
  Eigen::VectorXd psi;     // 6
  Eigen::MatrixXd sigma;   // implied covariance, unit diagonal
};

PlantedModel planted_two_factor() {
  PlantedModel model;
  model.lambda = Eigen::MatrixXd::Zero(6, 2);
  model.lambda(0, 0) = 0.80;
  model.lambda(1, 0) = 0.70;
  model.lambda(2, 0) = 0.60;
  model.lambda(3, 1) = 0.75;
  model.lambda(4, 1) = 0.65;
  model.lambda(5, 1) = 0.55;
  model.phi = Eigen::MatrixXd::Identity(2, 2);
  model.phi(0, 1) = model.phi(1, 0) = 0.4;
  model.psi = Eigen::VectorXd(6);
  for (int i = 0; i < 6; ++i) {
    const double communality =
        (model.lambda.row(i) * model.phi * model.lambda.row(i).transpose())(0);
    model.psi(i) = 1.0 - communality;
  }
  model.sigma = model.lambda * model.phi * model.lambda.transpose();
  model.sigma += model.psi.asDiagonal().toDenseMatrix();
  return model;
}

}  // namespace

TEST_SUITE("construct_validity") {
  TEST_CASE("correlation matrix agrees with the pairwise oracle") {
    RngStream rng(600, 0);
    Eigen::MatrixXd columns(25, 4);
    for (Eigen::Index i = 0; i < 25; ++i)
      for (Eigen::Index j = 0; j < 4; ++j) columns(i, j) = rng.next_normal();
    const Eigen::MatrixXd r = cv::correlation_matrix(columns);
    for (int a = 0; a < 4; ++a) {
      CHECK(r(a, a) == doctest::Approx(1.0).epsilon(1e-12));
      for (int b = a + 1; b < 4; ++b) {
        std::vector<double> x, y;
        for (int i = 0; i < 25; ++i) {
          x.push_back(columns(i, a));
          y.push_back(columns(i, b));
        }
        CHECK(r(a, b) == doctest::Approx(oracle::pearson(x, y)).epsilon(1e-12));
        CHECK(r(a, b) == r(b, a));
      }
    }
  }

  TEST_CASE("covariance matrix uses the sample denominator") {
    RngStream rng(601, 0);
    Eigen::MatrixXd columns(18, 3);
    for (Eigen::Index i = 0; i < 18; ++i)
      for (Eigen::Index j = 0; j < 3; ++j) columns(i, j) = rng.next_normal() * 2;
    const Eigen::MatrixXd s = cv::covariance_matrix(columns);
    for (int j = 0; j < 3; ++j) {
      std::vector<double> col;
      for (int i = 0; i < 18; ++i) col.push_back(columns(i, j));
      CHECK(s(j, j) == doctest::Approx(oracle::variance(col)).epsilon(1e-12));
    }
  }

  TEST_CASE("constant columns and short samples are rejected") {
    Eigen::MatrixXd constant(5, 2);
    constant << 1, 3, 1, 4, 1, 5, 1, 6, 1, 7;
    try {
      cv::correlation_matrix(constant);
      FAIL("expected ConstantColumn");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::ConstantColumn);
    }
    Eigen::MatrixXd two_rows(2, 2);
    two_rows << 1, 2, 3, 4;
    CHECK_THROWS_AS(cv::correlation_matrix(two_rows), Error);
  }

  TEST_CASE("eigenvalues come back sorted and conserve total variance") {
    const PlantedModel model = planted_two_factor();
    const cv::EfaResult efa = cv::efa_eigenvalues(model.sigma);
    REQUIRE(efa.eigenvalues.size() == 6);
    double sum = 0.0, prop = 0.0;
    for (size_t i = 0; i < efa.eigenvalues.size(); ++i) {
      if (i > 0) CHECK(efa.eigenvalues[i] <= efa.eigenvalues[i - 1]);
      sum += efa.eigenvalues[i];
      prop += efa.variance_proportion[i];
      CHECK(efa.variance_proportion[i] ==
            doctest::Approx(efa.eigenvalues[i] / 6.0).epsilon(1e-12));
    }
    CHECK(sum == doctest::Approx(6.0).epsilon(1e-10));  // trace identity
    CHECK(prop == doctest::Approx(1.0).epsilon(1e-10));
  }

  TEST_CASE("Kaiser keeps only eigenvalues strictly above one") {
    CHECK(cv::suggest_factor_count({2.5, 1.4, 1.0, 0.6},
                                   cv::FactorCountRule::Kaiser) == 2);
    // An identity correlation matrix has every eigenvalue exactly 1.
    const cv::EfaResult flat =
        cv::efa_eigenvalues(Eigen::MatrixXd::Identity(4, 4));
    CHECK(flat.suggested_factors == 0);
  }

  TEST_CASE("the scree elbow lands on the sharpest bend") {
    // Second differences: 4.6 at index 1, then at most 0.1 — the curve turns
    // flat right after the first eigenvalue.
    CHECK(cv::suggest_factor_count({6.0, 1.2, 1.0, 0.9, 0.85, 0.8},
                                   cv::FactorCountRule::ScreeElbow) == 1);
    // Two dominant eigenvalues push the bend one place right.
    CHECK(cv::suggest_factor_count({6.0, 5.0, 1.0, 0.9, 0.85, 0.8},
                                   cv::FactorCountRule::ScreeElbow) == 2);
    // Short lists have no interior point; fall back to one factor.
    CHECK(cv::suggest_factor_count({3.0, 1.0},
                                   cv::FactorCountRule::ScreeElbow) == 1);
  }

  TEST_CASE("one-factor loadings square-sum to the top eigenvalue") {
    const PlantedModel model = planted_two_factor();
    const cv::EfaResult efa = cv::efa_eigenvalues(model.sigma);
    const std::vector<double> loadings = cv::one_factor_loadings(model.sigma);
    REQUIRE(loadings.size() == 6);
    CHECK(loadings[0] >= 0.0);  // sign convention
    double squares = 0.0;
    for (double v : loadings) squares += v * v;
    CHECK(squares == doctest::Approx(efa.eigenvalues[0]).epsilon(1e-10));
  }

  TEST_CASE("the discrepancy vanishes exactly at the generating model") {
    const PlantedModel model = planted_two_factor();
    CHECK(cv::cfa_discrepancy(model.sigma, model.lambda, model.phi, model.psi) ==
          doctest::Approx(0.0).epsilon(1e-12));
    // Any perturbation moves the fit strictly above zero.
    Eigen::MatrixXd bumped = model.lambda;
    bumped(0, 0) += 0.05;
    CHECK(cv::cfa_discrepancy(model.sigma, bumped, model.phi, model.psi) > 0.0);
    // A wildly negative residual variance breaks positive definiteness.
    Eigen::VectorXd broken = model.psi;
    broken(0) = -5.0;
    CHECK(std::isinf(
        cv::cfa_discrepancy(model.sigma, model.lambda, model.phi, broken)));
  }

  TEST_CASE("finite differences of the discrepancy match the matrix calculus") {
    const PlantedModel model = planted_two_factor();
    RngStream rng(602, 0);
    const double h = 1e-6;
    for (int round = 0; round < 10; ++round) {
      Eigen::MatrixXd lambda = model.lambda;
      Eigen::MatrixXd phi = model.phi;
      Eigen::VectorXd psi = model.psi;
      for (int i = 0; i < 6; ++i) {
        for (int k = 0; k < 2; ++k)
          if (lambda(i, k) != 0.0) lambda(i, k) += 0.1 * rng.next_normal();
        psi(i) = std::max(0.2, psi(i) + 0.05 * rng.next_normal());
      }
      phi(0, 1) = phi(1, 0) = 0.4 + 0.1 * rng.next_normal();

      Eigen::MatrixXd sigma = lambda * phi * lambda.transpose();
      sigma += psi.asDiagonal().toDenseMatrix();
      const Eigen::MatrixXd g =
          sigma.inverse() * (sigma - model.sigma) * sigma.inverse();

      auto close = [](double analytic, double numeric) {
        CHECK(std::abs(analytic - numeric) <=
              1e-5 * std::max(1.0, std::abs(analytic)));
      };

      for (int i = 0; i < 6; ++i) {
        const int k = i < 3 ? 0 : 1;
        Eigen::MatrixXd lo = lambda, hi = lambda;
        lo(i, k) -= h;
        hi(i, k) += h;
        const double numeric =
            (cv::cfa_discrepancy(model.sigma, hi, phi, psi) -
             cv::cfa_discrepancy(model.sigma, lo, phi, psi)) /
            (2 * h);
        close(2.0 * (g * lambda * phi)(i, k), numeric);

        Eigen::VectorXd plo = psi, phi_v = psi;
        plo(i) -= h;
        phi_v(i) += h;
        const double numeric_psi =
            (cv::cfa_discrepancy(model.sigma, lambda, phi, phi_v) -
             cv::cfa_discrepancy(model.sigma, lambda, phi, plo)) /
            (2 * h);
        close(g(i, i), numeric_psi);
      }

      Eigen::MatrixXd qlo = phi, qhi = phi;
      qlo(0, 1) = qlo(1, 0) = phi(0, 1) - h;
      qhi(0, 1) = qhi(1, 0) = phi(0, 1) + h;
      const double numeric_phi =
          (cv::cfa_discrepancy(model.sigma, lambda, qhi, psi) -
           cv::cfa_discrepancy(model.sigma, lambda, qlo, psi)) /
          (2 * h);
      close(2.0 * (lambda.transpose() * g * lambda)(0, 1), numeric_phi);
    }
  }

  TEST_CASE("the fitter recovers a planted model from exact data") {
    const PlantedModel model = planted_two_factor();
    const ScaleDefinition scale = two_factor_scale();
    const Eigen::MatrixXd columns =
        columns_with_covariance(model.sigma, 200, 603);
    const cv::CfaModel spec = cv::CfaModel::from_dimensions(scale);
    const cv::CfaResult fit = cv::cfa_fit(columns, scale, spec);

    REQUIRE(fit.converged);
    CHECK(fit.discrepancy <= 1e-6);
    CHECK_FALSE(fit.ridge_applied);
    REQUIRE(fit.factors.size() == 2);
    REQUIRE(fit.loadings.size() == 6);
    const double truth[6] = {0.80, 0.70, 0.60, 0.75, 0.65, 0.55};
    for (int i = 0; i < 6; ++i) {
      CHECK(fit.loadings[i] == doctest::Approx(truth[i]).epsilon(2e-3));
      // Unit-diagonal covariance: standardized and raw loadings coincide.
      CHECK(fit.standardized_loadings[i] ==
            doctest::Approx(truth[i]).epsilon(2e-3));
      CHECK(fit.uniquenesses[i] ==
            doctest::Approx(1.0 - truth[i] * truth[i]).epsilon(5e-3));
      CHECK(fit.item_factor[i] == (i < 3 ? 0 : 1));
    }
    CHECK(fit.factor_correlations(0, 1) == doctest::Approx(0.4).epsilon(2e-3));
    CHECK(fit.factor_correlations(0, 0) == 1.0);
    CHECK(fit.weak_items.empty());  // weakest planted loading is 0.55
  }

  TEST_CASE("an identity factor covariance stays fixed during the fit") {
    PlantedModel model = planted_two_factor();
    model.phi = Eigen::MatrixXd::Identity(2, 2);
    model.sigma = model.lambda * model.phi * model.lambda.transpose();
    for (int i = 0; i < 6; ++i) {
      const double lam = model.lambda(i, i < 3 ? 0 : 1);
      model.psi(i) = 1.0 - lam * lam;
      model.sigma(i, i) += model.psi(i);
    }
    const ScaleDefinition scale = two_factor_scale();
    const Eigen::MatrixXd columns =
        columns_with_covariance(model.sigma, 150, 604);
    const cv::CfaModel spec = cv::CfaModel::from_dimensions(
        scale, cv::FactorCovariance::Identity);
    const cv::CfaResult fit = cv::cfa_fit(columns, scale, spec);
    REQUIRE(fit.converged);
    CHECK(fit.factor_correlations(0, 1) == 0.0);
    CHECK(fit.loadings[0] == doctest::Approx(0.80).epsilon(2e-3));
  }

  TEST_CASE("a single-item factor is unidentified") {
    ScaleDefinition scale = two_factor_scale();
    scale.items.push_back({7, "q7", "F3"});
    const Eigen::MatrixXd columns = columns_with_covariance(
        Eigen::MatrixXd::Identity(7, 7) * 0.5 +
            Eigen::MatrixXd::Constant(7, 7, 0.5),
        60, 605);
    try {
      cv::cfa_fit(columns, scale, cv::CfaModel::from_dimensions(scale));
      FAIL("expected UnidentifiedModel");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::UnidentifiedModel);
    }
  }

  TEST_CASE("hitting the iteration cap reports rather than throws") {
    const PlantedModel model = planted_two_factor();
    const ScaleDefinition scale = two_factor_scale();
    const Eigen::MatrixXd columns =
        columns_with_covariance(model.sigma, 100, 606);
    cv::CfaOptions options;
    options.max_iterations = 1;
    const cv::CfaResult fit =
        cv::cfa_fit(columns, scale, cv::CfaModel::from_dimensions(scale),
                    options);
    CHECK_FALSE(fit.converged);
    CHECK(fit.iterations <= 1);
    CHECK(std::isfinite(fit.discrepancy));
  }

  TEST_CASE("factor order follows first appearance in the item list") {
    const ScaleDefinition scale = two_factor_scale();
    const cv::CfaModel spec = cv::CfaModel::from_dimensions(scale);
    const std::vector<std::string> order = spec.factor_order(scale);
    REQUIRE(order.size() == 2);
    CHECK(order[0] == "F1");
    CHECK(order[1] == "F2");

    cv::CfaModel missing = spec;
    missing.assignment.erase(3);
    CHECK_THROWS_AS(missing.factor_order(scale), Error);
    cv::CfaModel stray = spec;
    stray.assignment[99] = "F1";
    CHECK_THROWS_AS(stray.factor_order(scale), Error);
  }
}
