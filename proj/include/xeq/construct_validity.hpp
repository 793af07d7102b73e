#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "xeq/scale.hpp"

namespace xeq::construct {

// Pearson correlation matrix over item columns. Throws ConstantColumn when an
// item has zero variance, TooFewObservations below N = 3.
Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& columns);
Eigen::MatrixXd correlation_matrix(const ResponseMatrix& matrix);

// Sample covariance matrix, (N-1) denominator.
Eigen::MatrixXd covariance_matrix(const Eigen::MatrixXd& columns);

enum class FactorCountRule {
  Kaiser,      // eigenvalues strictly above 1
  ScreeElbow,  // sharpest bend in the eigenvalue curve
};

struct EfaResult {
  std::vector<double> eigenvalues;          // descending
  std::vector<double> variance_proportion;  // eigenvalue / item count
  int suggested_factors = 0;
  FactorCountRule rule = FactorCountRule::Kaiser;
};

EfaResult efa_eigenvalues(const ResponseMatrix& matrix,
                          FactorCountRule rule = FactorCountRule::Kaiser);
EfaResult efa_eigenvalues(const Eigen::MatrixXd& correlation,
                          FactorCountRule rule = FactorCountRule::Kaiser);

int suggest_factor_count(const std::vector<double>& eigenvalues,
                         FactorCountRule rule);

// Loadings of every item on a single common factor: the first principal axis
// of the correlation matrix, scaled so the loading is each item's correlation
// with that axis. Signs fixed so the first item loads non-negatively.
std::vector<double> one_factor_loadings(const ResponseMatrix& matrix);
std::vector<double> one_factor_loadings(const Eigen::MatrixXd& correlation);

enum class FactorCovariance {
  Identity,  // factors uncorrelated, diagonal fixed at 1
  Free,      // off-diagonal correlations estimated, diagonal fixed at 1
};

struct CfaModel {
  // item id -> factor name; every scale item must appear exactly once.
  std::map<int, std::string> assignment;
  FactorCovariance factor_covariance = FactorCovariance::Free;

  // Factor names in first-appearance order over the scale's item list.
  std::vector<std::string> factor_order(const ScaleDefinition& scale) const;
  static CfaModel from_dimensions(const ScaleDefinition& scale,
                                  FactorCovariance cov = FactorCovariance::Free);
};

struct CfaOptions {
  int max_iterations = 500;
  // Gradient max-norm target. Near the optimum the discrepancy is quadratic
  // in the gradient, so 1e-7 here pins the fit value far below 1e-6.
  double tolerance = 1e-7;
  double weak_loading_threshold = 0.5;
};

struct CfaResult {
  std::vector<std::string> factors;
  std::vector<double> loadings;              // one per item, scale order
  std::vector<int> item_factor;              // index into `factors` per item
  Eigen::MatrixXd factor_correlations;       // unit diagonal
  std::vector<double> uniquenesses;          // residual variances, one per item
  std::vector<double> standardized_loadings; // loading scaled by item sd
  std::vector<int> weak_items;               // ids with |std loading| below threshold
  double discrepancy = 0.0;                  // ML fit value at the solution
  bool converged = false;
  int iterations = 0;
  bool ridge_applied = false;  // sample covariance needed a diagonal repair
};

// Maximum-likelihood confirmatory factor fit of the covariance structure
// Sigma = Lambda Phi Lambda' + Psi, each item loading on exactly one factor.
// Throws UnidentifiedModel when a factor carries a single item, TooFewItems /
// TooFewObservations on degenerate input. Non-convergence is reported through
// `converged`, not thrown.
CfaResult cfa_fit(const ResponseMatrix& matrix, const ScaleDefinition& scale,
                  const CfaModel& model, const CfaOptions& options = {});
CfaResult cfa_fit(const Eigen::MatrixXd& columns, const ScaleDefinition& scale,
                  const CfaModel& model, const CfaOptions& options = {});

// ML discrepancy F = ln|Sigma| + tr(S Sigma^-1) - ln|S| - M, +inf when Sigma
// is not positive definite. Exposed for gradient and recovery checks.
double cfa_discrepancy(const Eigen::MatrixXd& sample_cov,
                       const Eigen::MatrixXd& lambda,
                       const Eigen::MatrixXd& phi,
                       const Eigen::VectorXd& psi);

}  // namespace xeq::construct
