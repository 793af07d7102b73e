#include "xeq/construct_validity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "xeq/errors.hpp"

namespace xeq::construct {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_columns(const Eigen::MatrixXd& columns) {
  if (columns.cols() < 2) {
    fail(Errc::TooFewItems, "need at least 2 items, got " +
                                std::to_string(columns.cols()));
  }
  if (columns.rows() < 3) {
    fail(Errc::TooFewObservations, "need at least 3 observations, got " +
                                       std::to_string(columns.rows()));
  }
  if (!columns.allFinite()) {
    fail(Errc::NonFiniteEntry, "data matrix contains a non-finite value");
  }
}

}  // namespace

Eigen::MatrixXd covariance_matrix(const Eigen::MatrixXd& columns) {
  check_columns(columns);
  const Eigen::Index n = columns.rows();
  const Eigen::MatrixXd centered = columns.rowwise() - columns.colwise().mean();
  return (centered.transpose() * centered) / static_cast<double>(n - 1);
}

Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& columns) {
  const Eigen::MatrixXd cov = covariance_matrix(columns);
  const Eigen::Index m = cov.rows();
  Eigen::VectorXd sd(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (cov(i, i) <= 0.0) {
      fail(Errc::ConstantColumn,
           "item column " + std::to_string(i + 1) + " has zero variance");
    }
    sd(i) = std::sqrt(cov(i, i));
  }
  Eigen::MatrixXd corr = cov;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      corr(i, j) /= sd(i) * sd(j);
    }
    corr(i, i) = 1.0;
  }
  return corr;
}

Eigen::MatrixXd correlation_matrix(const ResponseMatrix& matrix) {
  return correlation_matrix(matrix.values.cast<double>());
}

int suggest_factor_count(const std::vector<double>& eigenvalues,
                         FactorCountRule rule) {
  const int m = static_cast<int>(eigenvalues.size());
  if (m == 0) fail(Errc::EmptyDataset, "no eigenvalues to count factors from");
  if (rule == FactorCountRule::Kaiser) {
    int count = 0;
    for (double v : eigenvalues)
      if (v > 1.0) ++count;
    return count;
  }
  // Scree elbow: the interior index with the sharpest bend, i.e. the largest
  // second difference of the descending eigenvalue curve. Factors above the
  // bend are kept.
  if (m < 3) return 1;
  int elbow = 1;
  double best = -kInf;
  for (int i = 1; i + 1 < m; ++i) {
    const double bend = eigenvalues[static_cast<size_t>(i - 1)] -
                        2.0 * eigenvalues[static_cast<size_t>(i)] +
                        eigenvalues[static_cast<size_t>(i + 1)];
    if (bend > best) {
      best = bend;
      elbow = i;
    }
  }
  return elbow;  // 0-based bend index == number of factors above the bend
}

EfaResult efa_eigenvalues(const Eigen::MatrixXd& correlation,
                          FactorCountRule rule) {
  const Eigen::Index m = correlation.rows();
  if (m != correlation.cols() || !correlation.isApprox(correlation.transpose(), 1e-10)) {
    fail(Errc::NonSymmetric, "correlation matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(correlation);
  if (solver.info() != Eigen::Success) {
    fail(Errc::DegenerateData, "eigendecomposition failed");
  }

  EfaResult result;
  result.rule = rule;
  result.eigenvalues.resize(static_cast<size_t>(m));
  // Eigen returns ascending order; reverse for the conventional scree order.
  for (Eigen::Index i = 0; i < m; ++i) {
    result.eigenvalues[static_cast<size_t>(i)] = solver.eigenvalues()(m - 1 - i);
  }
  result.variance_proportion.resize(static_cast<size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    result.variance_proportion[static_cast<size_t>(i)] =
        result.eigenvalues[static_cast<size_t>(i)] / static_cast<double>(m);
  }
  result.suggested_factors = suggest_factor_count(result.eigenvalues, rule);
  return result;
}

EfaResult efa_eigenvalues(const ResponseMatrix& matrix, FactorCountRule rule) {
  return efa_eigenvalues(correlation_matrix(matrix), rule);
}

std::vector<double> one_factor_loadings(const Eigen::MatrixXd& correlation) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(correlation);
  if (solver.info() != Eigen::Success) {
    fail(Errc::DegenerateData, "eigendecomposition failed");
  }
  const Eigen::Index m = correlation.rows();
  const double top = solver.eigenvalues()(m - 1);
  if (top <= 0.0) {
    fail(Errc::DegenerateData, "leading eigenvalue is not positive");
  }
  Eigen::VectorXd loadings = solver.eigenvectors().col(m - 1) * std::sqrt(top);
  if (loadings(0) < 0.0) loadings = -loadings;
  return std::vector<double>(loadings.data(), loadings.data() + m);
}

std::vector<double> one_factor_loadings(const ResponseMatrix& matrix) {
  return one_factor_loadings(correlation_matrix(matrix));
}

std::vector<std::string> CfaModel::factor_order(
    const ScaleDefinition& scale) const {
  std::vector<std::string> order;
  for (const Item& item : scale.items) {
    auto it = assignment.find(item.id);
    if (it == assignment.end()) {
      fail(Errc::BadSpec,
           "item " + std::to_string(item.id) + " has no factor assignment");
    }
    if (std::find(order.begin(), order.end(), it->second) == order.end()) {
      order.push_back(it->second);
    }
  }
  for (const auto& [id, factor] : assignment) {
    if (!scale.has_item(id)) {
      fail(Errc::UnknownItem, "assignment references item " +
                                  std::to_string(id) +
                                  " which the scale lacks");
    }
  }
  return order;
}

CfaModel CfaModel::from_dimensions(const ScaleDefinition& scale,
                                   FactorCovariance cov) {
  CfaModel model;
  model.factor_covariance = cov;
  for (const Item& item : scale.items) model.assignment[item.id] = item.dimension;
  return model;
}

double cfa_discrepancy(const Eigen::MatrixXd& sample_cov,
                       const Eigen::MatrixXd& lambda,
                       const Eigen::MatrixXd& phi, const Eigen::VectorXd& psi) {
  const Eigen::Index m = sample_cov.rows();
  Eigen::MatrixXd sigma = lambda * phi * lambda.transpose();
  sigma.diagonal() += psi;

  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) return kInf;

  const Eigen::MatrixXd l = llt.matrixL();
  double log_det_sigma = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (l(i, i) <= 0.0) return kInf;
    log_det_sigma += 2.0 * std::log(l(i, i));
  }

  Eigen::LLT<Eigen::MatrixXd> llt_s(sample_cov);
  if (llt_s.info() != Eigen::Success) {
    fail(Errc::NotPositiveDefinite, "sample covariance is not positive definite");
  }
  const Eigen::MatrixXd ls = llt_s.matrixL();
  double log_det_s = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) log_det_s += 2.0 * std::log(ls(i, i));

  const double trace = (llt.solve(sample_cov)).trace();
  const double value = log_det_sigma + trace - log_det_s - static_cast<double>(m);
  return std::isfinite(value) ? value : kInf;
}

namespace {

// Everything the optimizer needs to move between the flat parameter vector and
// the structured (Lambda, Phi, Psi) triple.
struct CfaProblem {
  Eigen::MatrixXd s;            // sample covariance (possibly ridge-repaired)
  std::vector<int> item_factor; // factor index per item
  int n_items = 0;
  int n_factors = 0;
  bool free_phi = false;

  int n_params() const {
    const int phi_params = free_phi ? n_factors * (n_factors - 1) / 2 : 0;
    return 2 * n_items + phi_params;
  }

  void unpack(const Eigen::VectorXd& theta, Eigen::MatrixXd& lambda,
              Eigen::MatrixXd& phi, Eigen::VectorXd& psi) const {
    lambda = Eigen::MatrixXd::Zero(n_items, n_factors);
    for (int i = 0; i < n_items; ++i) {
      lambda(i, item_factor[static_cast<size_t>(i)]) = theta(i);
    }
    phi = Eigen::MatrixXd::Identity(n_factors, n_factors);
    int p = n_items;
    if (free_phi) {
      for (int a = 0; a < n_factors; ++a) {
        for (int b = a + 1; b < n_factors; ++b) {
          phi(a, b) = phi(b, a) = theta(p++);
        }
      }
    }
    psi.resize(n_items);
    for (int i = 0; i < n_items; ++i) psi(i) = std::exp(theta(p + i));
  }

  double value(const Eigen::VectorXd& theta) const {
    Eigen::MatrixXd lambda, phi;
    Eigen::VectorXd psi;
    unpack(theta, lambda, phi, psi);
    return cfa_discrepancy(s, lambda, phi, psi);
  }

  // Analytic gradient via G = Sigma^-1 (Sigma - S) Sigma^-1.
  Eigen::VectorXd gradient(const Eigen::VectorXd& theta) const {
    Eigen::MatrixXd lambda, phi;
    Eigen::VectorXd psi;
    unpack(theta, lambda, phi, psi);

    Eigen::MatrixXd sigma = lambda * phi * lambda.transpose();
    sigma.diagonal() += psi;
    Eigen::LLT<Eigen::MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) {
      fail(Errc::NotPositiveDefinite,
           "gradient requested at a non-positive-definite point");
    }
    const Eigen::MatrixXd identity =
        Eigen::MatrixXd::Identity(n_items, n_items);
    const Eigen::MatrixXd sigma_inv = llt.solve(identity);
    const Eigen::MatrixXd g = sigma_inv * (sigma - s) * sigma_inv;

    Eigen::VectorXd grad(n_params());
    const Eigen::MatrixXd glp = g * lambda * phi;
    for (int i = 0; i < n_items; ++i) {
      grad(i) = 2.0 * glp(i, item_factor[static_cast<size_t>(i)]);
    }
    int p = n_items;
    if (free_phi) {
      const Eigen::MatrixXd lgl = lambda.transpose() * g * lambda;
      for (int a = 0; a < n_factors; ++a) {
        for (int b = a + 1; b < n_factors; ++b) {
          grad(p++) = 2.0 * lgl(a, b);
        }
      }
    }
    for (int i = 0; i < n_items; ++i) grad(p + i) = g(i, i) * psi(i);
    return grad;
  }

  void clamp(Eigen::VectorXd& theta) const {
    int p = n_items;
    if (free_phi) {
      const int phi_params = n_factors * (n_factors - 1) / 2;
      for (int j = 0; j < phi_params; ++j) {
        theta(p + j) = std::clamp(theta(p + j), -0.999, 0.999);
      }
      p += phi_params;
    }
    for (int i = 0; i < n_items; ++i) {
      theta(p + i) = std::clamp(theta(p + i), -13.8, 13.8);
    }
  }
};

Eigen::VectorXd smc_start(const CfaProblem& problem) {
  const int m = problem.n_items;
  Eigen::VectorXd theta(problem.n_params());

  // Squared multiple correlations as communality estimates; fall back to 0.5
  // when the correlation matrix cannot be inverted.
  Eigen::VectorXd h2 = Eigen::VectorXd::Constant(m, 0.5);
  Eigen::VectorXd sd(m);
  for (int i = 0; i < m; ++i) sd(i) = std::sqrt(problem.s(i, i));
  Eigen::MatrixXd r = problem.s;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) r(i, j) /= sd(i) * sd(j);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(r);
  if (lu.isInvertible()) {
    const Eigen::MatrixXd r_inv = lu.inverse();
    for (int i = 0; i < m; ++i) {
      h2(i) = std::clamp(1.0 - 1.0 / r_inv(i, i), 0.0, 0.95);
    }
  }

  int p = m;
  if (problem.free_phi) p += problem.n_factors * (problem.n_factors - 1) / 2;
  for (int i = 0; i < m; ++i) {
    theta(i) = std::sqrt(h2(i)) * sd(i);
    const double psi0 = std::max(0.05, 1.0 - h2(i)) * problem.s(i, i);
    theta(p + i) = std::log(psi0);
  }
  if (problem.free_phi) {
    for (int j = m; j < p; ++j) theta(j) = 0.0;  // start factors uncorrelated
  }
  return theta;
}

}  // namespace

CfaResult cfa_fit(const Eigen::MatrixXd& columns, const ScaleDefinition& scale,
                  const CfaModel& model, const CfaOptions& options) {
  check_columns(columns);
  if (columns.cols() != scale.item_count()) {
    fail(Errc::DimensionMismatch,
         "data has " + std::to_string(columns.cols()) + " columns, scale has " +
             std::to_string(scale.item_count()) + " items");
  }

  CfaProblem problem;
  problem.n_items = scale.item_count();
  problem.free_phi = model.factor_covariance == FactorCovariance::Free;

  CfaResult result;
  result.factors = model.factor_order(scale);
  problem.n_factors = static_cast<int>(result.factors.size());

  std::vector<int> per_factor_count(result.factors.size(), 0);
  for (const Item& item : scale.items) {
    const std::string& factor = model.assignment.at(item.id);
    const auto it = std::find(result.factors.begin(), result.factors.end(), factor);
    const int idx = static_cast<int>(it - result.factors.begin());
    problem.item_factor.push_back(idx);
    ++per_factor_count[static_cast<size_t>(idx)];
  }
  for (size_t k = 0; k < per_factor_count.size(); ++k) {
    if (per_factor_count[k] < 2) {
      fail(Errc::UnidentifiedModel,
           "factor '" + result.factors[k] + "' carries " +
               std::to_string(per_factor_count[k]) +
               " item(s); at least 2 are needed");
    }
  }
  result.item_factor = problem.item_factor;

  problem.s = covariance_matrix(columns);
  {
    Eigen::LLT<Eigen::MatrixXd> llt(problem.s);
    if (llt.info() != Eigen::Success) {
      const double ridge = 1e-8 * problem.s.trace() /
                           static_cast<double>(problem.n_items);
      problem.s.diagonal().array() += ridge;
      result.ridge_applied = true;
      Eigen::LLT<Eigen::MatrixXd> retry(problem.s);
      if (retry.info() != Eigen::Success) {
        fail(Errc::SingularCovariance,
             "sample covariance stays non-positive-definite after repair");
      }
    }
  }

  // BFGS on the flat parameter vector, Armijo backtracking line search.
  Eigen::VectorXd theta = smc_start(problem);
  problem.clamp(theta);
  const int dim = problem.n_params();
  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(dim, dim);
  double f = problem.value(theta);
  if (!std::isfinite(f)) {
    // Retreat to a conservative start: small loadings, large uniquenesses.
    for (int i = 0; i < problem.n_items; ++i) {
      theta(i) = 0.1 * std::sqrt(problem.s(i, i));
      theta(dim - problem.n_items + i) = std::log(0.9 * problem.s(i, i));
    }
    f = problem.value(theta);
  }
  Eigen::VectorXd grad = problem.gradient(theta);

  int iter = 0;
  int stalled = 0;
  for (; iter < options.max_iterations; ++iter) {
    if (grad.lpNorm<Eigen::Infinity>() < options.tolerance) {
      result.converged = true;
      break;
    }
    Eigen::VectorXd direction = -h_inv * grad;
    double slope = grad.dot(direction);
    if (slope >= 0.0) {  // curvature update went bad; reset to steepest descent
      h_inv.setIdentity();
      direction = -grad;
      slope = grad.dot(direction);
    }

    double step = 1.0;
    Eigen::VectorXd theta_next;
    double f_next = kInf;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      theta_next = theta + step * direction;
      problem.clamp(theta_next);
      f_next = problem.value(theta_next);
      if (std::isfinite(f_next) && f_next <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // no descent step exists at this precision

    const Eigen::VectorXd grad_next = problem.gradient(theta_next);
    const Eigen::VectorXd s_vec = theta_next - theta;
    const Eigen::VectorXd y_vec = grad_next - grad;
    const double sy = s_vec.dot(y_vec);
    if (sy > 1e-12) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(dim, dim);
      const Eigen::MatrixXd left = identity - rho * s_vec * y_vec.transpose();
      h_inv = left * h_inv * left.transpose() +
              rho * s_vec * s_vec.transpose();
    }
    // Rounding noise can keep the line search accepting null steps long
    // after the discrepancy has hit its floating-point floor.
    stalled = (f - f_next) < 1e-14 * std::max(1.0, std::abs(f)) ? stalled + 1 : 0;
    theta = std::move(theta_next);
    f = f_next;
    grad = grad_next;
    if (stalled >= 5) break;
  }
  result.iterations = iter;
  if (!result.converged &&
      grad.lpNorm<Eigen::Infinity>() < options.tolerance) {
    result.converged = true;  // tolerance reached on the final iteration
  }

  Eigen::MatrixXd lambda, phi;
  Eigen::VectorXd psi;
  problem.unpack(theta, lambda, phi, psi);

  // Fix reflection: each factor's first-listed item loads non-negatively.
  for (int k = 0; k < problem.n_factors; ++k) {
    int first = -1;
    for (int i = 0; i < problem.n_items; ++i) {
      if (problem.item_factor[static_cast<size_t>(i)] == k) {
        first = i;
        break;
      }
    }
    if (first >= 0 && lambda(first, k) < 0.0) {
      lambda.col(k) = -lambda.col(k);
      for (int l = 0; l < problem.n_factors; ++l) {
        if (l == k) continue;
        phi(k, l) = -phi(k, l);
        phi(l, k) = -phi(l, k);
      }
    }
  }

  result.discrepancy = cfa_discrepancy(problem.s, lambda, phi, psi);
  result.factor_correlations = phi;
  result.loadings.resize(static_cast<size_t>(problem.n_items));
  result.uniquenesses.resize(static_cast<size_t>(problem.n_items));
  result.standardized_loadings.resize(static_cast<size_t>(problem.n_items));
  Eigen::MatrixXd sigma = lambda * phi * lambda.transpose();
  sigma.diagonal() += psi;
  for (int i = 0; i < problem.n_items; ++i) {
    const int k = problem.item_factor[static_cast<size_t>(i)];
    result.loadings[static_cast<size_t>(i)] = lambda(i, k);
    result.uniquenesses[static_cast<size_t>(i)] = psi(i);
    result.standardized_loadings[static_cast<size_t>(i)] =
        lambda(i, k) / std::sqrt(sigma(i, i));
    if (std::abs(result.standardized_loadings[static_cast<size_t>(i)]) <
        options.weak_loading_threshold) {
      result.weak_items.push_back(scale.items[static_cast<size_t>(i)].id);
    }
  }
  return result;
}

CfaResult cfa_fit(const ResponseMatrix& matrix, const ScaleDefinition& scale,
                  const CfaModel& model, const CfaOptions& options) {
  matrix.validate(scale);
  return cfa_fit(matrix.values.cast<double>(), scale, model, options);
}

}  // namespace xeq::construct
