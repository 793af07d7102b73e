#include "xeq/simulation.hpp"

#include <algorithm>
#include <cmath>

#include "xeq/errors.hpp"

namespace xeq::simulation {

GeneratorSpec GeneratorSpec::defaults(const ScaleDefinition& scale,
                                      int n_respondents, uint64_t seed) {
  GeneratorSpec spec;
  const size_t m = static_cast<size_t>(scale.item_count());
  spec.loadings.assign(m, 0.7);
  spec.uniqueness.assign(m, 1.0 - 0.49);
  const int k = static_cast<int>(scale.dimensions().size());
  spec.factor_cov = Eigen::MatrixXd::Identity(k, k);
  spec.n_respondents = n_respondents;
  spec.seed = seed;
  return spec;
}

void GeneratorSpec::validate(const ScaleDefinition& scale) const {
  const size_t m = static_cast<size_t>(scale.item_count());
  if (loadings.size() != m || uniqueness.size() != m) {
    fail(Errc::DimensionMismatch,
         "generator needs one loading and one uniqueness per item");
  }
  for (double u : uniqueness) {
    if (u <= 0.0) fail(Errc::BadSpec, "uniqueness values must be positive");
  }
  const int k = static_cast<int>(scale.dimensions().size());
  if (factor_cov.rows() != k || factor_cov.cols() != k) {
    fail(Errc::DimensionMismatch,
         "factor covariance must be " + std::to_string(k) + "x" +
             std::to_string(k));
  }
  if (!factor_cov.isApprox(factor_cov.transpose(), 1e-12)) {
    fail(Errc::NonSymmetric, "factor covariance is not symmetric");
  }
  if (thresholds.empty()) fail(Errc::BadSpec, "need at least one threshold");
  for (size_t i = 1; i < thresholds.size(); ++i) {
    if (thresholds[i] <= thresholds[i - 1]) {
      fail(Errc::BadSpec, "thresholds must be strictly increasing");
    }
  }
  if (static_cast<int>(thresholds.size()) + 1 !=
      static_cast<int>(scale.likert_codes.size())) {
    fail(Errc::BadSpec, "thresholds must cut the line into one interval per code");
  }
  if (n_respondents < 1) fail(Errc::BadSpec, "n_respondents must be positive");
}

int discretize(double latent, const std::vector<double>& thresholds) {
  int code = 1;
  for (double t : thresholds) {
    if (latent > t) ++code;
  }
  return code;
}

double representative_latent(int code, const std::vector<double>& thresholds) {
  const int n_codes = static_cast<int>(thresholds.size()) + 1;
  if (code < 1 || code > n_codes) {
    fail(Errc::ParseError, "code " + std::to_string(code) + " outside 1.." +
                               std::to_string(n_codes));
  }
  // Half the median gap places the open tails' representatives.
  std::vector<double> gaps;
  for (size_t i = 1; i < thresholds.size(); ++i) {
    gaps.push_back(thresholds[i] - thresholds[i - 1]);
  }
  double tail_offset = 1.0;
  if (!gaps.empty()) {
    std::sort(gaps.begin(), gaps.end());
    const size_t mid = gaps.size() / 2;
    const double median_gap = gaps.size() % 2 == 1
                                  ? gaps[mid]
                                  : (gaps[mid - 1] + gaps[mid]) / 2.0;
    tail_offset = 0.5 * median_gap;
  }
  if (code == 1) return thresholds.front() - tail_offset;
  if (code == n_codes) return thresholds.back() + tail_offset;
  return (thresholds[static_cast<size_t>(code - 2)] +
          thresholds[static_cast<size_t>(code - 1)]) / 2.0;
}

namespace {

// Cholesky factor of the factor covariance, for correlated factor draws.
Eigen::MatrixXd factor_transform(const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    fail(Errc::NotPositiveDefinite, "factor covariance is not positive definite");
  }
  return llt.matrixL();
}

// One respondent's row of codes. Draw order is fixed: K factor normals, then
// M error normals, all from the respondent's own substream.
void fill_row(Eigen::MatrixXi& values, int row, const ScaleDefinition& scale,
              const GeneratorSpec& spec, const Eigen::MatrixXd& chol,
              const std::vector<int>& item_factor, double shift,
              RngStream& stream) {
  const int k = static_cast<int>(chol.rows());
  Eigen::VectorXd z(k);
  for (int f = 0; f < k; ++f) z(f) = stream.next_normal();
  const Eigen::VectorXd factors = chol * z;

  const int m = scale.item_count();
  for (int i = 0; i < m; ++i) {
    const double error =
        std::sqrt(spec.uniqueness[static_cast<size_t>(i)]) * stream.next_normal();
    const double latent =
        spec.loadings[static_cast<size_t>(i)] *
            factors(item_factor[static_cast<size_t>(i)]) +
        error + shift;
    values(row, i) = discretize(latent, spec.thresholds);
  }
}

std::vector<int> item_factor_map(const ScaleDefinition& scale) {
  const auto dims = scale.dimensions();
  std::vector<int> map;
  map.reserve(scale.items.size());
  for (const Item& item : scale.items) {
    const auto it = std::find(dims.begin(), dims.end(), item.dimension);
    map.push_back(static_cast<int>(it - dims.begin()));
  }
  return map;
}

RespondentMeta simulated_meta(const std::string& id, const std::string& group) {
  RespondentMeta meta;
  meta.respondent_id = id;
  meta.group = group;
  meta.duration_seconds = 300.0;
  meta.allocated_seconds = 300.0;
  return meta;
}

std::string padded_id(const char* prefix, int index) {
  std::string number = std::to_string(index + 1);
  while (number.size() < 4) number.insert(number.begin(), '0');
  return std::string(prefix) + number;
}

}  // namespace

ResponseMatrix generate_factor_data(const ScaleDefinition& scale,
                                    const GeneratorSpec& spec) {
  scale.validate();
  spec.validate(scale);
  const Eigen::MatrixXd chol = factor_transform(spec.factor_cov);
  const auto item_factor = item_factor_map(scale);

  ResponseMatrix matrix;
  matrix.scale_id = scale.scale_id;
  matrix.values.resize(spec.n_respondents, scale.item_count());
  for (int r = 0; r < spec.n_respondents; ++r) {
    RngStream stream(spec.seed, static_cast<uint64_t>(r));
    fill_row(matrix.values, r, scale, spec, chol, item_factor, 0.0, stream);
    matrix.respondents.push_back(simulated_meta(padded_id("sim_", r), ""));
  }
  return matrix;
}

ResponseMatrix generate_two_group(const ScaleDefinition& scale,
                                  const GeneratorSpec& spec, double delta,
                                  const std::string& group_a,
                                  const std::string& group_b) {
  scale.validate();
  spec.validate(scale);
  if (group_a == group_b) {
    fail(Errc::BadSpec, "the two groups need distinct names");
  }
  const Eigen::MatrixXd chol = factor_transform(spec.factor_cov);
  const auto item_factor = item_factor_map(scale);

  ResponseMatrix matrix;
  matrix.scale_id = scale.scale_id;
  matrix.values.resize(2 * spec.n_respondents, scale.item_count());
  for (int r = 0; r < spec.n_respondents; ++r) {
    RngStream stream(spec.seed, static_cast<uint64_t>(r));
    fill_row(matrix.values, r, scale, spec, chol, item_factor, 0.0, stream);
    matrix.respondents.push_back(simulated_meta(padded_id("a_", r), group_a));
  }
  for (int r = 0; r < spec.n_respondents; ++r) {
    RngStream stream(spec.seed,
                     static_cast<uint64_t>(spec.n_respondents + r));
    fill_row(matrix.values, spec.n_respondents + r, scale, spec, chol,
             item_factor, -delta, stream);
    matrix.respondents.push_back(simulated_meta(padded_id("b_", r), group_b));
  }
  return matrix;
}

ResponseMatrix generate_retest(const ResponseMatrix& test,
                               const ScaleDefinition& scale, double noise_sd,
                               uint64_t seed,
                               const std::vector<double>& thresholds) {
  test.validate(scale);
  if (noise_sd < 0.0) fail(Errc::BadSpec, "noise_sd must be non-negative");
  if (thresholds.empty()) fail(Errc::BadSpec, "need at least one threshold");
  if (static_cast<int>(thresholds.size()) + 1 !=
      static_cast<int>(scale.likert_codes.size())) {
    fail(Errc::BadSpec, "thresholds must cut the line into one interval per code");
  }

  // Codes may differ from 1..K; map via position in the scale's code list.
  auto code_position = [&scale](int code) {
    const auto it = std::find(scale.likert_codes.begin(),
                              scale.likert_codes.end(), code);
    return static_cast<int>(it - scale.likert_codes.begin()) + 1;
  };

  ResponseMatrix retest;
  retest.scale_id = test.scale_id;
  retest.wave = Wave::Retest;
  retest.respondents = test.respondents;
  retest.values.resizeLike(test.values);
  const int m = scale.item_count();
  for (int r = 0; r < test.n_respondents(); ++r) {
    RngStream stream(seed, static_cast<uint64_t>(r));
    for (int c = 0; c < m; ++c) {
      const double base =
          representative_latent(code_position(test.values(r, c)), thresholds);
      const double jitter = noise_sd == 0.0 ? 0.0 : noise_sd * stream.next_normal();
      const int position = discretize(base + jitter, thresholds);
      retest.values(r, c) = scale.likert_codes[static_cast<size_t>(position - 1)];
    }
  }
  return retest;
}

}  // namespace xeq::simulation
