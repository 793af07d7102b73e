#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "xeq/rng.hpp"
#include "xeq/scale.hpp"

namespace xeq::simulation {

// Parameters of the latent factor model used to synthesize Likert responses:
// one factor per scale dimension, item latent = loading * factor + error,
// discretized against the thresholds (code = 1 + count of thresholds below
// the latent).
struct GeneratorSpec {
  std::vector<double> loadings;          // one per item, default 0.7
  std::vector<double> uniqueness;        // error variances, default 1 - 0.7^2
  Eigen::MatrixXd factor_cov;            // K x K, default identity
  std::vector<double> thresholds{-1.5, -0.5, 0.5, 1.5};
  int n_respondents = 100;
  uint64_t seed = 0;

  static GeneratorSpec defaults(const ScaleDefinition& scale,
                                int n_respondents, uint64_t seed);
  void validate(const ScaleDefinition& scale) const;
};

// Factor-model sample for one scale. Respondent i draws from substream i of
// the seed, so any prefix of respondents is stable under changes to
// n_respondents. Durations are set to the allocated time (no attention flags).
ResponseMatrix generate_factor_data(const ScaleDefinition& scale,
                                    const GeneratorSpec& spec);

// Two groups of equal size; group_b's item latents are shifted down by
// `delta` before discretization, so delta = 0 makes the groups exchangeable.
ResponseMatrix generate_two_group(const ScaleDefinition& scale,
                                  const GeneratorSpec& spec, double delta,
                                  const std::string& group_a = "A",
                                  const std::string& group_b = "B");

// Retest wave for an observed matrix: each code maps back to a representative
// latent for its interval (interior midpoints; open tails sit half the median
// threshold gap beyond the boundary), Gaussian noise with `noise_sd` is
// added, and the result is re-discretized. noise_sd = 0 reproduces the codes
// exactly. Respondent ids carry over.
ResponseMatrix generate_retest(const ResponseMatrix& test,
                               const ScaleDefinition& scale, double noise_sd,
                               uint64_t seed,
                               const std::vector<double>& thresholds = {
                                   -1.5, -0.5, 0.5, 1.5});

// Representative latent for a code under the thresholds; exposed for tests.
double representative_latent(int code, const std::vector<double>& thresholds);

// 1 + number of thresholds strictly below the latent.
int discretize(double latent, const std::vector<double>& thresholds);

}  // namespace xeq::simulation
