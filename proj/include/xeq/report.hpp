#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "xeq/construct_validity.hpp"
#include "xeq/content_validity.hpp"
#include "xeq/discriminant.hpp"
#include "xeq/ingestion.hpp"
#include "xeq/reliability.hpp"
#include "xeq/scale.hpp"
#include "xeq/scoring.hpp"

namespace xeq::report {

struct PipelineConfig {
  std::string scale_path;           // empty: use the built-in reference scale
  std::string responses_path;       // required
  std::string expert_ratings_path;  // optional: adds the content section
  std::string retest_path;          // optional: adds the retest section
  double cvi_threshold = 0.75;
  double min_time_fraction = 0.5;
  double item_total_threshold = 0.5;
  int trials = 100;
  double train_fraction = 0.7;
  uint64_t seed = 0;
  bool strict_missing = false;
};

// Everything one pipeline run produced. Optional sections stay empty when
// their inputs were not supplied (expert ratings, retest wave, group labels).
struct PipelineOutputs {
  PipelineConfig config;
  ScaleDefinition scale;
  int n_loaded = 0;
  std::vector<DroppedRow> dropped;
  ExclusionReport exclusions;
  std::optional<CviReport> content;
  reliability::ReliabilityReport internal;
  construct::EfaResult efa;
  std::vector<double> one_factor;
  construct::CfaResult cfa;
  std::optional<discriminant::GroupComparison> comparison;
  std::optional<discriminant::DiscriminantReport> trials;
  std::optional<reliability::RetestReport> retest;
  double system_score = 0.0;
  std::vector<scoring::FactorScore> factor_means;  // over retained respondents
};

// Fixed stage order: ingest, content validity (when rated), internal
// consistency, construct validity, discriminant trials (when grouped),
// scoring, retest (when a second wave is given).
PipelineOutputs run_pipeline(const PipelineConfig& config);

// Full JSON document. Every value except the "meta" block is a pure function
// of the inputs and seed, so two runs differ at most inside "meta".
nlohmann::json to_json(const PipelineOutputs& outputs);

// Copy of a report with the "meta" block removed, for byte comparisons.
nlohmann::json without_meta(const nlohmann::json& report);

// Scree plot of the eigenvalues as a standalone SVG document.
std::string scree_svg(const construct::EfaResult& efa);

// Fixed-width per-item summary: id, content validity, item-total correlation,
// one-factor loading, dimension, and the confirmatory loading, 4 decimals.
// Throws MissingSection when `content` is absent.
std::string item_table(const PipelineOutputs& outputs);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace xeq::report
