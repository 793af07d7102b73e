#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xeq/scale.hpp"

namespace xeq::scoring {

// Sum of one respondent's codes over the whole scale.
double stakeholder_score(std::span<const int> row, const ScaleDefinition& scale);

struct FactorScore {
  std::string dimension;
  double total = 0.0;       // sum of codes on the dimension's items
  double mean = 0.0;        // total / item count
  double attainment = 0.0;  // (mean - min code) / (max code - min code), in [0,1]
  int n_items = 0;
};

struct FactorProfile {
  std::vector<FactorScore> factors;          // scale dimension order
  std::vector<std::string> ranked_deficits;  // dimensions, weakest attainment first
};

// Per-dimension subscores for one respondent row. Ties in the deficiency
// ranking keep scale dimension order.
FactorProfile factor_scores(std::span<const int> row,
                            const ScaleDefinition& scale);

// Weighted mean of per-respondent totals: uniform weights when `weights` is
// empty, otherwise one non-negative weight per respondent summing to 1 within
// 1e-9 (BadWeights otherwise).
double system_score(const ResponseMatrix& matrix, const ScaleDefinition& scale,
                    std::span<const double> weights = {});

struct BenchmarkEntry {
  std::string system_id;
  std::map<std::string, double> dimension_totals;  // dimension -> mean total
  double overall = 0.0;                            // mean participant total
  std::string timestamp;                           // ISO-8601, informational
};

struct BenchmarkStore {
  int format_version = 1;  // on-disk format; newer files are rejected
  int revision = 0;        // bumped by every add()
  std::string scale_id;
  std::string scale_version;
  std::vector<BenchmarkEntry> entries;

  // Throws DuplicateSystem when the id is already present.
  void add(const BenchmarkEntry& entry);
};

BenchmarkStore load_benchmarks(const std::string& path);
void save_benchmarks(const BenchmarkStore& store, const std::string& path);

enum class BenchmarkBand { Excellent, Good, AboveAverage, BelowAverage, Bad };

const char* benchmark_band_name(BenchmarkBand band);
BenchmarkBand band_for_percentile(double percentile);

struct Classification {
  double percentile = 0.0;  // mean-rank percentile against the store
  BenchmarkBand band = BenchmarkBand::Bad;
  int n_reference = 0;  // entries ranked against (candidate excluded)
  std::map<std::string, double> dimension_percentiles;
};

// Ranks `candidate.overall` against the stored systems' overall scores using
// mean ranks: percentile = (below + 0.5 * ties) / n * 100. A stored entry
// with the candidate's id is excluded from the reference set. Throws
// EmptyBenchmark when no reference entries remain.
Classification classify_system(const BenchmarkStore& store,
                               const BenchmarkEntry& candidate);

}  // namespace xeq::scoring
