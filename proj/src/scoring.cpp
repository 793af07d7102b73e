#include "xeq/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

#include "xeq/errors.hpp"
#include "xeq/stats.hpp"

namespace xeq::scoring {

double stakeholder_score(std::span<const int> row,
                         const ScaleDefinition& scale) {
  return static_cast<double>(participant_total(row, scale));
}

FactorProfile factor_scores(std::span<const int> row,
                            const ScaleDefinition& scale) {
  if (static_cast<int>(row.size()) != scale.item_count()) {
    fail(Errc::DimensionMismatch,
         "row has " + std::to_string(row.size()) + " entries, scale needs " +
             std::to_string(scale.item_count()));
  }
  const double min_code = static_cast<double>(scale.likert_codes.front());
  const double max_code = static_cast<double>(scale.likert_codes.back());

  FactorProfile profile;
  for (const std::string& dimension : scale.dimensions()) {
    const auto positions = scale.dimension_items(dimension);
    if (positions.empty()) {
      fail(Errc::EmptyDimension, "dimension '" + dimension + "' has no items");
    }
    FactorScore score;
    score.dimension = dimension;
    score.n_items = static_cast<int>(positions.size());
    for (int pos : positions) {
      const int code = row[static_cast<size_t>(pos)];
      if (!scale.is_valid_code(code)) {
        fail(Errc::ParseError,
             "code " + std::to_string(code) + " outside the scale's codes");
      }
      score.total += static_cast<double>(code);
    }
    score.mean = score.total / static_cast<double>(score.n_items);
    score.attainment = (score.mean - min_code) / (max_code - min_code);
    profile.factors.push_back(score);
  }

  // Weakest dimensions first; stable sort keeps scale order on ties.
  std::vector<int> order(profile.factors.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int lhs, int rhs) {
    return profile.factors[static_cast<size_t>(lhs)].attainment <
           profile.factors[static_cast<size_t>(rhs)].attainment;
  });
  for (int idx : order) {
    profile.ranked_deficits.push_back(
        profile.factors[static_cast<size_t>(idx)].dimension);
  }
  return profile;
}

double system_score(const ResponseMatrix& matrix, const ScaleDefinition& scale,
                    std::span<const double> weights) {
  matrix.validate(scale);
  const auto totals = matrix.participant_totals();
  if (weights.empty()) {
    return stats::mean(totals);
  }
  if (weights.size() != totals.size()) {
    fail(Errc::BadWeights, "need " + std::to_string(totals.size()) +
                               " weights, got " + std::to_string(weights.size()));
  }
  double sum = 0.0;
  double weighted = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] < 0.0) {
      fail(Errc::BadWeights, "weight " + std::to_string(i) + " is negative");
    }
    sum += weights[i];
    weighted += weights[i] * totals[i];
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    fail(Errc::BadWeights,
         "weights sum to " + std::to_string(sum) + ", expected 1");
  }
  return weighted;
}

void BenchmarkStore::add(const BenchmarkEntry& entry) {
  for (const BenchmarkEntry& existing : entries) {
    if (existing.system_id == entry.system_id) {
      fail(Errc::DuplicateSystem,
           "system '" + entry.system_id + "' is already benchmarked");
    }
  }
  entries.push_back(entry);
  ++revision;
}

BenchmarkStore load_benchmarks(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::ParseError, "cannot open benchmark store '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::ParseError, "benchmark store '" + path + "': " + e.what());
  }

  BenchmarkStore store;
  try {
    store.format_version = doc.at("version").get<int>();
    if (store.format_version > 1) {
      fail(Errc::VersionMismatch,
           "benchmark store format " + std::to_string(store.format_version) +
               " is newer than this build understands (1)");
    }
    store.revision = doc.at("revision").get<int>();
    store.scale_id = doc.at("scale_id").get<std::string>();
    store.scale_version = doc.at("scale_version").get<std::string>();
    for (const auto& node : doc.at("entries")) {
      BenchmarkEntry entry;
      entry.system_id = node.at("system_id").get<std::string>();
      entry.overall = node.at("overall").get<double>();
      entry.timestamp = node.at("timestamp").get<std::string>();
      for (const auto& [dim, value] : node.at("dimension_totals").items()) {
        entry.dimension_totals[dim] = value.get<double>();
      }
      store.entries.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::ParseError, "benchmark store '" + path + "': " + e.what());
  }
  return store;
}

void save_benchmarks(const BenchmarkStore& store, const std::string& path) {
  nlohmann::json doc;
  doc["version"] = store.format_version;
  doc["revision"] = store.revision;
  doc["scale_id"] = store.scale_id;
  doc["scale_version"] = store.scale_version;
  doc["entries"] = nlohmann::json::array();
  for (const BenchmarkEntry& entry : store.entries) {
    nlohmann::json node;
    node["system_id"] = entry.system_id;
    node["overall"] = entry.overall;
    node["timestamp"] = entry.timestamp;
    node["dimension_totals"] = nlohmann::json::object();
    for (const auto& [dim, value] : entry.dimension_totals) {
      node["dimension_totals"][dim] = value;
    }
    doc["entries"].push_back(std::move(node));
  }
  std::ofstream out(path);
  if (!out) fail(Errc::WriteError, "cannot write benchmark store '" + path + "'");
  out << doc.dump(2) << '\n';
  if (!out) fail(Errc::WriteError, "write to '" + path + "' failed");
}

const char* benchmark_band_name(BenchmarkBand band) {
  switch (band) {
    case BenchmarkBand::Excellent: return "Excellent";
    case BenchmarkBand::Good: return "Good";
    case BenchmarkBand::AboveAverage: return "AboveAverage";
    case BenchmarkBand::BelowAverage: return "BelowAverage";
    case BenchmarkBand::Bad: return "Bad";
  }
  return "Unknown";
}

BenchmarkBand band_for_percentile(double percentile) {
  if (percentile >= 90.0) return BenchmarkBand::Excellent;
  if (percentile >= 75.0) return BenchmarkBand::Good;
  if (percentile >= 50.0) return BenchmarkBand::AboveAverage;
  if (percentile >= 25.0) return BenchmarkBand::BelowAverage;
  return BenchmarkBand::Bad;
}

namespace {

// Mean-rank percentile of `value` within `reference`.
double mean_rank_percentile(double value, const std::vector<double>& reference) {
  int below = 0;
  int ties = 0;
  for (double r : reference) {
    if (r < value) ++below;
    else if (r == value) ++ties;
  }
  return (static_cast<double>(below) + 0.5 * static_cast<double>(ties)) /
         static_cast<double>(reference.size()) * 100.0;
}

}  // namespace

Classification classify_system(const BenchmarkStore& store,
                               const BenchmarkEntry& candidate) {
  std::vector<const BenchmarkEntry*> reference;
  for (const BenchmarkEntry& entry : store.entries) {
    if (entry.system_id != candidate.system_id) reference.push_back(&entry);
  }
  if (reference.empty()) {
    fail(Errc::EmptyBenchmark,
         "no reference systems to classify '" + candidate.system_id +
             "' against");
  }

  Classification out;
  out.n_reference = static_cast<int>(reference.size());

  std::vector<double> overall;
  overall.reserve(reference.size());
  for (const BenchmarkEntry* entry : reference) overall.push_back(entry->overall);
  out.percentile = mean_rank_percentile(candidate.overall, overall);
  out.band = band_for_percentile(out.percentile);

  for (const auto& [dim, value] : candidate.dimension_totals) {
    std::vector<double> dim_reference;
    for (const BenchmarkEntry* entry : reference) {
      auto it = entry->dimension_totals.find(dim);
      if (it != entry->dimension_totals.end()) dim_reference.push_back(it->second);
    }
    if (!dim_reference.empty()) {
      out.dimension_percentiles[dim] = mean_rank_percentile(value, dim_reference);
    }
  }
  return out;
}

}  // namespace xeq::scoring
