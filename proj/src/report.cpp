#include "xeq/report.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>

#include "xeq/errors.hpp"

namespace xeq::report {

namespace {

std::string iso_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buffer;
}

std::string fixed4(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.4f", value);
  return buffer;
}

nlohmann::json ratio_json(const Ratio& ratio) {
  return {{"numerator", ratio.num},
          {"denominator", ratio.den},
          {"value", ratio.value()}};
}

}  // namespace

PipelineOutputs run_pipeline(const PipelineConfig& config) {
  if (config.responses_path.empty()) {
    fail(Errc::BadConfig, "a responses file is required");
  }

  PipelineOutputs out;
  out.config = config;
  out.scale = config.scale_path.empty() ? ScaleDefinition::xeq_reference()
                                        : load_scale(config.scale_path);

  LoadOptions load_options;
  load_options.strict_missing = config.strict_missing;
  LoadResult loaded = load_responses(config.responses_path, out.scale, load_options);
  out.n_loaded = loaded.matrix.n_respondents();
  out.dropped = std::move(loaded.dropped);
  out.exclusions =
      apply_attention_filters(loaded.matrix, config.min_time_fraction);
  const ResponseMatrix& retained = out.exclusions.retained;
  if (retained.n_respondents() < 3) {
    fail(Errc::TooFewObservations,
         "fewer than 3 respondents survive the attention filters");
  }

  if (!config.expert_ratings_path.empty()) {
    const ExpertRatingMatrix ratings = load_expert_ratings(
        config.expert_ratings_path, out.scale.item_count(), relevance_labels());
    out.content = content_validity_report(ratings, config.cvi_threshold);
  }

  out.internal = reliability::internal_consistency(retained, out.scale,
                                                   config.item_total_threshold);
  out.efa = construct::efa_eigenvalues(retained);
  out.one_factor = construct::one_factor_loadings(retained);
  out.cfa = construct::cfa_fit(retained, out.scale,
                               construct::CfaModel::from_dimensions(out.scale));

  // Discriminant stage runs when the retained wave has exactly two groups,
  // each large enough to stratify.
  {
    std::vector<std::string> group_names;
    std::vector<int> group_counts;
    for (const RespondentMeta& meta : retained.respondents) {
      if (meta.group.empty()) continue;
      auto it = std::find(group_names.begin(), group_names.end(), meta.group);
      if (it == group_names.end()) {
        group_names.push_back(meta.group);
        group_counts.push_back(1);
      } else {
        ++group_counts[static_cast<size_t>(it - group_names.begin())];
      }
    }
    const bool two_groups =
        group_names.size() == 2 &&
        std::all_of(group_counts.begin(), group_counts.end(),
                    [](int n) { return n >= 4; });
    if (two_groups) {
      std::vector<double> totals;
      std::vector<std::string> labels;
      discriminant::LabelledData data;
      std::vector<int> keep_rows;
      for (int r = 0; r < retained.n_respondents(); ++r) {
        const RespondentMeta& meta = retained.respondents[static_cast<size_t>(r)];
        if (meta.group.empty()) continue;
        keep_rows.push_back(r);
        labels.push_back(meta.group);
        totals.push_back(static_cast<double>(retained.values.row(r).sum()));
      }
      data.features.resize(static_cast<Eigen::Index>(keep_rows.size()),
                           retained.values.cols());
      for (size_t i = 0; i < keep_rows.size(); ++i) {
        data.features.row(static_cast<Eigen::Index>(i)) =
            retained.values.row(keep_rows[i]).cast<double>();
      }
      data.labels = labels;
      out.comparison = discriminant::group_comparison(totals, labels);
      discriminant::TrialConfig trial_config;
      trial_config.n_trials = config.trials;
      trial_config.train_fraction = config.train_fraction;
      trial_config.seed = config.seed;
      out.trials = discriminant::run_discriminant_trials(data, trial_config);
    }
  }

  out.system_score = scoring::system_score(retained, out.scale);
  {
    const auto dims = out.scale.dimensions();
    std::vector<scoring::FactorScore> sums;
    for (const std::string& dim : dims) {
      scoring::FactorScore zero;
      zero.dimension = dim;
      zero.n_items = static_cast<int>(out.scale.dimension_items(dim).size());
      sums.push_back(zero);
    }
    for (int r = 0; r < retained.n_respondents(); ++r) {
      std::vector<int> row(static_cast<size_t>(retained.n_items()));
      for (int c = 0; c < retained.n_items(); ++c) row[static_cast<size_t>(c)] = retained.values(r, c);
      const auto profile = scoring::factor_scores(row, out.scale);
      for (size_t k = 0; k < sums.size(); ++k) {
        sums[k].total += profile.factors[k].total;
        sums[k].mean += profile.factors[k].mean;
        sums[k].attainment += profile.factors[k].attainment;
      }
    }
    const double n = static_cast<double>(retained.n_respondents());
    for (scoring::FactorScore& score : sums) {
      score.total /= n;
      score.mean /= n;
      score.attainment /= n;
    }
    out.factor_means = std::move(sums);
  }

  if (!config.retest_path.empty()) {
    LoadOptions retest_options;
    retest_options.strict_missing = config.strict_missing;
    retest_options.wave = Wave::Retest;
    const LoadResult second =
        load_responses(config.retest_path, out.scale, retest_options);
    const RetestPairs pairs = pair_retest(retained, second.matrix);
    out.retest = reliability::retest_reliability(pairs, out.scale);
  }
  return out;
}

nlohmann::json to_json(const PipelineOutputs& out) {
  nlohmann::json doc;

  doc["meta"] = {
      {"generated_at", iso_utc_now()},
      {"inputs",
       {{"scale", out.config.scale_path.empty() ? "<built-in>"
                                                : out.config.scale_path},
        {"responses", out.config.responses_path},
        {"expert_ratings", out.config.expert_ratings_path},
        {"retest", out.config.retest_path}}},
  };

  doc["scale"] = {{"scale_id", out.scale.scale_id},
                  {"version", out.scale.version},
                  {"n_items", out.scale.item_count()},
                  {"dimensions", out.scale.dimensions()}};

  nlohmann::json dropped = nlohmann::json::array();
  for (const DroppedRow& row : out.dropped) {
    dropped.push_back({{"line", row.line_number},
                       {"respondent_id", row.respondent_id},
                       {"reason", row.reason}});
  }
  nlohmann::json excluded = nlohmann::json::array();
  for (const auto& [id, reason] : out.exclusions.excluded) {
    excluded.push_back(
        {{"respondent_id", id}, {"reason", exclusion_reason_name(reason)}});
  }
  doc["ingestion"] = {{"n_loaded", out.n_loaded},
                      {"dropped_rows", dropped},
                      {"excluded", excluded},
                      {"n_retained", out.exclusions.retained.n_respondents()},
                      {"seed", out.config.seed}};

  if (out.content) {
    nlohmann::json items = nlohmann::json::array();
    for (size_t i = 0; i < out.content->i_cvi.size(); ++i) {
      nlohmann::json node = {{"item", static_cast<int>(i) + 1},
                             {"i_cvi", ratio_json(out.content->i_cvi[i])}};
      if (!out.content->clarity_means.empty()) {
        node["clarity_mean"] = out.content->clarity_means[i];
      }
      items.push_back(node);
    }
    doc["content_validity"] = {
        {"items", items},
        {"s_cvi_average", ratio_json(out.content->s_cvi_average)},
        {"s_cvi_universal", ratio_json(out.content->s_cvi_universal)},
        {"threshold", out.content->threshold},
        {"retained_items", out.content->retained_items}};
  }

  {
    nlohmann::json items = nlohmann::json::array();
    for (const reliability::ItemReliability& item : out.internal.items) {
      items.push_back({{"item", item.item_id},
                       {"item_total", item.item_total},
                       {"below_threshold", item.below_threshold}});
    }
    nlohmann::json flagged = nlohmann::json::array();
    for (const reliability::InterItemFlag& flag : out.internal.inter_item.flagged) {
      flagged.push_back({{"item_a", flag.item_a},
                         {"item_b", flag.item_b},
                         {"r", flag.r},
                         {"redundant", flag.redundant},
                         {"poor_homogeneity", flag.poor_homogeneity}});
    }
    doc["reliability"] = {{"alpha", out.internal.alpha},
                          {"alpha_acceptable", out.internal.alpha_acceptable},
                          {"item_total_threshold", out.internal.item_total_threshold},
                          {"items", items},
                          {"flagged_pairs", flagged}};
  }

  {
    nlohmann::json cfa = {{"converged", out.cfa.converged},
                          {"iterations", out.cfa.iterations},
                          {"discrepancy", out.cfa.discrepancy},
                          {"ridge_applied", out.cfa.ridge_applied},
                          {"factors", out.cfa.factors},
                          {"loadings", out.cfa.loadings},
                          {"standardized_loadings", out.cfa.standardized_loadings},
                          {"uniquenesses", out.cfa.uniquenesses},
                          {"weak_items", out.cfa.weak_items}};
    nlohmann::json phi = nlohmann::json::array();
    for (Eigen::Index r = 0; r < out.cfa.factor_correlations.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < out.cfa.factor_correlations.cols(); ++c) {
        row.push_back(out.cfa.factor_correlations(r, c));
      }
      phi.push_back(row);
    }
    cfa["factor_correlations"] = phi;
    doc["construct_validity"] = {
        {"efa",
         {{"eigenvalues", out.efa.eigenvalues},
          {"variance_proportion", out.efa.variance_proportion},
          {"suggested_factors", out.efa.suggested_factors}}},
        {"one_factor_loadings", out.one_factor},
        {"cfa", cfa}};
  }

  if (out.comparison) {
    nlohmann::json node = {{"f_statistic", out.comparison->f_statistic},
                           {"f_p_value", out.comparison->f_p_value},
                           {"welch_t", out.comparison->welch_t},
                           {"welch_p", out.comparison->welch_p},
                           {"pooled_t", out.comparison->pooled_t},
                           {"pooled_p", out.comparison->pooled_p},
                           {"cohens_d", out.comparison->cohens_d},
                           {"mean_a", out.comparison->mean_a},
                           {"mean_b", out.comparison->mean_b},
                           {"n_a", out.comparison->n_a},
                           {"n_b", out.comparison->n_b}};
    if (out.comparison->blocked_f) {
      node["blocked_f"] = *out.comparison->blocked_f;
      node["blocked_p"] = *out.comparison->blocked_p;
    }
    doc["group_comparison"] = node;
  }
  if (out.trials) {
    doc["discriminant"] = {{"n_trials", out.trials->config.n_trials},
                           {"train_fraction", out.trials->config.train_fraction},
                           {"mean_accuracy", out.trials->mean_accuracy},
                           {"sd_accuracy", out.trials->sd_accuracy},
                           {"mean_macro_f1", out.trials->mean_macro_f1},
                           {"sd_macro_f1", out.trials->sd_macro_f1},
                           {"chance_level", out.trials->chance_level}};
  }

  {
    nlohmann::json factors = nlohmann::json::array();
    for (const scoring::FactorScore& score : out.factor_means) {
      factors.push_back({{"dimension", score.dimension},
                         {"n_items", score.n_items},
                         {"mean_total", score.total},
                         {"mean_item", score.mean},
                         {"attainment", score.attainment}});
    }
    doc["scoring"] = {{"system_score", out.system_score},
                      {"factor_means", factors}};
  }

  if (out.retest) {
    doc["retest"] = {
        {"n_pairs", out.retest->n_pairs},
        {"pearson_r", out.retest->total_correlation.r},
        {"pearson_p", out.retest->total_correlation.p_value},
        {"icc",
         {{"value", out.retest->icc_unscaled.icc},
          {"f_statistic", out.retest->icc_unscaled.f_statistic},
          {"p_value", out.retest->icc_unscaled.p_value},
          {"band", out.retest->band_unscaled}}},
        {"icc_consistency",
         {{"value", out.retest->icc_sf31.icc},
          {"f_statistic", out.retest->icc_sf31.f_statistic},
          {"p_value", out.retest->icc_sf31.p_value},
          {"band", out.retest->band_sf31}}}};
  }
  return doc;
}

nlohmann::json without_meta(const nlohmann::json& report) {
  nlohmann::json copy = report;
  copy.erase("meta");
  return copy;
}

std::string scree_svg(const construct::EfaResult& efa) {
  const int m = static_cast<int>(efa.eigenvalues.size());
  if (m == 0) fail(Errc::EmptyDataset, "no eigenvalues to plot");

  constexpr double width = 640.0, height = 400.0;
  constexpr double left = 60.0, right = 20.0, top = 20.0, bottom = 50.0;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  double max_ev = 1.0;
  for (double v : efa.eigenvalues) max_ev = std::max(max_ev, v);
  max_ev *= 1.05;

  auto x_of = [&](int i) {
    return m == 1 ? left + plot_w / 2.0
                  : left + plot_w * static_cast<double>(i) /
                               static_cast<double>(m - 1);
  };
  auto y_of = [&](double v) { return top + plot_h * (1.0 - v / max_ev); };
  auto num = [](double v) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.2f", v);
    return std::string(buffer);
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
         "viewBox=\"0 0 640 400\">\n";
  svg += "  <rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  // Axes.
  svg += "  <line x1=\"" + num(left) + "\" y1=\"" + num(top) + "\" x2=\"" +
         num(left) + "\" y2=\"" + num(top + plot_h) +
         "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  svg += "  <line x1=\"" + num(left) + "\" y1=\"" + num(top + plot_h) +
         "\" x2=\"" + num(left + plot_w) + "\" y2=\"" + num(top + plot_h) +
         "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  // Kaiser reference line at eigenvalue 1.
  svg += "  <line x1=\"" + num(left) + "\" y1=\"" + num(y_of(1.0)) +
         "\" x2=\"" + num(left + plot_w) + "\" y2=\"" + num(y_of(1.0)) +
         "\" stroke=\"#888888\" stroke-width=\"1\" stroke-dasharray=\"4 3\"/>\n";
  svg += "  <text x=\"" + num(left + plot_w) + "\" y=\"" +
         num(y_of(1.0) - 4.0) +
         "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\" "
         "fill=\"#555555\">eigenvalue = 1</text>\n";
  // Eigenvalue polyline and markers.
  svg += "  <polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
  for (int i = 0; i < m; ++i) {
    if (i) svg += " ";
    svg += num(x_of(i)) + "," + num(y_of(efa.eigenvalues[static_cast<size_t>(i)]));
  }
  svg += "\"/>\n";
  for (int i = 0; i < m; ++i) {
    svg += "  <circle cx=\"" + num(x_of(i)) + "\" cy=\"" +
           num(y_of(efa.eigenvalues[static_cast<size_t>(i)])) +
           "\" r=\"3.5\" fill=\"#1f77b4\"/>\n";
    svg += "  <text x=\"" + num(x_of(i)) + "\" y=\"" + num(top + plot_h + 18.0) +
           "\" font-family=\"sans-serif\" font-size=\"11\" "
           "text-anchor=\"middle\">" +
           std::to_string(i + 1) + "</text>\n";
  }
  // Axis labels.
  svg += "  <text x=\"" + num(left + plot_w / 2.0) + "\" y=\"" +
         num(height - 12.0) +
         "\" font-family=\"sans-serif\" font-size=\"12\" "
         "text-anchor=\"middle\">Component</text>\n";
  svg += "  <text x=\"16\" y=\"" + num(top + plot_h / 2.0) +
         "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
         "transform=\"rotate(-90 16 " + num(top + plot_h / 2.0) + ")\">"
         "Eigenvalue</text>\n";
  svg += "</svg>\n";
  return svg;
}

std::string item_table(const PipelineOutputs& out) {
  if (!out.content) {
    fail(Errc::MissingSection,
         "item table needs the content validity section; supply expert ratings");
  }
  const int m = out.scale.item_count();
  if (static_cast<int>(out.content->i_cvi.size()) != m ||
      static_cast<int>(out.internal.items.size()) != m ||
      static_cast<int>(out.one_factor.size()) != m ||
      static_cast<int>(out.cfa.standardized_loadings.size()) != m) {
    fail(Errc::DimensionMismatch, "item table sections disagree on item count");
  }

  std::string table;
  table += "Item   I-CVI    Item-Total   One-Factor   Dimension    CFA Loading\n";
  table += "-----  -------  -----------  -----------  -----------  -----------\n";
  for (int i = 0; i < m; ++i) {
    char line[160];
    std::snprintf(line, sizeof line, "%-5d  %-7s  %-11s  %-11s  %-11s  %s\n",
                  out.scale.items[static_cast<size_t>(i)].id,
                  fixed4(out.content->i_cvi[static_cast<size_t>(i)].value()).c_str(),
                  fixed4(out.internal.items[static_cast<size_t>(i)].item_total).c_str(),
                  fixed4(out.one_factor[static_cast<size_t>(i)]).c_str(),
                  out.scale.items[static_cast<size_t>(i)].dimension.c_str(),
                  fixed4(out.cfa.standardized_loadings[static_cast<size_t>(i)]).c_str());
    table += line;
  }
  char alpha_line[96];
  std::snprintf(alpha_line, sizeof alpha_line,
                "\nCronbach alpha: %s    S-CVI (average): %s    S-CVI (universal): %s\n",
                fixed4(out.internal.alpha).c_str(),
                fixed4(out.content->s_cvi_average.value()).c_str(),
                fixed4(out.content->s_cvi_universal.value()).c_str());
  table += alpha_line;
  return table;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::WriteError, "cannot open '" + path + "' for writing");
  out << content;
  if (!out) fail(Errc::WriteError, "write to '" + path + "' failed");
}

}  // namespace xeq::report
