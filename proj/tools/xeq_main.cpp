// Command-line front end for the scale development toolkit. Exit codes:
// 0 success, 2 input/validation error, 3 analysis error.
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "xeq/construct_validity.hpp"
#include "xeq/content_validity.hpp"
#include "xeq/discriminant.hpp"
#include "xeq/errors.hpp"
#include "xeq/ingestion.hpp"
#include "xeq/reliability.hpp"
#include "xeq/report.hpp"
#include "xeq/scale.hpp"
#include "xeq/scoring.hpp"
#include "xeq/simulation.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitAnalysis = 3;

xeq::ScaleDefinition resolve_scale(const std::string& scale_path) {
  return scale_path.empty() ? xeq::ScaleDefinition::xeq_reference()
                            : xeq::load_scale(scale_path);
}

void emit(const nlohmann::json& doc, const std::string& out_path) {
  const std::string text = doc.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    xeq::report::write_text_file(out_path, text);
  }
}

std::string iso_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buffer;
}

xeq::scoring::BenchmarkEntry entry_from_responses(
    const std::string& system_id, const std::string& responses_path,
    const xeq::ScaleDefinition& scale, const std::string& timestamp) {
  const xeq::LoadResult loaded = xeq::load_responses(responses_path, scale);
  const xeq::ExclusionReport filtered =
      xeq::apply_attention_filters(loaded.matrix);
  const xeq::ResponseMatrix& retained = filtered.retained;
  if (retained.n_respondents() < 1) {
    xeq::fail(xeq::Errc::EmptyDataset,
              "no respondents survive the attention filters");
  }

  xeq::scoring::BenchmarkEntry entry;
  entry.system_id = system_id;
  entry.timestamp = timestamp.empty() ? iso_now() : timestamp;
  entry.overall = xeq::scoring::system_score(retained, scale);
  for (const std::string& dim : scale.dimensions()) {
    double sum = 0.0;
    for (int r = 0; r < retained.n_respondents(); ++r) {
      for (int pos : scale.dimension_items(dim)) {
        sum += static_cast<double>(retained.values(r, pos));
      }
    }
    entry.dimension_totals[dim] =
        sum / static_cast<double>(retained.n_respondents());
  }
  return entry;
}

int run(int argc, char** argv) {
  CLI::App app{"Scale development and validation toolkit"};
  app.require_subcommand(1);

  // --- validate-content -----------------------------------------------
  std::string vc_ratings, vc_clarity, vc_scale, vc_out;
  double vc_threshold = 0.75;
  CLI::App* validate = app.add_subcommand(
      "validate-content", "Content validity indices from an expert panel");
  validate->add_option("--expert-ratings", vc_ratings, "Relevance ratings CSV")
      ->required();
  validate->add_option("--clarity-ratings", vc_clarity, "Clarity ratings CSV");
  validate->add_option("--scale", vc_scale, "Scale JSON (default: built-in)");
  validate->add_option("--threshold-cvi", vc_threshold,
                       "Retention threshold (strictly greater keeps the item)");
  validate->add_option("--out", vc_out, "Write the JSON report here");

  // --- analyze ----------------------------------------------------------
  xeq::report::PipelineConfig pipeline;
  std::string an_out;
  CLI::App* analyze =
      app.add_subcommand("analyze", "Run the full validation pipeline");
  analyze->add_option("--responses", pipeline.responses_path, "Responses CSV")
      ->required();
  analyze->add_option("--scale", pipeline.scale_path, "Scale JSON (default: built-in)");
  analyze->add_option("--expert-ratings", pipeline.expert_ratings_path,
                      "Relevance ratings CSV (adds content validity)");
  analyze->add_option("--retest", pipeline.retest_path,
                      "Second-wave responses CSV (adds retest reliability)");
  analyze->add_option("--threshold-cvi", pipeline.cvi_threshold, "CVI threshold");
  analyze->add_option("--trials", pipeline.trials, "Discriminant trial count");
  analyze->add_option("--train-fraction", pipeline.train_fraction,
                      "Training fraction per trial");
  analyze->add_option("--seed", pipeline.seed, "Seed for the trial streams");
  analyze->add_flag("--strict-missing", pipeline.strict_missing,
                    "Fail on blank cells instead of dropping the row");
  analyze->add_option("--out", an_out, "Write the JSON report here");

  // --- retest -----------------------------------------------------------
  std::string rt_responses, rt_retest, rt_scale, rt_out;
  CLI::App* retest =
      app.add_subcommand("retest", "Test-retest reliability for two waves");
  retest->add_option("--responses", rt_responses, "First-wave CSV")->required();
  retest->add_option("--retest", rt_retest, "Second-wave CSV")->required();
  retest->add_option("--scale", rt_scale, "Scale JSON (default: built-in)");
  retest->add_option("--out", rt_out, "Write the JSON report here");

  // --- score ------------------------------------------------------------
  std::string sc_responses, sc_scale, sc_out;
  bool sc_per_respondent = false;
  CLI::App* score = app.add_subcommand("score", "Experience quality scores");
  score->add_option("--responses", sc_responses, "Responses CSV")->required();
  score->add_option("--scale", sc_scale, "Scale JSON (default: built-in)");
  score->add_flag("--per-respondent", sc_per_respondent,
                  "Include every stakeholder's score and factor profile");
  score->add_option("--out", sc_out, "Write the JSON report here");

  // --- benchmark ---------------------------------------------------------
  CLI::App* benchmark =
      app.add_subcommand("benchmark", "Reference store of scored systems");
  benchmark->require_subcommand(1);

  std::string ba_store, ba_system, ba_responses, ba_scale, ba_timestamp;
  CLI::App* bench_add =
      benchmark->add_subcommand("add", "Score a system and add it to the store");
  bench_add->add_option("--store", ba_store, "Benchmark JSON store")->required();
  bench_add->add_option("--system-id", ba_system, "Identifier of the system")
      ->required();
  bench_add->add_option("--responses", ba_responses, "Responses CSV")->required();
  bench_add->add_option("--scale", ba_scale, "Scale JSON (default: built-in)");
  bench_add->add_option("--timestamp", ba_timestamp,
                        "ISO timestamp to record (default: now)");

  std::string bc_store, bc_system, bc_responses, bc_scale, bc_out;
  CLI::App* bench_classify = benchmark->add_subcommand(
      "classify", "Percentile band of a system against the store");
  bench_classify->add_option("--store", bc_store, "Benchmark JSON store")
      ->required();
  bench_classify->add_option("--system-id", bc_system, "Identifier of the system")
      ->required();
  bench_classify->add_option("--responses", bc_responses,
                             "Responses CSV (otherwise the stored entry is used)");
  bench_classify->add_option("--scale", bc_scale, "Scale JSON (default: built-in)");
  bench_classify->add_option("--out", bc_out, "Write the JSON report here");

  std::string bl_store;
  CLI::App* bench_list =
      benchmark->add_subcommand("list", "Print the stored systems");
  bench_list->add_option("--store", bl_store, "Benchmark JSON store")->required();

  // --- simulate -----------------------------------------------------------
  std::string sim_out, sim_retest_out, sim_scale;
  int sim_n = 100;
  uint64_t sim_seed = 0;
  double sim_delta = 0.0, sim_noise = 0.3;
  CLI::App* simulate =
      app.add_subcommand("simulate", "Synthesize factor-model response data");
  simulate->add_option("--out", sim_out, "Responses CSV to write")->required();
  simulate->add_option("--scale", sim_scale, "Scale JSON (default: built-in)");
  simulate->add_option("--n", sim_n, "Respondents (per group when --delta is set)");
  simulate->add_option("--seed", sim_seed, "Generator seed");
  simulate->add_option("--delta", sim_delta,
                       "Latent shift of group B; 0 keeps a single group");
  simulate->add_option("--retest-out", sim_retest_out,
                       "Also write a second wave derived from the first");
  simulate->add_option("--noise-sd", sim_noise,
                       "Latent noise of the second wave");

  // --- report ---------------------------------------------------------------
  xeq::report::PipelineConfig report_config;
  std::string rp_dir;
  CLI::App* report_cmd = app.add_subcommand(
      "report", "Pipeline plus rendered artifacts in a directory");
  report_cmd->add_option("--responses", report_config.responses_path,
                         "Responses CSV")->required();
  report_cmd->add_option("--out", rp_dir, "Output directory")->required();
  report_cmd->add_option("--scale", report_config.scale_path,
                         "Scale JSON (default: built-in)");
  report_cmd->add_option("--expert-ratings", report_config.expert_ratings_path,
                         "Relevance ratings CSV");
  report_cmd->add_option("--retest", report_config.retest_path,
                         "Second-wave responses CSV");
  report_cmd->add_option("--threshold-cvi", report_config.cvi_threshold,
                         "CVI threshold");
  report_cmd->add_option("--trials", report_config.trials, "Discriminant trials");
  report_cmd->add_option("--train-fraction", report_config.train_fraction,
                         "Training fraction per trial");
  report_cmd->add_option("--seed", report_config.seed, "Seed for trial streams");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  if (validate->parsed()) {
    const xeq::ScaleDefinition scale = resolve_scale(vc_scale);
    const xeq::ExpertRatingMatrix relevance = xeq::load_expert_ratings(
        vc_ratings, scale.item_count(), xeq::relevance_labels());
    xeq::ExpertRatingMatrix clarity;
    const bool have_clarity = !vc_clarity.empty();
    if (have_clarity) {
      clarity = xeq::load_expert_ratings(vc_clarity, scale.item_count(),
                                         xeq::clarity_labels());
    }
    const xeq::CviReport report = xeq::content_validity_report(
        relevance, vc_threshold, have_clarity ? &clarity : nullptr);

    nlohmann::json doc;
    doc["scale_id"] = scale.scale_id;
    doc["n_experts"] = relevance.n_experts();
    doc["threshold"] = report.threshold;
    doc["items"] = nlohmann::json::array();
    for (size_t i = 0; i < report.i_cvi.size(); ++i) {
      nlohmann::json node = {
          {"item", static_cast<int>(i) + 1},
          {"i_cvi", report.i_cvi[i].value()},
          {"endorsements", report.i_cvi[i].num},
          {"panel", report.i_cvi[i].den},
      };
      if (!report.clarity_means.empty()) node["clarity_mean"] = report.clarity_means[i];
      doc["items"].push_back(node);
    }
    doc["s_cvi_average"] = report.s_cvi_average.value();
    doc["s_cvi_universal"] = report.s_cvi_universal.value();
    doc["retained_items"] = report.retained_items;
    emit(doc, vc_out);
    return kExitOk;
  }

  if (analyze->parsed()) {
    const xeq::report::PipelineOutputs outputs = xeq::report::run_pipeline(pipeline);
    emit(xeq::report::to_json(outputs), an_out);
    return kExitOk;
  }

  if (retest->parsed()) {
    const xeq::ScaleDefinition scale = resolve_scale(rt_scale);
    const xeq::LoadResult wave1 = xeq::load_responses(rt_responses, scale);
    xeq::LoadOptions second;
    second.wave = xeq::Wave::Retest;
    const xeq::LoadResult wave2 = xeq::load_responses(rt_retest, scale, second);
    const xeq::RetestPairs pairs = xeq::pair_retest(wave1.matrix, wave2.matrix);
    const xeq::reliability::RetestReport report =
        xeq::reliability::retest_reliability(pairs, scale);

    nlohmann::json doc;
    doc["n_pairs"] = report.n_pairs;
    doc["unmatched_test"] = pairs.unmatched_test;
    doc["unmatched_retest"] = pairs.unmatched_retest;
    doc["pearson_r"] = report.total_correlation.r;
    doc["pearson_p"] = report.total_correlation.p_value;
    doc["icc"] = {{"value", report.icc_unscaled.icc},
                  {"f_statistic", report.icc_unscaled.f_statistic},
                  {"p_value", report.icc_unscaled.p_value},
                  {"band", report.band_unscaled}};
    doc["icc_consistency"] = {{"value", report.icc_sf31.icc},
                              {"f_statistic", report.icc_sf31.f_statistic},
                              {"p_value", report.icc_sf31.p_value},
                              {"band", report.band_sf31}};
    emit(doc, rt_out);
    return kExitOk;
  }

  if (score->parsed()) {
    const xeq::ScaleDefinition scale = resolve_scale(sc_scale);
    const xeq::LoadResult loaded = xeq::load_responses(sc_responses, scale);
    const xeq::ResponseMatrix& matrix = loaded.matrix;

    nlohmann::json doc;
    doc["scale_id"] = scale.scale_id;
    doc["n_respondents"] = matrix.n_respondents();
    doc["system_score"] = xeq::scoring::system_score(matrix, scale);
    if (sc_per_respondent) {
      doc["stakeholders"] = nlohmann::json::array();
      for (int r = 0; r < matrix.n_respondents(); ++r) {
        std::vector<int> row(static_cast<size_t>(matrix.n_items()));
        for (int c = 0; c < matrix.n_items(); ++c) row[static_cast<size_t>(c)] = matrix.values(r, c);
        const auto profile = xeq::scoring::factor_scores(row, scale);
        nlohmann::json factors = nlohmann::json::array();
        for (const auto& f : profile.factors) {
          factors.push_back({{"dimension", f.dimension},
                             {"total", f.total},
                             {"mean", f.mean},
                             {"attainment", f.attainment}});
        }
        doc["stakeholders"].push_back(
            {{"respondent_id",
              matrix.respondents[static_cast<size_t>(r)].respondent_id},
             {"score", xeq::scoring::stakeholder_score(row, scale)},
             {"factors", factors},
             {"ranked_deficits", profile.ranked_deficits}});
      }
    }
    emit(doc, sc_out);
    return kExitOk;
  }

  if (bench_add->parsed()) {
    const xeq::ScaleDefinition scale = resolve_scale(ba_scale);
    xeq::scoring::BenchmarkStore store;
    if (std::filesystem::exists(ba_store)) {
      store = xeq::scoring::load_benchmarks(ba_store);
      if (store.scale_id != scale.scale_id ||
          store.scale_version != scale.version) {
        xeq::fail(xeq::Errc::VersionMismatch,
                  "store was built for scale '" + store.scale_id + "' v" +
                      store.scale_version + ", not '" + scale.scale_id +
                      "' v" + scale.version);
      }
    } else {
      store.scale_id = scale.scale_id;
      store.scale_version = scale.version;
    }
    store.add(entry_from_responses(ba_system, ba_responses, scale, ba_timestamp));
    xeq::scoring::save_benchmarks(store, ba_store);
    std::cout << "added '" << ba_system << "' (revision " << store.revision
              << ", " << store.entries.size() << " systems)\n";
    return kExitOk;
  }

  if (bench_classify->parsed()) {
    const xeq::ScaleDefinition scale = resolve_scale(bc_scale);
    const xeq::scoring::BenchmarkStore store = xeq::scoring::load_benchmarks(bc_store);
    xeq::scoring::BenchmarkEntry candidate;
    if (!bc_responses.empty()) {
      candidate = entry_from_responses(bc_system, bc_responses, scale, "");
    } else {
      bool found = false;
      for (const auto& entry : store.entries) {
        if (entry.system_id == bc_system) {
          candidate = entry;
          found = true;
          break;
        }
      }
      if (!found) {
        xeq::fail(xeq::Errc::EmptyBenchmark,
                  "system '" + bc_system +
                      "' is not in the store and no responses were given");
      }
    }
    const xeq::scoring::Classification result =
        xeq::scoring::classify_system(store, candidate);

    nlohmann::json doc;
    doc["system_id"] = candidate.system_id;
    doc["overall"] = candidate.overall;
    doc["percentile"] = result.percentile;
    doc["band"] = xeq::scoring::benchmark_band_name(result.band);
    doc["n_reference"] = result.n_reference;
    doc["dimension_percentiles"] = result.dimension_percentiles;
    emit(doc, bc_out);
    return kExitOk;
  }

  if (bench_list->parsed()) {
    const xeq::scoring::BenchmarkStore store = xeq::scoring::load_benchmarks(bl_store);
    std::cout << "scale " << store.scale_id << " v" << store.scale_version
              << ", revision " << store.revision << ", "
              << store.entries.size() << " system(s)\n";
    for (const auto& entry : store.entries) {
      char line[160];
      std::snprintf(line, sizeof line, "  %-24s overall %8.3f  %s\n",
                    entry.system_id.c_str(), entry.overall,
                    entry.timestamp.c_str());
      std::cout << line;
    }
    return kExitOk;
  }

  if (simulate->parsed()) {
    const xeq::ScaleDefinition scale = resolve_scale(sim_scale);
    xeq::simulation::GeneratorSpec spec =
        xeq::simulation::GeneratorSpec::defaults(scale, sim_n, sim_seed);
    const xeq::ResponseMatrix wave1 =
        sim_delta != 0.0
            ? xeq::simulation::generate_two_group(scale, spec, sim_delta)
            : xeq::simulation::generate_factor_data(scale, spec);
    xeq::write_responses_csv(wave1, sim_out);
    std::cout << "wrote " << wave1.n_respondents() << " respondents to "
              << sim_out << "\n";
    if (!sim_retest_out.empty()) {
      const xeq::ResponseMatrix wave2 = xeq::simulation::generate_retest(
          wave1, scale, sim_noise, sim_seed + 1);
      xeq::write_responses_csv(wave2, sim_retest_out);
      std::cout << "wrote the second wave to " << sim_retest_out << "\n";
    }
    return kExitOk;
  }

  if (report_cmd->parsed()) {
    const xeq::report::PipelineOutputs outputs =
        xeq::report::run_pipeline(report_config);
    std::filesystem::create_directories(rp_dir);
    const std::filesystem::path dir(rp_dir);
    xeq::report::write_text_file((dir / "report.json").string(),
                                 xeq::report::to_json(outputs).dump(2) + "\n");
    xeq::report::write_text_file((dir / "scree.svg").string(),
                                 xeq::report::scree_svg(outputs.efa));
    if (outputs.content) {
      xeq::report::write_text_file((dir / "items.txt").string(),
                                   xeq::report::item_table(outputs));
    }
    std::cout << "report written to " << rp_dir << "\n";
    return kExitOk;
  }

  return kExitValidation;  // unreachable: a subcommand is required
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const xeq::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return xeq::is_validation_error(e.code()) ? kExitValidation : kExitAnalysis;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAnalysis;
  }
}
