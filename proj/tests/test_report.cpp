#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "xeq/errors.hpp"
#include "xeq/report.hpp"

using namespace xeq;
namespace rpt = xeq::report;

namespace {

rpt::PipelineConfig pilot_config() {
  rpt::PipelineConfig config;
  config.responses_path = std::string(XEQ_FIXTURE_DIR) + "/pilot_responses.csv";
  config.expert_ratings_path =
      std::string(XEQ_FIXTURE_DIR) + "/expert_ratings.csv";
  config.retest_path = std::string(XEQ_FIXTURE_DIR) + "/pilot_retest.csv";
  config.trials = 10;
  config.seed = 1;
  return config;
}

}  // namespace

TEST_SUITE("report") {
  TEST_CASE("the pipeline runs every stage on the pilot fixture") {
    const rpt::PipelineOutputs out = rpt::run_pipeline(pilot_config());

    CHECK(out.scale.scale_id == "xeq");
    CHECK(out.n_loaded == 143);
    CHECK(out.dropped.empty());
    REQUIRE(out.exclusions.excluded.size() == 3);
    bool saw_rushed = false, saw_flat = false, saw_run = false;
    for (const auto& [id, reason] : out.exclusions.excluded) {
      if (id == "rushed_0001") saw_rushed = true;
      if (id == "flat_0001") saw_flat = true;
      if (id == "run_0001") saw_run = true;
    }
    CHECK(saw_rushed);
    CHECK(saw_flat);
    CHECK(saw_run);
    CHECK(out.exclusions.retained.n_respondents() == 140);

    REQUIRE(out.content.has_value());
    CHECK(out.content->i_cvi.size() == 18);
    CHECK(out.content->retained_items.size() == 18);  // weakest is 0.7692

    CHECK(out.internal.items.size() == 18);
    CHECK(out.internal.alpha > 0.7);
    CHECK(out.efa.eigenvalues.size() == 18);
    CHECK(out.one_factor.size() == 18);
    CHECK(out.cfa.converged);
    CHECK(out.cfa.factors.size() == 4);

    REQUIRE(out.comparison.has_value());
    CHECK(out.comparison->n_a == 70);
    CHECK(out.comparison->n_b == 70);
    CHECK(out.comparison->cohens_d > 1.0);
    REQUIRE(out.trials.has_value());
    CHECK(out.trials->trials.size() == 10);
    CHECK(out.trials->mean_accuracy > 0.7);

    REQUIRE(out.retest.has_value());
    CHECK(out.retest->n_pairs == 140);  // bad actors drop out of the join

    CHECK(out.system_score > 18.0);
    CHECK(out.system_score < 90.0);
    REQUIRE(out.factor_means.size() == 4);
    CHECK(out.factor_means[0].dimension == "Engagement");
  }

  TEST_CASE("reports are identical outside the meta block") {
    const rpt::PipelineConfig config = pilot_config();
    const nlohmann::json first = rpt::to_json(rpt::run_pipeline(config));
    const nlohmann::json second = rpt::to_json(rpt::run_pipeline(config));

    CHECK(first.contains("meta"));
    CHECK(first.at("meta").contains("generated_at"));
    CHECK(rpt::without_meta(first).dump(2) == rpt::without_meta(second).dump(2));
    CHECK_FALSE(rpt::without_meta(first).contains("meta"));

    // Spot-check shape: the big sections exist under stable names.
    for (const char* key : {"scale", "ingestion", "content_validity",
                            "reliability", "construct_validity",
                            "group_comparison", "discriminant", "scoring",
                            "retest"}) {
      CHECK(first.contains(key));
    }
    CHECK(first.at("ingestion").at("n_retained") == 140);
    CHECK(first.at("scoring").at("system_score").get<double>() > 18.0);
  }

  TEST_CASE("optional sections disappear with their inputs") {
    rpt::PipelineConfig config = pilot_config();
    config.expert_ratings_path.clear();
    config.retest_path.clear();
    const rpt::PipelineOutputs out = rpt::run_pipeline(config);
    CHECK_FALSE(out.content.has_value());
    CHECK_FALSE(out.retest.has_value());
    const nlohmann::json doc = rpt::to_json(out);
    CHECK_FALSE(doc.contains("content_validity"));
    CHECK_FALSE(doc.contains("retest"));
    CHECK(doc.contains("reliability"));

    CHECK_THROWS_AS(rpt::item_table(out), Error);
    try {
      rpt::item_table(out);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::MissingSection);
    }
  }

  TEST_CASE("the scree plot is a deterministic standalone SVG") {
    const rpt::PipelineOutputs out = rpt::run_pipeline(pilot_config());
    const std::string svg = rpt::scree_svg(out.efa);
    CHECK(svg == rpt::scree_svg(out.efa));
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("<polyline") != std::string::npos);
    // One marker per eigenvalue plus the Kaiser guide line.
    size_t circles = 0, from = 0;
    while ((from = svg.find("<circle", from)) != std::string::npos) {
      ++circles;
      from += 7;
    }
    CHECK(circles == 18);
    CHECK(svg.find("stroke-dasharray") != std::string::npos);
  }

  TEST_CASE("the item table lines up one row per item") {
    const rpt::PipelineOutputs out = rpt::run_pipeline(pilot_config());
    const std::string table = rpt::item_table(out);
    CHECK(table.find("I-CVI") != std::string::npos);
    CHECK(table.find("Item-Total") != std::string::npos);
    CHECK(table.find("CFA Loading") != std::string::npos);
    CHECK(table.find("Engagement") != std::string::npos);
    CHECK(table.find("alpha") != std::string::npos);

    size_t lines = 1;
    for (char c : table) lines += c == '\n' ? 1 : 0;
    CHECK(lines >= 18 + 3);  // items, header, separator, footers

    // Every item id shows up at a line start.
    for (int item = 1; item <= 18; ++item) {
      const std::string tag = "\n" + std::to_string(item) + " ";
      const bool first_line = table.rfind(std::to_string(item) + " ", 0) == 0;
      CHECK((table.find(tag) != std::string::npos || first_line));
    }
  }

  TEST_CASE("too few usable respondents abort the pipeline early") {
    rpt::PipelineConfig config;
    config.responses_path =
        (std::filesystem::temp_directory_path() / "xeq_tiny_pilot.csv").string();
    // Written on the fly: two usable rows after filtering.
    const ScaleDefinition scale = ScaleDefinition::xeq_reference();
    std::string csv = "respondent_id,group,duration_seconds,allocated_seconds";
    for (const auto& item : scale.items)
      csv += ",item_" + std::to_string(item.id);
    csv += "\n";
    for (int r = 0; r < 2; ++r) {
      csv += "p" + std::to_string(r) + ",,250,300";
      for (int i = 0; i < 18; ++i) csv += "," + std::to_string(1 + (r + i) % 5);
      csv += "\n";
    }
    rpt::write_text_file(config.responses_path, csv);
    try {
      rpt::run_pipeline(config);
      FAIL("expected TooFewObservations");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::TooFewObservations);
    }
    std::remove(config.responses_path.c_str());
  }
}
