// End-to-end checks of the `xeq` command line: exit codes, JSON output, and
// determinism, driven through a shell the way a user would run it.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

RunResult run_cli(const std::string& args) {
  const std::string command = std::string(XEQ_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = ::popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult result;
  char buffer[4096];
  size_t got;
  while ((got = std::fread(buffer, 1, sizeof buffer, pipe)) > 0) {
    result.output.append(buffer, got);
  }
  const int status = ::pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

json parse(const std::string& text) { return json::parse(text); }

std::string fixture(const std::string& name) {
  return std::string(XEQ_FIXTURE_DIR) + "/" + name;
}

const fs::path& work_dir() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() /
                 ("xeq_integration_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

void spit(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("help is a success and names every subcommand") {
    const RunResult result = run_cli("--help");
    CHECK(result.exit_code == 0);
    for (const char* name : {"validate-content", "analyze", "retest", "score",
                             "benchmark", "simulate", "report"}) {
      CHECK(result.output.find(name) != std::string::npos);
    }
  }

  TEST_CASE("content validation reproduces the expert-panel figures") {
    const RunResult result =
        run_cli("validate-content --expert-ratings " + fixture("expert_ratings.csv"));
    REQUIRE(result.exit_code == 0);
    const json doc = parse(result.output);
    CHECK(doc.at("n_experts") == 13);
    CHECK(doc.at("scale_id") == "xeq");
    CHECK(doc.at("s_cvi_average").get<double>() ==
          doctest::Approx(0.8846).epsilon(5e-5));
    CHECK(doc.at("s_cvi_universal").get<double>() ==
          doctest::Approx(0.2222).epsilon(5e-5));
    REQUIRE(doc.at("items").size() == 18);
    CHECK(doc.at("items")[0].at("i_cvi") == 1.0);
    CHECK(doc.at("items")[4].at("i_cvi").get<double>() ==
          doctest::Approx(12.0 / 13.0).epsilon(1e-12));
    CHECK(doc.at("items")[17].at("i_cvi").get<double>() ==
          doctest::Approx(10.0 / 13.0).epsilon(1e-12));
    CHECK(doc.at("retained_items").size() == 18);

    // A stricter threshold drops the four weakest items.
    const RunResult strict = run_cli(
        "validate-content --threshold-cvi 0.8 --expert-ratings " +
        fixture("expert_ratings.csv"));
    REQUIRE(strict.exit_code == 0);
    CHECK(parse(strict.output).at("retained_items").size() == 14);
  }

  TEST_CASE("clarity ratings add their section") {
    const RunResult result = run_cli(
        "validate-content --expert-ratings " + fixture("expert_ratings.csv") +
        " --clarity-ratings " + fixture("clarity_ratings.csv"));
    REQUIRE(result.exit_code == 0);
    const json doc = parse(result.output);
    REQUIRE(doc.at("items").size() == 18);
    for (const auto& item : doc.at("items")) {
      REQUIRE(item.contains("clarity_mean"));
      CHECK(item.at("clarity_mean").get<double>() > 3.0);
      CHECK(item.at("clarity_mean").get<double>() <= 5.0);
    }
  }

  TEST_CASE("the full pipeline emits every section on the pilot study") {
    const RunResult result = run_cli(
        "analyze --responses " + fixture("pilot_responses.csv") +
        " --expert-ratings " + fixture("expert_ratings.csv") + " --retest " +
        fixture("pilot_retest.csv") + " --trials 10 --seed 1");
    REQUIRE(result.exit_code == 0);
    const json doc = parse(result.output);

    CHECK(doc.at("ingestion").at("n_loaded") == 143);
    CHECK(doc.at("ingestion").at("n_retained") == 140);
    CHECK(doc.at("ingestion").at("excluded").size() == 3);
    CHECK(doc.at("reliability").at("alpha").get<double>() > 0.7);
    CHECK(doc.at("reliability").at("alpha_acceptable") == true);
    CHECK(doc.at("construct_validity").at("cfa").at("converged") == true);
    CHECK(doc.at("construct_validity").at("efa").at("eigenvalues").size() == 18);
    CHECK(doc.at("group_comparison").at("cohens_d").get<double>() > 1.0);
    CHECK(doc.at("discriminant").at("n_trials") == 10);
    CHECK(doc.at("discriminant").at("mean_accuracy").get<double>() > 0.7);
    CHECK(doc.at("retest").at("n_pairs") == 140);
    CHECK(doc.at("scoring").at("system_score").get<double>() > 18.0);
    CHECK(doc.at("content_validity").at("s_cvi_average").at("value").get<double>() ==
          doctest::Approx(0.8846).epsilon(5e-5));
  }

  TEST_CASE("an explicit scale file matches the built-in definition") {
    const RunResult builtin =
        run_cli("analyze --responses " + fixture("pilot_responses.csv") +
                " --trials 5 --seed 3");
    const RunResult explicit_scale =
        run_cli("analyze --responses " + fixture("pilot_responses.csv") +
                " --scale " + std::string(XEQ_SCALE_PATH) + " --trials 5 --seed 3");
    REQUIRE(builtin.exit_code == 0);
    REQUIRE(explicit_scale.exit_code == 0);
    json a = parse(builtin.output);
    json b = parse(explicit_scale.output);
    a.erase("meta");
    b.erase("meta");
    CHECK(a.dump() == b.dump());
  }

  TEST_CASE("validation problems exit with code 2") {
    CHECK(run_cli("analyze --responses /nonexistent.csv").exit_code == 2);
    CHECK(run_cli("analyze").exit_code == 2);            // missing required flag
    CHECK(run_cli("analyze --bogus x").exit_code == 2);  // unknown flag
    CHECK(run_cli("no-such-command").exit_code == 2);

    // A header without item columns names the gap and exits 2.
    const fs::path bad = work_dir() / "missing_column.csv";
    spit(bad, "respondent_id,group,duration_seconds\nr1,A,100\n");
    const RunResult result =
        run_cli("analyze --responses " + bad.string());
    CHECK(result.exit_code == 2);
    CHECK(result.output.find("allocated_seconds") != std::string::npos);

    // Strict missing-value handling turns a blank cell into an error.
    const fs::path blank = work_dir() / "blank_cell.csv";
    std::string csv = "respondent_id,group,duration_seconds,allocated_seconds";
    for (int i = 1; i <= 18; ++i) csv += ",item_" + std::to_string(i);
    csv += "\nr1,A,200,300";
    for (int i = 0; i < 18; ++i) csv += ",4";
    csv += "\nr2,A,200,300,";  // blank item_1
    for (int i = 1; i < 18; ++i) csv += ",4";
    csv += "\n";
    spit(blank, csv);
    // Default handling drops the broken row; strict handling rejects the file.
    const RunResult lenient = run_cli("score --responses " + blank.string());
    REQUIRE(lenient.exit_code == 0);
    CHECK(parse(lenient.output).at("n_respondents") == 1);
    const RunResult strict_run =
        run_cli("analyze --strict-missing --responses " + blank.string());
    CHECK(strict_run.exit_code == 2);
    CHECK(strict_run.output.find("item_1") != std::string::npos);
  }

  TEST_CASE("analysis failures exit with code 3") {
    // Identical rows: totals have zero variance, an analysis-stage error.
    const fs::path flat = work_dir() / "flat.csv";
    std::string csv = "respondent_id,group,duration_seconds,allocated_seconds";
    for (int i = 1; i <= 18; ++i) csv += ",item_" + std::to_string(i);
    csv += "\n";
    for (int r = 0; r < 6; ++r) {
      csv += "r" + std::to_string(r) + ",,290,300";
      // Not straight-line (alternates), but identical across respondents.
      for (int i = 0; i < 18; ++i) csv += i % 2 == 0 ? ",4" : ",2";
      csv += "\n";
    }
    spit(flat, csv);
    const RunResult result = run_cli("analyze --responses " + flat.string());
    CHECK(result.exit_code == 3);
  }

  TEST_CASE("two retest waves give a reliability verdict") {
    const RunResult result =
        run_cli("retest --responses " + fixture("retest_wave1.csv") +
                " --retest " + fixture("retest_wave2.csv"));
    REQUIRE(result.exit_code == 0);
    const json doc = parse(result.output);
    CHECK(doc.at("n_pairs") == 35);
    CHECK(doc.at("pearson_r").get<double>() > 0.9);
    CHECK(doc.at("pearson_p").get<double>() < 1e-6);
    CHECK(doc.at("icc").at("value").get<double>() > 0.9);
    CHECK(doc.at("icc_consistency").at("value").get<double>() >=
          doc.at("icc").at("value").get<double>());
    CHECK(doc.at("icc").at("band") == "Excellent");
    CHECK(doc.at("unmatched_test").empty());

    // The same invocation is bit-for-bit reproducible.
    const RunResult again =
        run_cli("retest --responses " + fixture("retest_wave1.csv") +
                " --retest " + fixture("retest_wave2.csv"));
    CHECK(again.output == result.output);
  }

  TEST_CASE("scores cover the whole file and every stakeholder") {
    const RunResult result =
        run_cli("score --per-respondent --responses " +
                fixture("pilot_responses.csv"));
    REQUIRE(result.exit_code == 0);
    const json doc = parse(result.output);
    CHECK(doc.at("n_respondents") == 143);
    REQUIRE(doc.at("stakeholders").size() == 143);
    const json& first = doc.at("stakeholders")[0];
    CHECK(first.contains("respondent_id"));
    CHECK(first.at("score").get<double>() >= 18.0);
    CHECK(first.at("score").get<double>() <= 90.0);
    REQUIRE(first.at("factors").size() == 4);
    for (const auto& factor : first.at("factors")) {
      CHECK(factor.at("attainment").get<double>() >= 0.0);
      CHECK(factor.at("attainment").get<double>() <= 1.0);
    }
  }

  TEST_CASE("benchmark stores support the add/list/classify cycle") {
    const fs::path store = work_dir() / "store.json";
    fs::remove(store);

    const RunResult add_a = run_cli(
        "benchmark add --store " + store.string() + " --system-id pilot_a" +
        " --responses " + fixture("pilot_responses.csv") +
        " --timestamp 2026-08-19T00:00:00Z");
    REQUIRE(add_a.exit_code == 0);

    const fs::path second = work_dir() / "low_scoring.csv";
    std::string csv = "respondent_id,group,duration_seconds,allocated_seconds";
    for (int i = 1; i <= 18; ++i) csv += ",item_" + std::to_string(i);
    csv += "\n";
    for (int r = 0; r < 5; ++r) {
      csv += "low" + std::to_string(r) + ",,290,300";
      for (int i = 0; i < 18; ++i) csv += (i + r) % 3 == 0 ? ",1" : ",2";
      csv += "\n";
    }
    spit(second, csv);
    const RunResult add_b = run_cli(
        "benchmark add --store " + store.string() + " --system-id pilot_b" +
        " --responses " + second.string() +
        " --timestamp 2026-08-19T00:00:00Z");
    REQUIRE(add_b.exit_code == 0);

    const json stored = json::parse(slurp(store));
    CHECK(stored.at("version") == 1);
    CHECK(stored.at("revision") == 2);
    CHECK(stored.at("entries").size() == 2);
    CHECK(stored.at("scale_id") == "xeq");

    // Duplicate ids are refused as a validation error.
    CHECK(run_cli("benchmark add --store " + store.string() +
                  " --system-id pilot_a --responses " +
                  fixture("pilot_responses.csv"))
              .exit_code == 2);

    const RunResult listing = run_cli("benchmark list --store " + store.string());
    REQUIRE(listing.exit_code == 0);
    CHECK(listing.output.find("pilot_a") != std::string::npos);
    CHECK(listing.output.find("pilot_b") != std::string::npos);

    // The stored high scorer ranks above the stored low scorer.
    const RunResult classified = run_cli(
        "benchmark classify --store " + store.string() + " --system-id pilot_a");
    REQUIRE(classified.exit_code == 0);
    const json verdict = parse(classified.output);
    CHECK(verdict.at("n_reference") == 1);  // the candidate itself is excluded
    CHECK(verdict.at("percentile").get<double>() == 100.0);
    CHECK(verdict.at("band") == "Excellent");

    // Classifying against the shipped 20-system store hits the interior.
    const RunResult against_fixture = run_cli(
        "benchmark classify --store " + fixture("benchmark_store.json") +
        " --system-id pilot --responses " + fixture("pilot_responses.csv"));
    REQUIRE(against_fixture.exit_code == 0);
    const json fixture_verdict = parse(against_fixture.output);
    CHECK(fixture_verdict.at("n_reference") == 20);
    CHECK(fixture_verdict.at("percentile").get<double>() > 0.0);
    CHECK(fixture_verdict.at("percentile").get<double>() < 100.0);
    CHECK(fixture_verdict.at("dimension_percentiles").size() == 4);
  }

  TEST_CASE("simulated studies round-trip through the analyzer") {
    const fs::path sample = work_dir() / "sim_two_group.csv";
    const RunResult sim = run_cli("simulate --out " + sample.string() +
                                  " --n 50 --seed 77 --delta 0.8");
    REQUIRE(sim.exit_code == 0);
    REQUIRE(fs::exists(sample));

    const RunResult analyzed = run_cli(
        "analyze --responses " + sample.string() + " --trials 8 --seed 2");
    REQUIRE(analyzed.exit_code == 0);
    const json doc = parse(analyzed.output);
    CHECK(doc.at("ingestion").at("n_retained") == 100);
    CHECK(doc.at("group_comparison").at("cohens_d").get<double>() > 0.5);
    CHECK(doc.at("discriminant").at("n_trials") == 8);

    // Same seed, same file: simulate twice and the bytes agree.
    const fs::path repeat = work_dir() / "sim_repeat.csv";
    run_cli("simulate --out " + repeat.string() + " --n 50 --seed 77 --delta 0.8");
    CHECK(slurp(sample) == slurp(repeat));

    // Retest companion files share the seed derivation.
    const fs::path w1 = work_dir() / "sim_w1.csv";
    const fs::path w2 = work_dir() / "sim_w2.csv";
    const RunResult waves =
        run_cli("simulate --out " + w1.string() + " --retest-out " +
                w2.string() + " --n 20 --seed 9 --noise-sd 0.3");
    REQUIRE(waves.exit_code == 0);
    const RunResult verdict = run_cli("retest --responses " + w1.string() +
                                      " --retest " + w2.string());
    REQUIRE(verdict.exit_code == 0);
    CHECK(parse(verdict.output).at("n_pairs") == 20);
  }

  TEST_CASE("report bundles are deterministic apart from the timestamp") {
    const fs::path dir_a = work_dir() / "report_a";
    const fs::path dir_b = work_dir() / "report_b";
    const std::string flags =
        " --responses " + fixture("pilot_responses.csv") + " --expert-ratings " +
        fixture("expert_ratings.csv") + " --trials 6 --seed 4";
    REQUIRE(run_cli("report --out " + dir_a.string() + flags).exit_code == 0);
    REQUIRE(run_cli("report --out " + dir_b.string() + flags).exit_code == 0);

    for (const char* name : {"report.json", "scree.svg", "items.txt"}) {
      CHECK(fs::exists(dir_a / name));
    }
    json a = json::parse(slurp(dir_a / "report.json"));
    json b = json::parse(slurp(dir_b / "report.json"));
    CHECK(a.at("meta").contains("generated_at"));
    a.erase("meta");
    b.erase("meta");
    CHECK(a.dump(2) == b.dump(2));
    CHECK(slurp(dir_a / "scree.svg") == slurp(dir_b / "scree.svg"));
    CHECK(slurp(dir_a / "items.txt") == slurp(dir_b / "items.txt"));

    // Without expert ratings there is no item table to write.
    const fs::path dir_c = work_dir() / "report_c";
    REQUIRE(run_cli("report --out " + dir_c.string() + " --responses " +
                    fixture("pilot_responses.csv") + " --trials 6 --seed 4")
                .exit_code == 0);
    CHECK(fs::exists(dir_c / "report.json"));
    CHECK(fs::exists(dir_c / "scree.svg"));
    CHECK_FALSE(fs::exists(dir_c / "items.txt"));
  }
}
