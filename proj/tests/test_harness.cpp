#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

#include "resample_es/experiment.hpp"

using namespace resample_es;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path make_temp_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("resample_es_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ExperimentConfig tiny_config() {
  ExperimentConfig cfg = default_experiment();
  cfg.problem.d = 3;
  cfg.strategy.resamplings = 2;
  cfg.strategy.budget = 400;
  cfg.runs = 2;
  cfg.seed = 7;
  return cfg;
}

std::string slurp(const fs::path& path) { return read_text_file(path); }

}  // namespace

TEST_CASE("content hash matches the published reference vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
  CHECK(fnv1a64_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("trace csv round-trips every record bit for bit") {
  std::vector<IterationRecord> records;
  records.push_back({1, 8, 0.1 + 0.2, std::log(0.1 + 0.2), 1.0 / 3.0});
  records.push_back({2, 16, 5e-280, std::log(5e-280), 2.5e200});
  records.push_back(
      {3, 24, 0.0, -std::numeric_limits<double>::infinity(), 1e-300});
  const std::string csv = records_to_csv(records);
  const std::vector<IterationRecord> parsed = records_from_csv(csv);
  REQUIRE(parsed.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(parsed[i].n == records[i].n);
    CHECK(parsed[i].evals == records[i].evals);
    CHECK(parsed[i].dist == records[i].dist);
    CHECK(parsed[i].log_dist == records[i].log_dist);
    CHECK(parsed[i].sigma == records[i].sigma);
  }
}

TEST_CASE("trace csv rejects bad headers and malformed rows") {
  CHECK_THROWS_AS(records_from_csv("x,y\n1,2\n"), std::invalid_argument);
  CHECK_THROWS_AS(records_from_csv(""), std::invalid_argument);
  const std::string good_header = "n,evals,dist,log_dist,sigma\n";
  CHECK_THROWS_AS(records_from_csv(good_header + "1,8,0.5\n"),
                  std::invalid_argument);
  CHECK_THROWS_AS(records_from_csv(good_header + "1,8,0.5,abc,1\n"),
                  std::invalid_argument);
  CHECK(records_from_csv(good_header).empty());
}

TEST_CASE("trace filenames are zero-padded by run") {
  CHECK(trace_filename(12, 7) == "trace_Y12_run007.csv");
  CHECK(trace_filename(1, 123) == "trace_Y1_run123.csv");
}

TEST_CASE("worker count never changes batch results") {
  const ExperimentConfig cfg = tiny_config();
  const std::vector<RunTrace> serial =
      run_batch(cfg.problem, cfg.strategy, 6, cfg.seed, 1);
  const std::vector<RunTrace> parallel =
      run_batch(cfg.problem, cfg.strategy, 6, cfg.seed, 4);
  const std::vector<RunTrace> defaulted =
      run_batch(cfg.problem, cfg.strategy, 6, cfg.seed, 0);
  REQUIRE(serial.size() == 6);
  REQUIRE(parallel.size() == 6);
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(records_to_csv(serial[i].records) ==
          records_to_csv(parallel[i].records));
    CHECK(records_to_csv(serial[i].records) ==
          records_to_csv(defaulted[i].records));
    const RunTrace direct =
        run_es(cfg.problem, cfg.strategy, cfg.seed, i);
    CHECK(records_to_csv(serial[i].records) ==
          records_to_csv(direct.records));
  }
}

TEST_CASE("batches reject invalid setups up front") {
  const ExperimentConfig cfg = tiny_config();
  CHECK_THROWS_AS(run_batch(cfg.problem, cfg.strategy, 0, 1, 1),
                  std::invalid_argument);
  StrategyConfig broken = cfg.strategy;
  broken.mu = 0;
  CHECK_THROWS_AS(run_batch(cfg.problem, broken, 2, 1, 1),
                  std::invalid_argument);
}

TEST_CASE("an experiment writes the full artifact set") {
  const fs::path dir = make_temp_dir("artifacts");
  ExperimentConfig cfg = tiny_config();
  cfg.y_sweep = {1, 2};
  cfg.out_dir = dir.string();
  run_experiment(cfg);
  for (const char* name :
       {"config.ini", "trace_Y1_run000.csv", "trace_Y1_run001.csv",
        "trace_Y2_run000.csv", "trace_Y2_run001.csv",
        "aggregate_median_Y1.csv", "aggregate_mean_Y1.csv",
        "aggregate_median_Y2.csv", "aggregate_mean_Y2.csv", "rates.json",
        "manifest.json"}) {
    CHECK_MESSAGE(fs::exists(dir / name), name);
  }
  CHECK(verify_manifest(dir).empty());
  const json manifest = json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest.at("y_values") == json({1, 2}));
  CHECK(manifest.at("config_ini").get<std::string>() ==
        slurp(dir / "config.ini"));
  const json rates = json::parse(slurp(dir / "rates.json"));
  REQUIRE(rates.at("per_y").size() == 2);
  CHECK(rates.at("per_y")[0].at("y") == 1);
  CHECK(rates.at("per_y")[0].at("slope_per_iteration").at("runs").size() == 2);
  fs::remove_all(dir);
}

TEST_CASE("a budget of one iteration yields a one-row trace") {
  const fs::path dir = make_temp_dir("single_iter");
  ExperimentConfig cfg = tiny_config();
  cfg.runs = 1;
  cfg.strategy.budget = static_cast<std::uint64_t>(
      cfg.strategy.lambda * cfg.strategy.resamplings);
  cfg.out_dir = dir.string();
  run_experiment(cfg);
  const std::vector<IterationRecord> records =
      records_from_csv(slurp(dir / trace_filename(2, 0)));
  REQUIRE(records.size() == 1);
  CHECK(records[0].n == 1);
  CHECK(records[0].evals == cfg.strategy.budget);
  fs::remove_all(dir);
}

TEST_CASE("identical configs produce byte-identical traces") {
  const fs::path dir_a = make_temp_dir("det_a");
  const fs::path dir_b = make_temp_dir("det_b");
  ExperimentConfig cfg = tiny_config();
  cfg.y_sweep = {1, 2};
  cfg.out_dir = dir_a.string();
  cfg.jobs = 1;
  run_experiment(cfg);
  cfg.out_dir = dir_b.string();
  cfg.jobs = 3;
  run_experiment(cfg);
  for (const int y : {1, 2}) {
    for (int run = 0; run < cfg.runs; ++run) {
      const std::string name = trace_filename(y, run);
      CHECK(slurp(dir_a / name) == slurp(dir_b / name));
    }
  }
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("tampered traces are caught by hash verification") {
  const fs::path dir = make_temp_dir("tamper");
  ExperimentConfig cfg = tiny_config();
  cfg.out_dir = dir.string();
  run_experiment(cfg);
  const fs::path victim = dir / trace_filename(2, 1);
  std::string text = slurp(victim);
  text[text.size() / 2] = text[text.size() / 2] == '1' ? '2' : '1';
  write_text_file(victim, text);
  const std::vector<std::string> problems = verify_manifest(dir);
  REQUIRE(problems.size() == 1);
  CHECK(problems[0].find(trace_filename(2, 1)) != std::string::npos);
  CHECK_THROWS_AS(analyze_experiment(dir), TraceError);
  CHECK_THROWS_AS(emit_plot_data(dir), TraceError);
  fs::remove(victim);
  CHECK_THROWS_AS(analyze_experiment(dir), TraceError);
  fs::remove_all(dir);
}

TEST_CASE("reanalysis reproduces the original aggregates and rates") {
  const fs::path dir = make_temp_dir("reanalyze");
  ExperimentConfig cfg = tiny_config();
  cfg.y_sweep = {1, 2};
  cfg.out_dir = dir.string();
  run_experiment(cfg);
  const std::string before_agg = slurp(dir / "aggregate_median_Y2.csv");
  const json before_rates = json::parse(slurp(dir / "rates.json"));
  analyze_experiment(dir);
  CHECK(slurp(dir / "aggregate_median_Y2.csv") == before_agg);
  CHECK(json::parse(slurp(dir / "rates.json")) == before_rates);
  CHECK(verify_manifest(dir).empty());
  fs::remove_all(dir);
}

TEST_CASE("plot data for one run equals the trace itself") {
  const fs::path dir = make_temp_dir("plot_single");
  ExperimentConfig cfg = tiny_config();
  cfg.runs = 1;
  cfg.out_dir = dir.string();
  run_experiment(cfg);
  emit_plot_data(dir);
  const std::vector<IterationRecord> records =
      records_from_csv(slurp(dir / trace_filename(2, 0)));
  std::string expected = "evals,Y=2\n";
  for (const IterationRecord& rec : records) {
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n",
                  static_cast<double>(rec.evals), rec.log_dist);
    expected += buf;
  }
  CHECK(slurp(dir / "plot_median.csv") == expected);
  const std::string svg = slurp(dir / "plot_median.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("Y=2") != std::string::npos);
  CHECK(verify_manifest(dir).empty());
  fs::remove_all(dir);
}

TEST_CASE("plot tables interleave sweeps on a shared grid") {
  const fs::path dir = make_temp_dir("plot_sweep");
  ExperimentConfig cfg = tiny_config();
  cfg.y_sweep = {1, 2};
  cfg.out_dir = dir.string();
  run_experiment(cfg);
  emit_plot_data(dir);
  const std::string table = slurp(dir / "plot_mean.csv");
  CHECK(table.rfind("evals,Y=1,Y=2", 0) == 0);
  // Y=1 emits a row every 4 evaluations, Y=2 every 8; the union grid keeps
  // the Y=2 column blank at evals=4 and filled from 8 onward.
  const std::size_t first_row = table.find('\n') + 1;
  const std::size_t second_row = table.find('\n', first_row) + 1;
  const std::string row4 =
      table.substr(first_row, second_row - first_row - 1);
  CHECK(row4.substr(0, 2) == "4,");
  CHECK(row4.back() == ',');  // Y=2 has no value yet
  const json manifest = json::parse(slurp(dir / "manifest.json"));
  int plot_entries = 0;
  for (const json& entry : manifest.at("files")) {
    if (entry.value("kind", "") == "plot") ++plot_entries;
  }
  CHECK(plot_entries == 4);
  fs::remove_all(dir);
}

TEST_CASE("synthetic probe experiments write a report") {
  const fs::path dir = make_temp_dir("probe_syn");
  ExperimentConfig cfg = tiny_config();
  cfg.problem.d = 5;
  cfg.out_dir = dir.string();
  cfg.probe.trials = 200;
  cfg.probe.iterations = {5, 10};
  const MisrankReport report = probe_experiment(cfg);
  CHECK(report.points.size() == 2);
  const json doc = json::parse(slurp(dir / "probe_report.json"));
  CHECK(doc.at("points").size() == 2);
  CHECK(doc.at("points")[0].at("n") == 5);
  CHECK(doc.at("window").at("lower").get<double>() == doctest::Approx(0.1));
  fs::remove_all(dir);
}

TEST_CASE("replay probes take their states from a stored trace") {
  const fs::path dir = make_temp_dir("probe_replay");
  ExperimentConfig cfg = tiny_config();
  cfg.out_dir = dir.string();
  run_experiment(cfg);
  const std::string trace_path = (dir / trace_filename(2, 0)).string();
  ExperimentConfig probe_cfg = cfg;
  probe_cfg.probe.source = StateSource::replay;
  probe_cfg.probe.trace = trace_path;
  probe_cfg.probe.trials = 150;
  probe_cfg.probe.iterations = {5, 10};
  const MisrankReport report = probe_experiment(probe_cfg);
  const std::vector<IterationRecord> records =
      records_from_csv(slurp(trace_path));
  CHECK(report.points[0].dist == doctest::Approx(records[4].dist));
  CHECK(report.points[1].sigma == doctest::Approx(records[9].sigma));
  ExperimentConfig beyond = probe_cfg;
  beyond.probe.iterations = {5, 999};
  CHECK_THROWS_AS(probe_experiment(beyond), TraceError);
  fs::remove_all(dir);
}

TEST_CASE("invalid configs and unwritable outputs raise typed errors") {
  ExperimentConfig cfg = tiny_config();
  cfg.runs = 0;
  CHECK_THROWS_AS(run_experiment(cfg), std::invalid_argument);
  const fs::path blocker =
      fs::temp_directory_path() / "resample_es_blocker_file";
  write_text_file(blocker, "not a directory\n");
  ExperimentConfig blocked = tiny_config();
  blocked.out_dir = (blocker / "sub").string();
  CHECK_THROWS_AS(run_experiment(blocked), IoError);
  fs::remove(blocker);
}
