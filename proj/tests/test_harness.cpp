#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "df/harness.hpp"
#include "df/natures.hpp"

using namespace df;

namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempFile {
  fs::path path;
  explicit TempFile(const char* name) : path(fs::temp_directory_path() / name) {}
  ~TempFile() { std::error_code ec; fs::remove(path, ec); }
};

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("config map round trips and resolution is idempotent") {
  RunConfig cfg;
  cfg.forecaster = "dmm";
  cfg.T = 250;
  cfg.seed = 9;
  const ConfigMap m = config_to_map(config_from_map(config_to_map(cfg)));
  const RunConfig back = config_from_map(m);
  CHECK(config_to_map(back) == m);
  // the canonical map pins every experiment-relevant key
  for (const char* key : {"forecaster", "kernel", "nature", "T", "q", "seed", "tol", "init",
                          "experts", "lambda", "groups", "regret-M", "replicates", "mc-points"}) {
    CHECK(m.count(key) == 1);
  }
  CHECK(m.size() == 14);
}

TEST_CASE("family defaults fill in") {
  RunConfig cfg;
  cfg.forecaster = "dmm";
  RunConfig r = config_from_map(config_to_map(cfg));
  CHECK(r.kernel == "1 + fs + pp + lin");
  CHECK(r.nature == "bernoulli:0.5");

  cfg.forecaster = "tracker";
  cfg.kernel.clear();
  r = config_from_map(config_to_map(cfg));
  CHECK(r.nature == "uniform-quantile:[0,1]");

  cfg.forecaster = "randq";
  r = config_from_map(config_to_map(cfg));
  CHECK(r.kernel == "1 + pp");
  CHECK(r.nature == "uniform-quantile:[0,1]");
}

TEST_CASE("config validation rejects bad values") {
  const auto reject = [](const char* key, const char* value) {
    RunConfig cfg;
    ConfigMap m = config_to_map(cfg);
    m[key] = value;
    CHECK_THROWS_AS(config_from_map(m), config_error);
  };
  reject("forecaster", "nosuch");
  reject("T", "0");
  reject("T", "-5");
  reject("T", "abc");
  reject("q", "1.5");
  reject("q", "-0.1");
  reject("lambda", "2.5");
  reject("lambda", "0");
  reject("replicates", "0");
  reject("mc-points", "0");
  reject("init", "sideways");
  reject("groups", "octants");
  reject("tol", "nosuch");
  reject("kernel", "fs +");
  reject("nature", "nosuch:1");
  reject("experts", "const:0");
  reject("regret-M", "-1");

  ConfigMap unknown = config_to_map(RunConfig{});
  unknown["surprise"] = "1";
  CHECK_THROWS_AS(config_from_map(unknown), config_error);
}

TEST_CASE("randq keeps q away from the endpoints") {
  RunConfig cfg;
  cfg.forecaster = "randq";
  cfg.q = 0.0;
  CHECK_THROWS_AS(config_from_map(config_to_map(cfg)), config_error);
  cfg.forecaster = "tracker";  // the tracker allows the closed endpoints
  CHECK_NOTHROW(config_from_map(config_to_map(cfg)));
}

TEST_CASE("config files load in both formats") {
  TempFile kv("df_test_cfg.txt");
  {
    std::ofstream out(kv.path);
    out << "# a comment\n\nforecaster = tracker\nq = 0.25\nT = 64\n";
  }
  const ConfigMap a = load_config_file(kv.path.string());
  CHECK(a.at("forecaster") == "tracker");
  CHECK(a.at("q") == "0.25");
  CHECK(a.at("T") == "64");

  TempFile js("df_test_cfg.json");
  {
    std::ofstream out(js.path);
    out << "{\"forecaster\": \"tracker\", \"q\": 0.25, \"T\": 64}\n";
  }
  const ConfigMap b = load_config_file(js.path.string());
  CHECK(b == a);
}

TEST_CASE("config file errors name the line") {
  TempFile bad("df_test_cfg_bad.txt");
  {
    std::ofstream out(bad.path);
    out << "forecaster = tracker\nthis line has no equals\n";
  }
  try {
    (void)load_config_file(bad.path.string());
    FAIL("expected a parse error");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(load_config_file("/no/such/config.file"), config_error);
}

TEST_CASE("forecaster factory covers every family") {
  for (const char* fam : {"dmm", "experts-squared", "experts-log", "tracker", "randq", "og:0.1"}) {
    RunConfig cfg;
    cfg.forecaster = fam;
    cfg = config_from_map(config_to_map(cfg));
    auto fc = make_forecaster(cfg);
    REQUIRE(fc);
    auto nature = make_nature(cfg.nature);
    CHECK(fc->space() == nature->space());
  }
}

TEST_CASE("run plays the same game as a direct loop") {
  RunConfig cfg;
  cfg.forecaster = "tracker";
  cfg.q = 0.8;
  cfg.T = 300;
  cfg.seed = 5;
  cfg = config_from_map(config_to_map(cfg));
  const RunResult rr = run_games(cfg);
  auto fc = make_forecaster(cfg);
  auto nature = make_nature(cfg.nature);
  const GameTrace direct = play_game(*fc, *nature, cfg.T, cfg.seed);
  REQUIRE(rr.trace.T() == direct.T());
  for (std::size_t i = 0; i < direct.rounds.size(); ++i) {
    CHECK(rr.trace.rounds[i].f.value == direct.rounds[i].f.value);
    CHECK(rr.trace.rounds[i].y == direct.rounds[i].y);
  }
}

TEST_CASE("tracker metric entry") {
  RunConfig cfg;
  cfg.forecaster = "tracker";
  cfg.q = 0.9;
  cfg.T = 500;
  cfg = config_from_map(config_to_map(cfg));
  const RunResult rr = run_games(cfg);
  const auto entries = eval_metric("tracker", rr.trace, cfg);
  REQUIRE(entries.size() == 1);
  const MetricEntry& e = entries[0];
  CHECK(e.name == "tracker");
  CHECK(e.pass);
  CHECK(e.bound_value == doctest::Approx(0.9 / 499.0));
  CHECK(e.details.contains("hits"));
}

TEST_CASE("bit exact metric checks the residual identity") {
  RunConfig cfg;
  cfg.forecaster = "dmm";
  cfg.kernel = "1";
  cfg.init = "zero";
  cfg.nature = "bernoulli:0.5";
  cfg.T = 400;
  cfg = config_from_map(config_to_map(cfg));
  const RunResult rr = run_games(cfg);
  const auto entries = eval_metric("bit-exact", rr.trace, cfg);
  REQUIRE(entries.size() == 1);
  CHECK(entries[0].pass);
  double sp = 0, sy = 0;
  for (const auto& r : rr.trace.rounds) {
    sp += r.f.value;
    sy += r.y;
  }
  // the metric reports mean forecasts minus mean outcomes, bound 1/T
  CHECK(entries[0].observed == std::fabs(sp - sy) / static_cast<double>(cfg.T));
  CHECK(entries[0].bound_value == 1.0 / static_cast<double>(cfg.T));
}

TEST_CASE("smce metric reports the gating and informational pair") {
  RunConfig cfg;
  cfg.forecaster = "dmm";
  cfg.kernel = "fs";
  cfg.nature = "flip";
  cfg.T = 200;
  cfg = config_from_map(config_to_map(cfg));
  const RunResult rr = run_games(cfg);
  const auto entries = eval_metric("smce", rr.trace, cfg);
  REQUIRE(entries.size() == 2);
  CHECK(entries[0].name == "smce");
  CHECK(entries[0].gating);
  CHECK(entries[1].name == "smce-tight");
  CHECK_FALSE(entries[1].gating);
  CHECK(entries[0].observed == entries[1].observed);
  CHECK(entries[0].bound_value > entries[1].bound_value);
  CHECK(entries[0].pass);
}

TEST_CASE("metric family restrictions") {
  RunConfig cfg;
  cfg.forecaster = "tracker";
  cfg.T = 50;
  cfg = config_from_map(config_to_map(cfg));
  const RunResult rr = run_games(cfg);
  CHECK_THROWS_AS(eval_metric("diag", rr.trace, cfg), config_error);
  CHECK_THROWS_AS(eval_metric("bit-exact", rr.trace, cfg), config_error);
  CHECK_THROWS_AS(eval_metric("nosuch", rr.trace, cfg), config_error);
  CHECK_THROWS_AS(eval_metric("binned:0,0.05", rr.trace, cfg), config_error);
}

TEST_CASE("group coverage emits one entry per group") {
  RunConfig cfg;
  cfg.forecaster = "randq";
  cfg.nature = "uniform-quantile:[0,1]+uniform:2";
  cfg.groups = "quadrants";
  cfg.q = 0.5;
  cfg.T = 300;
  cfg = config_from_map(config_to_map(cfg));
  const RunResult rr = run_games(cfg);
  const auto entries = eval_metric("group-coverage", rr.trace, cfg);
  REQUIRE(entries.size() == 4);
  for (const auto& e : entries) {
    CHECK(e.name.rfind("group-coverage:", 0) == 0);
    CHECK(e.details.contains("gap"));
    CHECK(e.details.contains("mass"));
  }
}

TEST_CASE("replicates aggregate deterministically") {
  RunConfig cfg;
  cfg.forecaster = "randq";
  cfg.nature = "uniform-quantile:[0,1]";
  cfg.q = 0.5;
  cfg.T = 200;
  cfg.replicates = 4;
  cfg = config_from_map(config_to_map(cfg));
  cfg.metrics = {"coverage"};  // the canonical map excludes the metric list
  const RunResult a = run_games(cfg);
  const RunResult b = run_games(cfg);
  CHECK(report_to_string(a.report) == report_to_string(b.report));
  REQUIRE(a.report.entries.size() == 1);
  CHECK(a.report.entries[0].details.at("replicates") == 4);
  // worst-replicate style metrics carry their provenance too
  RunConfig t;
  t.replicates = 3;
  t.T = 100;
  t = config_from_map(config_to_map(t));
  t.metrics = {"diag"};
  const RunResult c = run_games(t);
  REQUIRE_FALSE(c.report.entries.empty());
  CHECK(c.report.entries[0].details.contains("worst_replicate"));
}

TEST_CASE("cli run and eval produce byte identical reports") {
  TempFile trace("df_test_run_trace.csv");
  TempFile rep1("df_test_run_report.json");
  TempFile rep2("df_test_eval_report.json");
  RunConfig cfg;
  cfg.forecaster = "dmm";
  cfg.kernel = "1 + pp";
  cfg.nature = "bernoulli:0.4";
  cfg.T = 150;
  cfg.seed = 21;
  cfg.metrics = {"diag", "smce"};
  cfg.out_trace = trace.path.string();
  cfg.out_report = rep1.path.string();
  CHECK(cli_run(cfg) == 0);

  CHECK(cli_eval(trace.path.string(), {"diag", "smce"}, rep2.path.string()) == 0);
  CHECK(slurp(rep1.path) == slurp(rep2.path));

  // the trace header carries the canonical config, so eval needs no flags
  const ParsedTrace parsed = read_trace_file(trace.path.string());
  CHECK(parsed.header.config.at("kernel") == "1 + pp");
  CHECK(parsed.header.config.at("forecaster") == "dmm");
}

TEST_CASE("cli eval flags bound violations with exit one") {
  // a deliberately miscalibrated trace: confident forecasts, opposite outcomes
  GameTrace tr;
  tr.space = OutcomeSpace::binary();
  tr.seed = 1;
  for (int t = 0; t < 100; ++t) {
    Round r;
    r.f.value = 0.9;
    r.f.branch = Branch::Root;
    r.y = 0.0;
    tr.rounds.push_back(r);
  }
  RunConfig cfg;
  cfg.forecaster = "dmm";
  cfg.kernel = "fs";
  cfg.T = 100;
  cfg = config_from_map(config_to_map(cfg));
  TempFile trace("df_test_bad_trace.csv");
  write_trace_file(trace.path.string(), tr, config_to_map(cfg));
  CHECK(cli_eval(trace.path.string(), {"smce"}, "") == 1);
  // unreadable inputs surface as config errors for the top level to map
  CHECK_THROWS_AS(cli_eval("/no/such/trace.csv", {"smce"}, ""), config_error);
}

TEST_CASE("cli gen writes a dataset") {
  TempFile data("df_test_gen.csv");
  RunConfig cfg;
  cfg.nature = "bernoulli:0.5+uniform:2";
  cfg.T = 40;
  cfg.seed = 31;
  cfg.out_trace = data.path.string();
  CHECK(cli_gen(cfg) == 0);
  const ParsedDataset parsed = read_dataset_file(data.path.string());
  CHECK(parsed.data.size() == 40);
  CHECK(parsed.data.xs[0].size() == 2);
}

TEST_CASE("cli batch runs the conversion end to end") {
  TempFile rep("df_test_batch_report.json");
  RunConfig cfg;
  cfg.forecaster = "experts-log";
  cfg.experts = "const:4";
  cfg.nature = "bernoulli:0.3";
  cfg.T = 120;
  cfg.seed = 7;
  cfg.replicates = 8;
  cfg.mc_points = 32;
  cfg.out_report = rep.path.string();
  CHECK(cli_batch(cfg) == 0);
  const MetricReport r = read_report_file(rep.path.string());
  REQUIRE(r.entries.size() == 1);
  CHECK(r.entries[0].name == "batch-excess");
  CHECK(r.entries[0].details.at("n") == 120);

  // panels that read history cannot be snapshotted cheaply
  RunConfig bad = cfg;
  bad.experts = "lagged:3";
  CHECK_THROWS_AS(cli_batch(bad), config_error);
  // batch conversion is defined for the experts families only
  RunConfig wrong = cfg;
  wrong.forecaster = "tracker";
  CHECK_THROWS_AS(cli_batch(wrong), config_error);
}

TEST_CASE("eval trace honors default metrics per family") {
  RunConfig cfg;
  cfg.forecaster = "tracker";
  cfg.T = 60;
  cfg = config_from_map(config_to_map(cfg));
  const RunResult rr = run_games(cfg);
  const MetricReport rep = eval_trace(rr.trace, cfg, {});
  REQUIRE_FALSE(rep.entries.empty());
  CHECK(rep.entries[0].name == "tracker");
}

}  // TEST_SUITE
