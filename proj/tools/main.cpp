// Command line front end. Subcommands:
//   run    play a seeded game, bound-check metrics, write trace + report
//   eval   re-evaluate metrics on a stored trace (uses the embedded config)
//   gen    sample a dataset CSV from a nature spec
//   batch  online-to-batch conversion with a Monte Carlo excess-risk check
// Exit codes: 0 all bound checks pass, 1 a gating bound failed, 2 bad input.
//
// Value precedence per key: command line flag, then config file, then the
// DF_SEED environment variable (seed only), then the built-in default.

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "df/common.hpp"
#include "df/harness.hpp"

namespace {

const std::vector<std::pair<std::string, std::string>> kConfigKeys = {
    {"forecaster",
     "forecaster: dmm | experts-squared | experts-log | tracker | randq | og:<alpha>[,M[,dim]]"},
    {"kernel", "kernel expression, e.g. \"1 + fs + pp + lin\" or \"rbf(0.5)\""},
    {"nature", "data source spec, e.g. bernoulli:0.3, flip+ball:5, logistic-quantile:[0,1]"},
    {"T", "number of rounds (batch: dataset size)"},
    {"q", "target quantile level in [0, 1]"},
    {"seed", "rng seed; the DF_SEED environment variable is the fallback"},
    {"tol", "search tolerance schedule: default | fixed:<v>"},
    {"init", "dmm endpoint preference: one | zero (endpoint checked first)"},
    {"experts", "expert panel, ';'-joined: const:<N> | const:<v,..> | lagged:<k> | linear:<w,..>"},
    {"lambda", "experts squared-loss scale in (0, 2]"},
    {"groups", "context groups for conditional coverage: none | quadrants"},
    {"regret-M", "comparator ball radius for the regret-linear metric"},
    {"replicates", "independent seeded games (batch: Monte Carlo replicates)"},
    {"mc-points", "Monte Carlo points per replicate (batch)"},
};

struct SubFlags {
  CLI::App* cmd = nullptr;
  std::map<std::string, std::string> raw;
  std::vector<std::string> metrics;
  std::string config_path;
  std::string out_trace;
  std::string out_report;
};

void add_metrics_flag(CLI::App* cmd, SubFlags& st) {
  cmd->add_option("--metrics", st.metrics,
                  "metrics to evaluate, comma separated: diag | smce | binned:<N>,<delta> | "
                  "regret-const | regret-linear | experts-regret | tracker | coverage | "
                  "group-coverage | bit-exact")
      ->delimiter(',');
  // compatibility spelling
  cmd->add_option("--q-metrics", st.metrics, "alias of --metrics")->delimiter(',')->group("");
}

void add_flags(CLI::App* cmd, SubFlags& st, bool with_metrics) {
  st.cmd = cmd;
  for (const auto& [key, help] : kConfigKeys) cmd->add_option("--" + key, st.raw[key], help);
  cmd->add_option("--config", st.config_path, "config file: key=value lines or a JSON object");
  cmd->add_option("--out-trace", st.out_trace, "trace CSV output path (gen/batch: dataset CSV)");
  cmd->add_option("--out-report", st.out_report, "report JSON output path");
  if (with_metrics) add_metrics_flag(cmd, st);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto pos = s.find(',', start);
    const std::string item =
        pos == std::string::npos ? s.substr(start) : s.substr(start, pos - start);
    const auto a = item.find_first_not_of(" \t");
    if (a != std::string::npos) {
      const auto b = item.find_last_not_of(" \t");
      out.push_back(item.substr(a, b - a + 1));
    }
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

df::RunConfig build_config(const SubFlags& st) {
  df::ConfigMap map;
  if (const char* env = std::getenv("DF_SEED"); env != nullptr && *env != '\0')
    map["seed"] = env;

  std::vector<std::string> metrics = st.metrics;
  std::string out_trace = st.out_trace;
  std::string out_report = st.out_report;

  if (!st.config_path.empty()) {
    df::ConfigMap file = df::load_config_file(st.config_path);
    if (auto it = file.find("metrics"); it != file.end()) {
      if (metrics.empty()) metrics = split_list(it->second);
      file.erase(it);
    }
    if (auto it = file.find("out-trace"); it != file.end()) {
      if (out_trace.empty()) out_trace = it->second;
      file.erase(it);
    }
    if (auto it = file.find("out-report"); it != file.end()) {
      if (out_report.empty()) out_report = it->second;
      file.erase(it);
    }
    for (const auto& [k, v] : file) map[k] = v;
  }

  for (const auto& [key, help] : kConfigKeys)
    if (st.cmd->count("--" + key) > 0) map[key] = st.raw.at(key);

  df::RunConfig cfg = df::config_from_map(map);
  cfg.metrics = std::move(metrics);
  cfg.out_trace = std::move(out_trace);
  cfg.out_report = std::move(out_report);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"defensive forecasting games, metrics, and bound-checked reports"};
  app.require_subcommand(1);

  SubFlags run_f, gen_f, batch_f;
  SubFlags eval_f;
  std::string eval_trace_path;

  CLI::App* run = app.add_subcommand("run", "play a seeded game and bound-check its metrics");
  add_flags(run, run_f, true);

  CLI::App* eval = app.add_subcommand("eval", "re-evaluate metrics on a stored trace");
  eval->add_option("trace", eval_trace_path, "trace CSV produced by run")->required();
  add_metrics_flag(eval, eval_f);
  eval->add_option("--out-report", eval_f.out_report, "report JSON output path");

  CLI::App* gen = app.add_subcommand("gen", "sample a dataset CSV from a nature spec");
  add_flags(gen, gen_f, false);

  CLI::App* batch =
      app.add_subcommand("batch", "online-to-batch conversion with an excess-risk check");
  add_flags(batch, batch_f, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return df::cli_run(build_config(run_f));
    if (eval->parsed()) return df::cli_eval(eval_trace_path, eval_f.metrics, eval_f.out_report);
    if (gen->parsed()) return df::cli_gen(build_config(gen_f));
    return df::cli_batch(build_config(batch_f));
  } catch (const df::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
