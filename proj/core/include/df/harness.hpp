#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "df/game.hpp"
#include "df/report.hpp"
#include "df/trace_io.hpp"

namespace df {

// Flat run configuration. String fields keep their spec grammar so the
// canonical ConfigMap embedded in trace headers is the source of truth for
// re-evaluation.
struct RunConfig {
  std::string forecaster = "dmm";  // dmm | experts-squared | experts-log |
                                   // tracker | randq | og:<alpha>[,M[,dim]]
  std::string kernel;              // default depends on the forecaster
  std::string nature;              // default depends on the forecaster
  std::int64_t T = 100;
  double q = 0.5;
  std::uint64_t seed = 1;
  std::string tol = "default";
  std::string init = "one";      // dmm endpoint order: one | zero (which endpoint is checked first)
  std::string experts = "const:10";  // panels: const:N | const:v,.. | lagged:k |
                                     // linear:w,.. joined with ';'
  double lambda = 2.0;           // experts squared-loss scale
  std::string groups = "none";   // randq/coverage: none | quadrants
  double regret_M = 1.0;         // linear-regret radius
  int replicates = 1;
  int mc_points = 64;            // batch Monte Carlo points per replicate
  std::vector<std::string> metrics;
  std::string out_trace;
  std::string out_report;
};

// Key=value view used for trace headers and config files. Output paths and
// the metric list stay out of it: they do not change the experiment.
ConfigMap config_to_map(const RunConfig& cfg);
RunConfig config_from_map(const ConfigMap& kv);

// Flat key=value lines (# comments allowed) or a single JSON object of
// string/number values.
ConfigMap load_config_file(const std::string& path);

std::unique_ptr<Forecaster> make_forecaster(const RunConfig& cfg);

// Entries for one metric evaluated on one finished trace; most metrics
// produce a single entry, smce adds its tighter informational companion and
// group-coverage emits one entry per group. The metric grammar:
//   diag | smce | binned:<N>,<delta> | regret-const | regret-linear |
//   experts-regret | tracker | coverage | group-coverage | bit-exact
std::vector<MetricEntry> eval_metric(const std::string& metric, const GameTrace& trace,
                                     const RunConfig& cfg);

// All requested metrics on one trace; "smce" also appends its informational
// tighter companion.
MetricReport eval_trace(const GameTrace& trace, const RunConfig& cfg,
                        const std::vector<std::string>& metrics);

struct RunResult {
  GameTrace trace;  // the last replicate's trace
  MetricReport report;
};

// Plays cfg.replicates seeded games and aggregates: coverage-family metrics
// report |mean| against bound + 2 stderr, everything else reports the worst
// replicate. One game (replicates = 1) keeps the seed as-is.
RunResult run_games(const RunConfig& cfg);

// Subcommand bodies; they write the requested artifacts and return the
// process exit code (0 ok, 1 bound violation, 2 bad config).
int cli_run(const RunConfig& cfg);
int cli_eval(const std::string& trace_path, const std::vector<std::string>& metrics,
             const std::string& out_report);
int cli_gen(const RunConfig& cfg);
int cli_batch(const RunConfig& cfg);

}  // namespace df
