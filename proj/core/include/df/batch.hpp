#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "df/common.hpp"
#include "df/game.hpp"
#include "df/losses.hpp"
#include "df/quantiles.hpp"

namespace df {

// Labeled pairs for online-to-batch conversion. Order matters: the online
// pass consumes them as rounds 1..n.
struct Dataset {
  OutcomeSpace space = OutcomeSpace::binary();
  std::vector<Context> xs;
  std::vector<double> ys;

  std::size_t size() const { return xs.size(); }
};

// i.i.d. source of (x, y) pairs; draw may consume only the passed rng.
struct PairSampler {
  OutcomeSpace space = OutcomeSpace::binary();
  std::function<std::pair<Context, double>(Rng&)> draw;
};

Dataset sample_dataset(const PairSampler& sampler, std::size_t n, std::uint64_t seed);

// Uniform mixture over the per-round prediction maps f_1..f_n: snapshot i
// is the online forecaster's state after the first i pairs, so f_{i+1}
// ignores pairs i+1..n entirely.
class BatchPredictor {
 public:
  BatchPredictor(std::vector<std::unique_ptr<Forecaster>> snapshots, GameTrace training_trace);

  std::size_t size() const { return snaps_.size(); }
  const OutcomeSpace& space() const { return trace_.space; }

  // Draws a snapshot index uniformly, then that snapshot's forecast on x.
  Forecast predict(const Context& x, Rng& rng);
  // Forecast of the snapshot that has seen exactly the first i pairs.
  Forecast predict_with(std::size_t i, const Context& x, Rng& rng);

  const GameTrace& training_trace() const { return trace_; }

 private:
  std::vector<std::unique_ptr<Forecaster>> snaps_;
  GameTrace trace_;
};

// Single online pass over the dataset, cloning the forecaster state before
// each update. The clone is taken before predict as well, so snapshot
// forecasts are reproducible regardless of lazy work inside predict.
BatchPredictor online_to_batch(Forecaster& forecaster, const Dataset& data, std::uint64_t seed);

struct McEstimate {
  double mean = 0;
  double stderr_of_mean = 0;
  int replicates = 0;
  int points = 0;
};

// Monte Carlo estimate of E loss(p, y) with (x, y) from the sampler and p
// drawn by the batch predictor; stderr is across replicate means.
McEstimate batch_risk(BatchPredictor& predictor, const PairSampler& sampler, const Loss& loss,
                      int replicates, int points, std::uint64_t seed);

// Risk of each snapshot separately on the same budget. The batch risk must
// match the average of these within Monte Carlo error.
std::vector<McEstimate> per_snapshot_risk(BatchPredictor& predictor, const PairSampler& sampler,
                                          const Loss& loss, int replicates, int points,
                                          std::uint64_t seed);

// Risk of a fixed prediction rule under the sampler, for oracle baselines.
McEstimate rule_risk(const std::function<double(const Context&)>& rule, const PairSampler& sampler,
                     const Loss& loss, int replicates, int points, std::uint64_t seed);

// Monte Carlo mean of an arbitrary test functional omega(x, p, y) under the
// batch predictor, for in-expectation guarantees that are not losses.
McEstimate batch_functional(BatchPredictor& predictor, const PairSampler& sampler,
                            const std::function<double(const Context&, double, double)>& omega,
                            int replicates, int points, std::uint64_t seed);

struct GroupCoverage {
  std::string name;
  double mass = 0;         // empirical P(group)
  double gap = 0;          // mean of 1{group}(1{y <= p} - q)
  double gap_stderr = 0;   // across replicate means
  bool defined = false;    // mass > 0
  double deviation = 0;    // |gap| / mass, the conditional coverage error
};

// Per-group coverage of the batch predictor on fresh draws. Groups with
// empirical mass zero are reported undefined rather than divided through.
std::vector<GroupCoverage> batch_conditional_coverage(
    BatchPredictor& predictor, const PairSampler& sampler,
    const std::vector<std::pair<std::string, GroupIndicator>>& groups, double q, int replicates,
    int points, std::uint64_t seed);

}  // namespace df
