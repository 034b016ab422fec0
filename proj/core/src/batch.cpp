#include "df/batch.hpp"

#include <cmath>
#include <stdexcept>

namespace df {

Dataset sample_dataset(const PairSampler& sampler, std::size_t n, std::uint64_t seed) {
  if (!sampler.draw) throw config_error("sample_dataset: sampler has no draw function");
  Dataset data;
  data.space = sampler.space;
  data.xs.reserve(n);
  data.ys.reserve(n);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    auto [x, y] = sampler.draw(rng);
    if (!sampler.space.contains(y))
      throw game_error("sample_dataset: pair " + std::to_string(i + 1) +
                       ": outcome outside the declared space");
    data.xs.push_back(std::move(x));
    data.ys.push_back(y);
  }
  return data;
}

BatchPredictor::BatchPredictor(std::vector<std::unique_ptr<Forecaster>> snapshots,
                               GameTrace training_trace)
    : snaps_(std::move(snapshots)), trace_(std::move(training_trace)) {
  if (snaps_.empty()) throw config_error("BatchPredictor: no snapshots");
}

Forecast BatchPredictor::predict(const Context& x, Rng& rng) {
  const std::size_t i = static_cast<std::size_t>(rng.below(snaps_.size()));
  return snaps_[i]->predict(x, rng);
}

Forecast BatchPredictor::predict_with(std::size_t i, const Context& x, Rng& rng) {
  if (i >= snaps_.size()) throw std::out_of_range("BatchPredictor: snapshot index");
  return snaps_[i]->predict(x, rng);
}

BatchPredictor online_to_batch(Forecaster& forecaster, const Dataset& data, std::uint64_t seed) {
  if (data.size() == 0) throw config_error("online_to_batch: empty dataset");
  if (data.xs.size() != data.ys.size())
    throw config_error("online_to_batch: mismatched dataset columns");
  if (forecaster.space() != data.space)
    throw config_error("online_to_batch: forecaster and dataset disagree on the outcome space");

  Rng rng(seed);
  GameTrace trace;
  trace.space = data.space;
  trace.seed = seed;
  std::vector<std::unique_ptr<Forecaster>> snaps;
  snaps.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    snaps.push_back(forecaster.clone());
    const Context& x = data.xs[i];
    const double y = data.ys[i];
    Forecast f = forecaster.predict(x, rng);
    if (!data.space.contains(y))
      throw game_error("online_to_batch: pair " + std::to_string(i + 1) +
                       ": outcome outside the declared space");
    forecaster.update(x, f, y);
    trace.rounds.push_back(Round{x, f, y});
  }
  return BatchPredictor(std::move(snaps), std::move(trace));
}

namespace {

// Mean and stderr of per-replicate means; each replicate averages `points`
// evaluations of `one_point`.
McEstimate replicate_mc(int replicates, int points, std::uint64_t seed,
                        const std::function<double(Rng&)>& one_point) {
  if (replicates < 1 || points < 1)
    throw config_error("monte carlo: replicates and points must be positive");
  std::vector<double> means;
  means.reserve(static_cast<std::size_t>(replicates));
  for (int r = 0; r < replicates; ++r) {
    Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(r)));
    double sum = 0;
    for (int j = 0; j < points; ++j) sum += one_point(rng);
    means.push_back(sum / points);
  }
  McEstimate est;
  est.replicates = replicates;
  est.points = points;
  double total = 0;
  for (double m : means) total += m;
  est.mean = total / replicates;
  if (replicates > 1) {
    double ss = 0;
    for (double m : means) ss += (m - est.mean) * (m - est.mean);
    est.stderr_of_mean = std::sqrt(ss / (replicates - 1)) / std::sqrt(double(replicates));
  }
  return est;
}

void require_sampler(const PairSampler& sampler, const OutcomeSpace& space) {
  if (!sampler.draw) throw config_error("monte carlo: sampler has no draw function");
  if (sampler.space != space)
    throw config_error("monte carlo: sampler and predictor disagree on the outcome space");
}

}  // namespace

McEstimate batch_risk(BatchPredictor& predictor, const PairSampler& sampler, const Loss& loss,
                      int replicates, int points, std::uint64_t seed) {
  require_sampler(sampler, predictor.space());
  return replicate_mc(replicates, points, seed, [&](Rng& rng) {
    auto [x, y] = sampler.draw(rng);
    const Forecast f = predictor.predict(x, rng);
    return loss.eval(f.value, y);
  });
}

std::vector<McEstimate> per_snapshot_risk(BatchPredictor& predictor, const PairSampler& sampler,
                                          const Loss& loss, int replicates, int points,
                                          std::uint64_t seed) {
  require_sampler(sampler, predictor.space());
  std::vector<McEstimate> out;
  out.reserve(predictor.size());
  for (std::size_t i = 0; i < predictor.size(); ++i) {
    out.push_back(replicate_mc(replicates, points, Rng::derive(seed, 0x1000 + i), [&](Rng& rng) {
      auto [x, y] = sampler.draw(rng);
      const Forecast f = predictor.predict_with(i, x, rng);
      return loss.eval(f.value, y);
    }));
  }
  return out;
}

McEstimate rule_risk(const std::function<double(const Context&)>& rule, const PairSampler& sampler,
                     const Loss& loss, int replicates, int points, std::uint64_t seed) {
  if (!rule) throw config_error("rule_risk: empty rule");
  if (!sampler.draw) throw config_error("rule_risk: sampler has no draw function");
  return replicate_mc(replicates, points, seed, [&](Rng& rng) {
    auto [x, y] = sampler.draw(rng);
    return loss.eval(rule(x), y);
  });
}

McEstimate batch_functional(BatchPredictor& predictor, const PairSampler& sampler,
                            const std::function<double(const Context&, double, double)>& omega,
                            int replicates, int points, std::uint64_t seed) {
  require_sampler(sampler, predictor.space());
  if (!omega) throw config_error("batch_functional: empty functional");
  return replicate_mc(replicates, points, seed, [&](Rng& rng) {
    auto [x, y] = sampler.draw(rng);
    const Forecast f = predictor.predict(x, rng);
    return omega(x, f.value, y);
  });
}

std::vector<GroupCoverage> batch_conditional_coverage(
    BatchPredictor& predictor, const PairSampler& sampler,
    const std::vector<std::pair<std::string, GroupIndicator>>& groups, double q, int replicates,
    int points, std::uint64_t seed) {
  require_sampler(sampler, predictor.space());
  if (!(q > 0 && q < 1)) throw config_error("batch_conditional_coverage: q must be in (0, 1)");
  for (const auto& [name, f] : groups)
    if (!f) throw config_error("batch_conditional_coverage: group '" + name + "' has no indicator");

  // One joint pass so every group sees the same draws; per-replicate rows of
  // (hit sums, member counts) feed the stderr of each group's gap.
  const std::size_t g = groups.size();
  std::vector<std::vector<double>> gap_means(g), mass_means(g);
  for (int r = 0; r < replicates; ++r) {
    Rng rng(Rng::derive(seed, static_cast<std::uint64_t>(r)));
    std::vector<double> gap_sum(g, 0.0), mass_sum(g, 0.0);
    for (int j = 0; j < points; ++j) {
      auto [x, y] = sampler.draw(rng);
      const Forecast f = predictor.predict(x, rng);
      const double resid = (y <= f.value ? 1.0 : 0.0) - q;
      for (std::size_t k = 0; k < g; ++k) {
        if (groups[k].second(x)) {
          gap_sum[k] += resid;
          mass_sum[k] += 1.0;
        }
      }
    }
    for (std::size_t k = 0; k < g; ++k) {
      gap_means[k].push_back(gap_sum[k] / points);
      mass_means[k].push_back(mass_sum[k] / points);
    }
  }

  std::vector<GroupCoverage> out;
  out.reserve(g);
  for (std::size_t k = 0; k < g; ++k) {
    GroupCoverage row;
    row.name = groups[k].first;
    double gm = 0, mm = 0;
    for (int r = 0; r < replicates; ++r) {
      gm += gap_means[k][static_cast<std::size_t>(r)];
      mm += mass_means[k][static_cast<std::size_t>(r)];
    }
    row.gap = gm / replicates;
    row.mass = mm / replicates;
    if (replicates > 1) {
      double ss = 0;
      for (int r = 0; r < replicates; ++r) {
        const double d = gap_means[k][static_cast<std::size_t>(r)] - row.gap;
        ss += d * d;
      }
      row.gap_stderr = std::sqrt(ss / (replicates - 1)) / std::sqrt(double(replicates));
    }
    row.defined = row.mass > 0;
    row.deviation = row.defined ? std::fabs(row.gap) / row.mass : 0.0;
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace df
