#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "df/game.hpp"
#include "df/search.hpp"

namespace df {

// An expert sees the game so far and the current context and commits to a
// probability. History access exists for the lagged-mean builtin; the
// simple experts ignore it.
using Expert = std::function<double(const GameTrace& prefix, const Context& x)>;

struct ExpertPanel {
  std::vector<Expert> experts;
  std::vector<std::string> names;

  std::size_t size() const { return experts.size(); }
  std::vector<double> eval(const GameTrace& prefix, const Context& x) const;
};

Expert constant_expert(double c);
Expert linear_expert(std::vector<double> w);  // <w, x> clipped to [0, 1]
Expert lagged_mean_expert(int k);             // mean of the last k outcomes, 1/2 when empty

enum class GapLoss { Squared, Log };

struct ExpertsConfig {
  GapLoss loss = GapLoss::Squared;
  double lambda = 2.0;  // squared-loss scale, must lie in (0, 2]
  double clamp = 1e-6;  // log loss: forecasts and experts clipped to [clamp, 1-clamp]
  ToleranceSchedule tol;
  // When false the forecaster keeps no round history and experts see an
  // empty prefix; only valid for prefix-independent panels. Keeps clone()
  // O(N), which online-to-batch snapshotting relies on.
  bool track_prefix = true;
};

// Per-round gap F_j(x, p, y): the scaled loss difference between the
// forecast and expert j. Argument order is (context, forecast, outcome).
double expert_gap(const ExpertsConfig& cfg, double fj, double p, double y);

// The wealth condition the gaps must satisfy for the potential argument:
//   p e^{F(x,p,1)} + (1-p) e^{F(x,p,0)} <= 1.
// Exact (up to rounding) for the log loss; for the squared loss it follows
// from the Hoeffding bound exp((lambda^2/2 - lambda)(p - f)^2), which is
// <= 1 exactly when lambda <= 2.
double wealth_lhs(const ExpertsConfig& cfg, double fj, double p);
double wealth_hoeffding_bound(double lambda, double fj, double p);

// Defensive aggregation: track Q_j = Sum_s F_j, weight experts by
// softmax(Q), and choose p so the weighted one-step wealth cannot grow.
// Under the wealth condition, logsumexp(Q) <= log N + Sum_s slack_s, which
// caps the regret against every expert.
class ExpertsForecaster final : public Forecaster {
 public:
  ExpertsForecaster(ExpertPanel panel, ExpertsConfig cfg);

  OutcomeSpace space() const override { return OutcomeSpace::binary(); }
  Forecast predict(const Context& x, Rng& rng) override;
  void update(const Context& x, const Forecast& f, double y) override;
  std::unique_ptr<Forecaster> clone() const override;

  std::vector<double> alphas() const;   // softmax(Q), max-shifted
  double potential_log() const;         // logsumexp(Q)
  const std::vector<double>& q() const { return q_; }
  double tolerance_sum() const { return eps_sum_; }
  std::int64_t rounds_seen() const { return t_; }
  const ExpertsConfig& config() const { return cfg_; }

 private:
  double summary(const std::vector<double>& alpha, const std::vector<double>& f, double p) const;

  ExpertPanel panel_;
  ExpertsConfig cfg_;
  std::vector<double> q_;
  GameTrace prefix_;  // experts may read history, unless cfg_.track_prefix is off
  std::int64_t t_ = 0;
  double eps_sum_ = 0;
};

// Realized regret of the trace's forecasts against the best expert in the
// panel, under the config's loss (log loss applies the config clamp).
struct ExpertsRegret {
  double max_regret = 0;
  int best_expert = -1;
  std::vector<double> per_expert;
};
ExpertsRegret experts_regret(const GameTrace& trace, const ExpertPanel& panel,
                             const ExpertsConfig& cfg);

// Regret guarantee implied by the potential bound:
//   squared: (log N + eps_sum) / lambda
//   log:     log N + T * clamp/(1-clamp) + eps_sum
double experts_regret_bound(const ExpertsConfig& cfg, std::size_t n_experts, std::int64_t T,
                            double eps_sum);

}  // namespace df
