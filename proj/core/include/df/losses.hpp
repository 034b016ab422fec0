#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "df/dmm.hpp"
#include "df/game.hpp"

namespace df {

// Loss over actions in [0, 1] against binary outcomes.
// range_bound is B = sup_a |l(a,1) - l(a,0)|; it is infinite for the log
// loss, whose endpoint actions have unbounded loss.
struct Loss {
  std::string name;
  std::function<double(double a, double y)> eval;
  std::function<double(double p)> bayes;  // argmin_a E_{y~Ber(p)} l(a, y)
  double range_bound = 1;
  bool bayes_diff_continuous = true;  // a -> l(bayes(p),1) - l(bayes(p),0) continuous in p
};

Loss square_loss();
Loss zero_one_loss();  // ties at p = 1/2 act as 1
Loss log_loss();
Loss loss_by_name(std::string_view name);

double bayes_action(const Loss& loss, double p);

// Feature map (l(pi(p),1) - l(pi(p),0), B). Driving its residual sum to
// zero makes realized loss of the induced actions track the forecast
// expectation uniformly over constant comparators. Throws for losses with
// infinite B or a discontinuous bayes difference (the deterministic
// forecaster cannot hedge a jump).
FeatureMap risk_feature_map(const Loss& loss);

// Feature map (1, p, x_0 .. x_{d-1}) for comparison against bounded linear
// predictors under the squared loss.
FeatureMap linear_feature_map(int context_dim);

struct ConstantRegret {
  double observed = 0;     // realized loss of bayes actions minus best constant
  double best_action = 0;
  double best_loss = 0;
  double actions_loss = 0;
};
// Best constant found on a 1e-4 grid followed by local ternary refinement.
ConstantRegret regret_vs_constant(const GameTrace& trace, const Loss& loss);

struct LinearRegret {
  double observed = 0;      // Sum (y - p)^2 minus the constrained least-squares optimum
  std::vector<double> w_star;
  double oracle_loss = 0;
  double forecast_loss = 0;
  long iterations = 0;      // projected gradient steps spent
  double residual = 0;      // final gradient-mapping norm
};
// Offline oracle min_{|w| <= M} Sum_t (y_t - <w, x_t>)^2 computed by
// projected gradient descent run to gradient-mapping norm <= 1e-8.
LinearRegret regret_vs_linear(const GameTrace& trace, double M);

// Projected gradient solver exposed for testing: minimizes
// w^T A w - 2 b^T w over the euclidean ball |w| <= M.
std::vector<double> pgd_ball_least_squares(const std::vector<std::vector<double>>& A,
                                           const std::vector<double>& b, double M,
                                           double grad_tol, long max_iters,
                                           long* iters_out = nullptr,
                                           double* residual_out = nullptr);

// Online gradient baseline: w_1 = 0, predict <w_t, x_t>, then
// w_{t+1} = proj_M(w_t - alpha (p_t - y_t) x_t). Squared-loss regret
// against the ball obeys M^2/(2 alpha) + alpha M^2 Bx^4 T / 2 for contexts
// bounded by Bx when forecasts stay in range.
class OnlineGradient final : public Forecaster {
 public:
  OnlineGradient(double alpha, double M, int dim);
  OutcomeSpace space() const override { return OutcomeSpace::binary(); }
  Forecast predict(const Context& x, Rng& rng) override;
  void update(const Context& x, const Forecast& f, double y) override;
  std::unique_ptr<Forecaster> clone() const override;
  const std::vector<double>& weights() const { return w_; }

 private:
  double alpha_;
  double M_;
  std::vector<double> w_;
};

}  // namespace df
