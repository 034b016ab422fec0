#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "df/game.hpp"
#include "df/kernels.hpp"

namespace df {

// Marginal quantile tracker over an interval outcome space. Predicting
// y_max forces the outcome below the forecast and y_min forces it above,
// so the hit-rate recursion
//   x_1 = 0,  x_{t+1} = (1 - 1/t) x_t + (1/t) 1{x_t <= q}
// never needs the realized outcomes, and |x_T - q| <= max(q, 1-q)/(T-1).
// The state is the integer hit count, so the decision x_t <= q and the
// final bound can both be evaluated exactly in integer arithmetic.
class QuantileTracker final : public Forecaster {
 public:
  QuantileTracker(double q, OutcomeSpace space);

  OutcomeSpace space() const override { return space_; }
  Forecast predict(const Context& x, Rng& rng) override;
  void update(const Context& x, const Forecast& f, double y) override;
  std::unique_ptr<Forecaster> clone() const override;

  double x_t() const;  // hit rate before the current round, 0 at t = 1
  std::int64_t hits() const { return hits_; }
  std::int64_t t() const { return t_; }
  double q() const { return q_; }

 private:
  double q_;
  OutcomeSpace space_;
  std::int64_t hits_ = 0;  // Sum_{i < t} 1{y_i <= p_i}
  std::int64_t t_ = 1;
};

// Exact comparison hits/(t-1) <= q with q decomposed as m / 2^e. No
// rounding: the tie x_t = q must count as a hit for the recursion to match
// the real-arithmetic one.
bool rate_le_exact(std::int64_t hits, std::int64_t rounds, double q);

// Exact check of |hits/(T-1) - q| <= max(q, 1-q)/(T-1), again via the
// 2-adic decomposition of q. Doubles cannot assert this inequality at its
// equality cases without spurious one-ulp failures.
bool tracker_bound_exact(std::int64_t hits, std::int64_t T, double q);

// Group structure for conditional coverage: a partition of the context
// space given by indicator functions.
using GroupIndicator = std::function<bool(const Context& x)>;

struct QuantileConfig {
  double q = 0.5;
  OutcomeSpace space = OutcomeSpace::interval(0, 1);
  // Kernel over (x, p~) with the forecast rescaled affinely to [0,1].
  KernelSpec kernel = KernelSpec::sum({KernelSpec::constant(1), KernelSpec::product_p()});
  // Optional partition indicators; each contributes the PSD term
  // 1{x in E}1{x' in E} to the kernel (one-hot features in explicit mode).
  std::vector<GroupIndicator> groups;
};

// Randomized quantile forecaster. The summary
//   S_t(p) = Sum_{s<t} k((x_t,p),(x_s,p_s)) (1{y_s <= p_s} - q)
// may jump in p, so instead of a root the search narrows a sign-change
// bracket [p1, p2] with S(p1) < 0 < S(p2) and width at most
// 1/(10 t^2 |S(p1)|), then hedges: play p1 with probability
// tau = |S(p2)| / (|S(p1)| + |S(p2)|), else p2. The expected one-step
// correlation then stays within L/(10 t^2) for any L-Lipschitz conditional
// outcome law. A bracket whose negative end is already within 1e-12 of
// zero collapses to a point mass there.
class RandQuantileForecaster final : public Forecaster {
 public:
  explicit RandQuantileForecaster(QuantileConfig cfg);

  OutcomeSpace space() const override { return cfg_.space; }
  Forecast predict(const Context& x, Rng& rng) override;
  void update(const Context& x, const Forecast& f, double y) override;
  std::unique_ptr<Forecaster> clone() const override;

  double summary(const Context& x, double p) const;  // p in outcome units
  bool kernelized() const { return mode_ == Mode::Kernelized; }
  std::int64_t rounds_seen() const { return t_ - 1; }
  const QuantileConfig& config() const { return cfg_; }

 private:
  enum class Mode { Undecided, Explicit, Kernelized };
  void decide_mode(const Context& x);
  double rescale(double p) const {
    return (p - cfg_.space.y_min) / cfg_.space.width();
  }
  int group_of(const Context& x) const;  // -1 when no group matches

  QuantileConfig cfg_;
  Mode mode_ = Mode::Undecided;
  std::optional<FeatureMap> phi_;     // kernel part of the features
  std::vector<double> feature_sum_;   // kernel features then group one-hots
  struct Past {
    Context x;
    double p;
    double r;  // 1{y <= p} - q
  };
  std::vector<Past> history_;
  std::int64_t t_ = 1;
};

// Conditional outcome law for interval games: an L-Lipschitz CDF in the
// outcome argument, sampled by inverse transform.
struct CdfFamily {
  OutcomeSpace space;
  double L = 1;
  std::function<double(const Context& x, double v)> cdf;
  std::function<double(const Context& x, double u)> inv;  // u in (0, 1]
};

CdfFamily uniform_cdf_family(double y_min, double y_max);
// Logistic law with location a0 + <w, x>, scale s, truncated to the space.
CdfFamily logistic_cdf_family(OutcomeSpace space, double a0, std::vector<double> w, double s);

// Wraps a CDF family as a Nature. Runs a sampled Lipschitz check over the
// family's declared constant at construction and rejects families that
// jump (point masses have no finite L).
std::unique_ptr<Nature> lipschitz_nature(CdfFamily family, ContextRule context = {});

// Realized coverage correlation | Sum_t f(x_t, p_t) (1{y_t <= p_t} - q) |.
double conditional_coverage_gap(const GameTrace& trace,
                                const std::function<double(const Context&, double)>& f, double q);

}  // namespace df
