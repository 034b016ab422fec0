#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "df/game.hpp"
#include "df/kernels.hpp"
#include "df/search.hpp"

namespace df {

// Binary-outcome defensive forecaster. Keeps the feature-weighted residual
// sum Sum_s Phi(x_s, p_s)(y_s - p_s) small in norm by choosing each p_t so
// the summary
//     S_t(p) = < Phi(x_t, p), Sum_{s<t} Phi(x_s, p_s)(y_s - p_s) >
// anticorrelates with the next residual. Storage splits along the kernel:
// summands with a finite feature expansion accumulate into a running
// feature sum (O(dim) per summary evaluation), the remainder keeps the
// full history (O(t) kernel evaluations, but only over the residual
// kernel terms). A kernel with no remainder never stores history.
// The guarantee either way: |Sum_s Phi (y_s - p_s)|^2 grows at most like
// Sum_s |Phi|^2 (y_s - p_s)^2 plus twice the summed search tolerance.
class DmmForecaster final : public Forecaster {
 public:
  explicit DmmForecaster(KernelSpec kernel, ToleranceSchedule tol = {},
                         EndpointOrder init = EndpointOrder::OneFirst);
  // Direct feature-map construction (always explicit mode).
  explicit DmmForecaster(FeatureMap phi, ToleranceSchedule tol = {},
                         EndpointOrder init = EndpointOrder::OneFirst);

  OutcomeSpace space() const override { return OutcomeSpace::binary(); }
  Forecast predict(const Context& x, Rng& rng) override;
  void update(const Context& x, const Forecast& f, double y) override;
  std::unique_ptr<Forecaster> clone() const override;

  // state inspection
  std::int64_t rounds_seen() const { return t_ - 1; }
  bool kernelized() const { return mode_ == Mode::Kernelized; }
  const std::vector<double>& feature_sum() const;
  double summary(const Context& x, double p) const;          // S_t(p)
  double self_kernel(const Context& x, double p) const;      // k((x,p),(x,p))
  double tolerance_sum() const { return eps_sum_; }
  const ToleranceSchedule& tolerance() const { return tol_; }

 private:
  enum class Mode { Undecided, Explicit, Kernelized };
  void decide_mode(const Context& x);

  KernelSpec kernel_;
  std::optional<FeatureMap> phi_;     // finite kernel part, if any
  std::optional<KernelSpec> rest_;    // summands without a finite expansion
  ToleranceSchedule tol_;
  EndpointOrder init_ = EndpointOrder::OneFirst;
  Mode mode_ = Mode::Undecided;

  std::vector<double> feature_sum_;   // Sum Phi (y - p) over the finite part
  struct Past {
    Context x;
    double p;
    double r;  // y - p
  };
  std::vector<Past> history_;         // kept only when rest_ is present
  std::int64_t t_ = 1;
  double eps_sum_ = 0;
};

// Mean gap between realized test values and their forecast expectations:
//   | Sum_t [ f(x_t, p_t, y_t) - (p_t f(x_t, p_t, 1) + (1 - p_t) f(x_t, p_t, 0)) ] | / T
// Small whenever the residual feature sum is small and f's outcome
// difference lies in the feature span.
using TestFunction = std::function<double(const Context& x, double p, double y)>;
double oi_gap(const GameTrace& trace, const TestFunction& f);

// Per-round check that the squared residual feature norm stays below the
// diagonal sum plus twice the accumulated tolerance. Uses the recorded
// summary values, so it can run on a stored trace. Returns the largest
// violation over all rounds (<= 0 means the bound held everywhere).
struct DiagonalCheck {
  double max_violation = 0;
  double lhs_final = 0;  // |Sum Phi (y-p)|^2 after the last round
  double rhs_final = 0;
  bool pass = false;
};
DiagonalCheck diagonal_bound_check(const GameTrace& trace, const KernelSpec& kernel,
                                   const ToleranceSchedule& tol);
DiagonalCheck diagonal_bound_check(const GameTrace& trace, const FeatureMap& phi,
                                   const ToleranceSchedule& tol);

}  // namespace df
