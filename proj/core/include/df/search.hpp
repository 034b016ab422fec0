#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace df {

// Which rule produced a forecast. The first three come out of
// anticorrelation_search; the interval-game rules add the rest.
enum class Branch {
  AtOne,     // summary nonnegative at the upper endpoint, predict 1
  AtZero,    // summary nonpositive at the lower endpoint, predict 0
  Root,      // bisection landed on an approximate root
  AtMin,     // interval games: point mass at y_min
  AtMax,     // interval games: point mass at y_max
  TwoPoint,  // interval games: randomized two-point forecast
  None,
};

std::string_view to_string(Branch b);
Branch branch_from_string(std::string_view s);

// Accumulated-error summary as a function of the candidate forecast.
// `continuous` promises a sign change can be bisected; without it the
// search refuses to go past the endpoint checks.
struct Summary {
  std::function<double(double)> eval;
  bool continuous = true;
};

struct SearchResult {
  double p = 0;
  Branch branch = Branch::None;
  double s_at_p = 0;  // summary value at the returned point
  int evals = 0;      // summary evaluations spent
};

// Endpoint preference. OneFirst checks the upper endpoint first, which is
// the canonical order (an all-zero summary yields p = 1). ZeroFirst checks
// the lower endpoint first; with a constant feature map this reproduces the
// classic previous-bit predictor exactly, ties at zero included.
enum class EndpointOrder { OneFirst, ZeroFirst };

// Pick p in [0, 1] such that sup_{y in {0,1}} (y - p) * S(p) <= eps.
// Order of checks (OneFirst): S(1) >= 0 -> p = 1; S(0) <= 0 -> p = 0;
// otherwise bisect the sign change until |S(p)| <= eps or the bracket
// width falls below 2^-52. Throws game_error on non-finite summary values
// and when a sign change exists but `continuous` is false.
SearchResult anticorrelation_search(const Summary& S, double eps,
                                    EndpointOrder order = EndpointOrder::OneFirst);

// Hard cap on summary evaluations for a unit bracket: the two endpoint
// probes plus 53 midpoints (the width test runs after each evaluation, so
// the final 2^-52 bracket still gets its value recorded).
inline constexpr int kSearchMaxEvals = 55;

struct SignChange {
  double lo = 0, hi = 0;    // S(lo) < 0 < S(hi)
  double s_lo = 0, s_hi = 0;
  int evals = 0;
};

// Narrow a sign-change bracket: given S(lo) < 0 < S(hi), bisect until
// hi - lo <= gamma, keeping strict signs at both ends. A midpoint value of
// exactly zero is assigned to the negative side; if that leaves the lower
// endpoint sitting on a zero, the endpoint is nudged back toward the last
// strictly negative point. A gamma wider than the input bracket returns
// the bracket unchanged.
SignChange sign_change_search(const Summary& S, double lo, double hi, double gamma);

// Per-round tolerance fed to the search. The default schedule is
// min(1e-9, 1/(10 t^2)): summable, so the total slack across any horizon
// stays below 1e-9 * t and the classical regret bounds survive intact.
struct ToleranceSchedule {
  std::string name = "default";
  double fixed = 0;  // used by the "fixed:<v>" schedule

  double at(std::int64_t t) const;
  static ToleranceSchedule parse(std::string_view s);
  // exact partial sum of the schedule over rounds 1..T
  double partial_sum(std::int64_t T) const;
};

}  // namespace df
