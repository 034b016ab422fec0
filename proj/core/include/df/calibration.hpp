#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "df/common.hpp"
#include "df/game.hpp"

namespace df {

// Smooth calibration error:
//   sup over 1-Lipschitz f: [0,1] -> [0,1] of | Sum_t f(p_t) (y_t - p_t) |.
// After merging duplicate forecasts the supremum is a finite LP: variables
// f_i in [0,1] at the sorted distinct forecast values, adjacent constraints
// |f_i - f_{i+1}| <= p_{i+1} - p_i, objective +-Sum c_i f_i with
// c_i the summed residuals. Solved exactly by propagating the concave
// piecewise-linear value function backward along the chain (a sliding
// window max preserves concavity), no external LP solver involved.
double smooth_calibration_error(const std::vector<std::pair<double, double>>& py);
double smooth_calibration_error(const GameTrace& trace);

// Exposed for testing: maximize Sum c_i f_i subject to f_i in [0,1] and
// |f_i - f_{i+1}| <= d_i (d_i >= 0).
double chain_lp_max(const std::vector<double>& c, const std::vector<double>& d);

// Unbiased randomized rounding onto the grid {0, 1/N, ..., 1}:
// ceil(N p)/N with probability frac(N p), floor(N p)/N otherwise, so
// E[round] = p and Pr[round = n/N] is the unit triangular bump at p.
// Values within 1e-9 of a grid point are snapped deterministically.
double round_forecast(double p, int N, Rng& rng);

// Per-bin calibration errors |Sum_{p_t = n/N} (y_t - n/N)| for forecasts
// already on the grid; off-grid input throws.
struct BinnedReport {
  int N = 0;
  std::vector<double> errors;  // indexed by n = 0..N
  std::vector<std::int64_t> counts;
  double max_error = 0;
};
BinnedReport binned_calibration_error(const std::vector<std::pair<double, double>>& py, int N);

// High-probability bound for the max bin error of a rounded
// low-correlation trace: sqrt(T) (sqrt((8N+2)/3) + sqrt(2 log(2(N+1)/delta)))
// + T/(2N).
double binned_bound(std::int64_t T, int N, double delta);

}  // namespace df
