#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "df/batch.hpp"
#include "df/game.hpp"
#include "df/quantiles.hpp"

namespace df {

// Builds a data source from its spec string "<outcome>[+<context>]".
//
// Outcome rules (binary space unless noted):
//   bernoulli:<theta>        i.i.d. bits with mean theta
//   constant:<v>             fixed outcome v
//   pattern:<bits>           cyclic bit pattern, e.g. pattern:0110
//   flip | adversarial-flip  y = 1{p < 1/2}
//   match                    y = 1{p >= 1/2}
//   noisy-flip:<rho>         flip, replaced by a fair coin w.p. rho
//   linear-logistic:<d>      x uniform in the unit ball of R^d, y ~
//                            Ber(sigmoid(<w, x>)) for a fixed unit w drawn
//                            once from the game seed
//   uniform-quantile:[a,b]   interval space (a,b], y ~ U(a,b]
//   logistic-quantile:[a,b]  interval space, logistic law truncated to
//                            (a,b] with location a0 + <w, x>
//   csv:<path>               replay of a dataset file, contexts included
//
// Context sources (default: the rule's own, else no context):
//   none | uniform:<d> (U[0,1]^d) | ball:<d> | sphere:<d>
std::unique_ptr<Nature> make_nature(const std::string& spec);

// Lipschitz constant of the conditional CDF declared by a quantile nature
// spec; errors for natures that do not declare one.
double nature_lipschitz(const std::string& spec);

// Axis-aligned quadrants of the first two context coordinates, split at the
// given point; the standard group family for conditional coverage.
std::vector<std::pair<std::string, GroupIndicator>> quadrant_groups(double split = 0.5);

// i.i.d. (x, y) sampler matching a non-adaptive nature spec, for batch
// evaluation; adaptive rules (outcomes reading p) are rejected.
PairSampler make_sampler(const std::string& spec);

}  // namespace df
