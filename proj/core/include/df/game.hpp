#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "df/common.hpp"
#include "df/kernels.hpp"
#include "df/search.hpp"

namespace df {

enum class SpaceKind { Binary, Interval };

// Outcome alphabet of a game: {0,1}, or the half-open interval (y_min, y_max].
struct OutcomeSpace {
  SpaceKind kind = SpaceKind::Binary;
  double y_min = 0;
  double y_max = 1;

  static OutcomeSpace binary() { return {}; }
  static OutcomeSpace interval(double lo, double hi);

  bool contains(double y) const;
  double width() const { return y_max - y_min; }
  bool operator==(const OutcomeSpace&) const = default;
};

// lo with probability tau, hi with probability 1 - tau
struct TwoPointDist {
  double lo = 0;
  double hi = 0;
  double tau = 1;
};

struct Forecast {
  double value = 0;                      // realized forecast (the draw, if randomized)
  std::optional<TwoPointDist> dist;      // present only for randomized rules
  double s_value = 0;                    // summary at the decision point
  Branch branch = Branch::None;
};

struct Round {
  Context x;
  Forecast f;
  double y = 0;
};

struct GameTrace {
  OutcomeSpace space;
  std::uint64_t seed = 0;
  std::vector<Round> rounds;

  std::int64_t T() const { return static_cast<std::int64_t>(rounds.size()); }
};

// Sequential prediction strategy. predict must not depend on anything but
// the state accumulated through update calls, the context, and the rng
// stream (used only by randomized rules).
class Forecaster {
 public:
  virtual ~Forecaster() = default;
  virtual OutcomeSpace space() const = 0;
  virtual Forecast predict(const Context& x, Rng& rng) = 0;
  virtual void update(const Context& x, const Forecast& f, double y) = 0;
  virtual std::unique_ptr<Forecaster> clone() const = 0;
};

// Data source. Sees the full prefix and the current forecast, distribution
// included, before committing to an outcome.
class Nature {
 public:
  virtual ~Nature() = default;
  virtual OutcomeSpace space() const = 0;
  virtual Context next_context(const GameTrace& sofar, Rng& rng) {
    (void)sofar;
    (void)rng;
    return {};
  }
  virtual double next_outcome(const GameTrace& sofar, const Context& x, const Forecast& f,
                              Rng& rng) = 0;
};

// Runs T rounds: context, forecast, outcome, update. All randomness comes
// from a single stream seeded here, consumed in that fixed order, so a
// trace is reproducible from (forecaster config, nature config, T, seed).
// Throws game_error if the two sides disagree on the outcome space or if
// nature emits an outcome outside it.
GameTrace play_game(Forecaster& forecaster, Nature& nature, std::int64_t T, std::uint64_t seed);

using OutcomeRule = std::function<double(const GameTrace& sofar, const Context& x,
                                         const Forecast& f, Rng& rng)>;
using ContextRule = std::function<Context(const GameTrace& sofar, Rng& rng)>;

// Wraps a plain strategy function (and optional context source) as a Nature.
std::unique_ptr<Nature> nature_adaptive(OutcomeRule outcome, OutcomeSpace space = OutcomeSpace::binary(),
                                        ContextRule context = {});

}  // namespace df
