#include "df/game.hpp"

#include <cmath>

namespace df {

OutcomeSpace OutcomeSpace::interval(double lo, double hi) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw config_error("interval outcome space needs finite y_min < y_max");
  OutcomeSpace s;
  s.kind = SpaceKind::Interval;
  s.y_min = lo;
  s.y_max = hi;
  return s;
}

bool OutcomeSpace::contains(double y) const {
  if (kind == SpaceKind::Binary) return y == 0.0 || y == 1.0;
  return y > y_min && y <= y_max;
}

GameTrace play_game(Forecaster& forecaster, Nature& nature, std::int64_t T, std::uint64_t seed) {
  if (T < 0) throw config_error("horizon T must be nonnegative");
  if (!(forecaster.space() == nature.space()))
    throw game_error("forecaster and nature disagree on the outcome space");

  GameTrace trace;
  trace.space = forecaster.space();
  trace.seed = seed;
  trace.rounds.reserve(static_cast<std::size_t>(T));

  Rng rng(seed);
  for (std::int64_t t = 1; t <= T; ++t) {
    Context x = nature.next_context(trace, rng);
    Forecast f = forecaster.predict(x, rng);
    const double y = nature.next_outcome(trace, x, f, rng);
    if (!trace.space.contains(y))
      throw game_error("round " + std::to_string(t) + ": outcome " + fmt_double(y) +
                       " outside the declared outcome space");
    forecaster.update(x, f, y);
    trace.rounds.push_back(Round{std::move(x), std::move(f), y});
  }
  return trace;
}

namespace {

class AdaptiveNature final : public Nature {
 public:
  AdaptiveNature(OutcomeRule outcome, OutcomeSpace space, ContextRule context)
      : outcome_(std::move(outcome)), context_(std::move(context)), space_(space) {}

  OutcomeSpace space() const override { return space_; }

  Context next_context(const GameTrace& sofar, Rng& rng) override {
    if (!context_) return {};
    return context_(sofar, rng);
  }

  double next_outcome(const GameTrace& sofar, const Context& x, const Forecast& f,
                      Rng& rng) override {
    return outcome_(sofar, x, f, rng);
  }

 private:
  OutcomeRule outcome_;
  ContextRule context_;
  OutcomeSpace space_;
};

}  // namespace

std::unique_ptr<Nature> nature_adaptive(OutcomeRule outcome, OutcomeSpace space, ContextRule context) {
  if (!outcome) throw config_error("nature_adaptive needs an outcome rule");
  return std::make_unique<AdaptiveNature>(std::move(outcome), space, std::move(context));
}

}  // namespace df
