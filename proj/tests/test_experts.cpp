#include <doctest.h>

#include <cmath>

#include "df/experts.hpp"
#include "df/natures.hpp"

using namespace df;

namespace {

ExpertPanel const_panel(std::vector<double> vals) {
  ExpertPanel p;
  for (const double v : vals) {
    p.experts.push_back(constant_expert(v));
    p.names.push_back("const");
  }
  return p;
}

}  // namespace

TEST_SUITE("experts") {

TEST_CASE("squared loss wealth condition holds at lambda 2 and breaks at 2.5") {
  ExpertsConfig ok;
  ok.loss = GapLoss::Squared;
  ok.lambda = 2.0;
  ExpertsConfig bad = ok;
  bad.lambda = 2.5;

  bool violated = false;
  for (int i = 0; i <= 20; ++i) {
    for (int j = 0; j <= 20; ++j) {
      const double f = i / 20.0, p = j / 20.0;
      CHECK(wealth_lhs(ok, f, p) <= 1.0 + 1e-12);
      CHECK(wealth_hoeffding_bound(2.0, f, p) <= 1.0 + 1e-12);
      if (wealth_lhs(bad, f, p) > 1.0 + 1e-9) violated = true;
    }
  }
  CHECK(violated);
  // the hoeffding bound dominates the true wealth
  for (int i = 0; i <= 10; ++i)
    for (int j = 0; j <= 10; ++j) {
      const double f = i / 10.0, p = j / 10.0;
      CHECK(wealth_lhs(ok, f, p) <= wealth_hoeffding_bound(2.0, f, p) + 1e-12);
    }
}

TEST_CASE("log loss wealth is exactly one inside the clamp") {
  ExpertsConfig cfg;
  cfg.loss = GapLoss::Log;
  for (int i = 1; i < 20; ++i)
    for (int j = 1; j < 20; ++j) {
      const double f = i / 20.0, p = j / 20.0;
      CHECK(wealth_lhs(cfg, f, p) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("potential stays under log N plus slack") {
  ExpertsConfig cfg;
  cfg.loss = GapLoss::Squared;
  ExpertsForecaster fc(const_panel({0.1, 0.3, 0.5, 0.7, 0.9}), cfg);
  auto nature = make_nature("flip");
  (void)play_game(fc, *nature, 1000, 41);
  CHECK(fc.potential_log() <= std::log(5.0) + fc.tolerance_sum() + 1e-12);
  const auto a = fc.alphas();
  double mass = 0;
  for (const double v : a) {
    CHECK(v >= 0.0);
    mass += v;
  }
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("regret against the best expert obeys the potential bound") {
  ExpertsConfig cfg;
  cfg.loss = GapLoss::Squared;
  cfg.lambda = 2.0;
  const ExpertPanel panel = const_panel({0.2, 0.4, 0.6, 0.8});
  ExpertsForecaster fc(panel, cfg);
  auto nature = make_nature("bernoulli:0.35");
  const GameTrace trace = play_game(fc, *nature, 2000, 43);
  const ExpertsRegret reg = experts_regret(trace, panel, cfg);
  const double bound = experts_regret_bound(cfg, panel.size(), trace.T(), fc.tolerance_sum());
  CHECK(reg.max_regret <= bound + 1e-12);
  CHECK(reg.best_expert >= 0);
  CHECK(reg.per_expert.size() == 4);
}

TEST_CASE("single expert log loss game tracks the expert") {
  ExpertsConfig cfg;
  cfg.loss = GapLoss::Log;
  ExpertsForecaster fc(const_panel({0.7}), cfg);
  auto nature = make_nature("bernoulli:0.5");
  const GameTrace trace = play_game(fc, *nature, 500, 47);
  for (const auto& r : trace.rounds) {
    CHECK(std::fabs(r.f.value - 0.7) <= 1e-6);
  }
}

TEST_CASE("builtin experts") {
  GameTrace prefix;
  prefix.space = OutcomeSpace::binary();
  for (const double y : {1.0, 1.0, 0.0, 1.0}) {
    Round r;
    r.y = y;
    prefix.rounds.push_back(r);
  }
  const Expert lag2 = lagged_mean_expert(2);
  CHECK(lag2(prefix, {}) == doctest::Approx(0.5));  // last two: 0, 1
  const Expert lag10 = lagged_mean_expert(10);
  CHECK(lag10(prefix, {}) == doctest::Approx(0.75));  // all four
  GameTrace empty;
  CHECK(lag2(empty, {}) == 0.5);

  const Expert lin = linear_expert({2.0, -1.0});
  CHECK(lin(empty, {0.2, 0.1}) == doctest::Approx(0.3));
  CHECK(lin(empty, {1.0, 0.0}) == 1.0);   // clipped high
  CHECK(lin(empty, {-1.0, 0.0}) == 0.0);  // clipped low

  CHECK(constant_expert(0.42)(empty, {}) == 0.42);
}

TEST_CASE("prefix free panels play identically without history tracking") {
  const ExpertPanel panel = const_panel({0.25, 0.75});
  ExpertsConfig with;
  with.track_prefix = true;
  ExpertsConfig without = with;
  without.track_prefix = false;
  ExpertsForecaster a(panel, with);
  ExpertsForecaster b(const_panel({0.25, 0.75}), without);
  auto na = make_nature("pattern:0110");
  auto nb = make_nature("pattern:0110");
  const GameTrace ta = play_game(a, *na, 300, 53);
  const GameTrace tb = play_game(b, *nb, 300, 53);
  for (std::size_t i = 0; i < ta.rounds.size(); ++i)
    CHECK(ta.rounds[i].f.value == tb.rounds[i].f.value);
}

TEST_CASE("lagged experts react to history") {
  ExpertsConfig cfg;
  cfg.loss = GapLoss::Squared;
  ExpertPanel panel;
  panel.experts.push_back(lagged_mean_expert(3));
  panel.names.push_back("lagged");
  ExpertsForecaster fc(panel, cfg);
  auto nature = make_nature("constant:1");
  const GameTrace trace = play_game(fc, *nature, 50, 59);
  // a single expert pins the forecast; after three ones the expert says 1
  CHECK(trace.rounds.back().f.value == doctest::Approx(1.0).epsilon(1e-6));
}

}  // TEST_SUITE
