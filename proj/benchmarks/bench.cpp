// Microbenchmarks for the hot paths: one anticorrelation search, one kernel
// evaluation, one full forecasting round at a given history length, and the
// exact smooth calibration LP.
#include <benchmark/benchmark.h>

#include <cstdint>
#include <memory>
#include <vector>

#include "df/calibration.hpp"
#include "df/dmm.hpp"
#include "df/game.hpp"
#include "df/kernels.hpp"
#include "df/natures.hpp"
#include "df/search.hpp"

namespace {

using namespace df;

// A fixed cubic with S(0) > 0 > S(1), so neither endpoint short-circuits
// and the full bisection runs, as in a contested mid-game round.
void bm_anticorrelation_search(benchmark::State& state) {
  const Summary s{[](double p) { return (0.37 - p) * (p * p + 0.5); }, true};
  for (auto _ : state) {
    benchmark::DoNotOptimize(anticorrelation_search(s, 1e-9));
  }
}
BENCHMARK(bm_anticorrelation_search);

void bm_kernel_eval(benchmark::State& state) {
  const KernelSpec k = parse_kernel("1 + fs + pp + lin");
  const Context a{0.3, -0.2, 0.9};
  const Context b{-0.1, 0.4, 0.5};
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernel_eval(k, a, 0.25, b, 0.75));
  }
}
BENCHMARK(bm_kernel_eval);

// Cost of round T given T - 1 stored rounds. The kernelized part is linear
// in history per candidate evaluation, so the round cost grows with T.
void bm_dmm_round(benchmark::State& state) {
  const std::int64_t T = state.range(0);
  DmmForecaster warm(parse_kernel("1 + fs + pp + lin"));
  auto nature = make_nature("flip+ball:3");
  play_game(warm, *nature, T - 1, 7);  // leaves T - 1 rounds of history in warm
  Rng rng(11);
  const Context x{0.2, -0.4, 0.6};
  for (auto _ : state) {
    auto fc = warm.clone();
    benchmark::DoNotOptimize(fc->predict(x, rng));
  }
  state.SetComplexityN(static_cast<std::int64_t>(T));
}
BENCHMARK(bm_dmm_round)->Arg(100)->Arg(400)->Arg(1600)->Complexity(benchmark::oN);

void bm_smce_lp(benchmark::State& state) {
  const std::int64_t T = state.range(0);
  DmmForecaster fc(parse_kernel("fs"));
  auto nature = make_nature("bernoulli:0.5");
  const GameTrace tr = play_game(fc, *nature, T, 13);
  for (auto _ : state) {
    benchmark::DoNotOptimize(smooth_calibration_error(tr));
  }
  state.SetComplexityN(static_cast<std::int64_t>(T));
}
BENCHMARK(bm_smce_lp)->Arg(250)->Arg(500)->Arg(1000)->Complexity();

}  // namespace

BENCHMARK_MAIN();
