#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace df {

// Thrown for malformed user input: bad grammar strings, bad config values,
// unreadable trace files. The CLI maps this to exit code 2.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown when a mathematical precondition is violated at runtime (summary
// returning NaN, outcome outside the declared space, and so on).
class game_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// All randomness in the library flows through this wrapper. mt19937_64 is
// fully specified by the standard, and the uniform draw below avoids
// std::uniform_real_distribution (whose output is implementation defined),
// so identical seeds give identical streams on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t raw() { return gen_(); }

  // uniform on [0, 1), 53 random bits
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // uniform on (0, 1], for inverse-CDF sampling where 0 must be excluded
  double uniform01_oc() { return 1.0 - uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  // unbiased integer in [0, n), rejection sampled
  std::uint64_t below(std::uint64_t n);

  // stream seed for replicate r of a run seeded with `seed`; splitmix64 mix
  // keeps nearby (seed, r) pairs decorrelated
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

 private:
  std::mt19937_64 gen_;
};

// Shortest decimal string that parses back to exactly the same double.
std::string fmt_double(double v);

// Strict double parser; rejects trailing junk and empty input.
double parse_double(std::string_view s);

// FNV-1a, used for config digests in trace headers.
std::uint64_t fnv1a64(std::string_view s);
std::string hex64(std::uint64_t v);

}  // namespace df
