#include "df/quantiles.hpp"

#include <cmath>

#include "df/search.hpp"

namespace df {

namespace {

// q = m / 2^sh with integer m, exact for any double in [0, 1]
struct QBits {
  __int128 m = 0;
  int sh = 0;  // 0 <= sh <= 1075
};

QBits decompose_q(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw config_error("quantile level q must lie in [0,1]");
  QBits b;
  if (q == 0.0) return b;
  int ex = 0;
  const double fr = std::frexp(q, &ex);  // q = fr * 2^ex, fr in [0.5, 1)
  b.m = static_cast<__int128>(std::ldexp(fr, 53));
  b.sh = 53 - ex;
  return b;
}

}  // namespace

bool rate_le_exact(std::int64_t hits, std::int64_t rounds, double q) {
  // hits / rounds <= q  <=>  hits * 2^sh <= m * rounds; rounds = 0 means
  // the rate is defined as 0
  if (rounds == 0) return true;
  const QBits b = decompose_q(q);
  const __int128 lhs = static_cast<__int128>(hits) << b.sh;
  const __int128 rhs = b.m * rounds;
  return lhs <= rhs;
}

bool tracker_bound_exact(std::int64_t hits, std::int64_t T, double q) {
  if (T < 2) throw config_error("tracker bound needs T >= 2");
  const QBits b = decompose_q(q);
  const __int128 scale = static_cast<__int128>(1) << b.sh;
  // |hits - q (T-1)| <= max(q, 1-q), everything times 2^sh
  __int128 lhs = (static_cast<__int128>(hits) << b.sh) - b.m * (T - 1);
  if (lhs < 0) lhs = -lhs;
  const __int128 one_minus = scale - b.m;
  const __int128 rhs = b.m > one_minus ? b.m : one_minus;
  return lhs <= rhs;
}

QuantileTracker::QuantileTracker(double q, OutcomeSpace space) : q_(q), space_(space) {
  if (!(q >= 0.0 && q <= 1.0)) throw config_error("quantile level q must lie in [0,1]");
  if (space.kind != SpaceKind::Interval)
    throw config_error("quantile tracker needs an interval outcome space");
}

double QuantileTracker::x_t() const {
  return t_ == 1 ? 0.0 : static_cast<double>(hits_) / static_cast<double>(t_ - 1);
}

Forecast QuantileTracker::predict(const Context&, Rng&) {
  Forecast f;
  const bool low = rate_le_exact(hits_, t_ - 1, q_);
  f.value = low ? space_.y_max : space_.y_min;
  f.branch = low ? Branch::AtMax : Branch::AtMin;
  f.s_value = static_cast<double>(hits_) - q_ * static_cast<double>(t_ - 1);
  return f;
}

void QuantileTracker::update(const Context&, const Forecast&, double) {
  // Predicting y_max makes the round a hit and y_min a miss, regardless of
  // the drawn outcome, so the recursion never reads y.
  if (rate_le_exact(hits_, t_ - 1, q_)) ++hits_;
  ++t_;
}

std::unique_ptr<Forecaster> QuantileTracker::clone() const {
  return std::make_unique<QuantileTracker>(*this);
}

RandQuantileForecaster::RandQuantileForecaster(QuantileConfig cfg) : cfg_(std::move(cfg)) {
  if (!(cfg_.q >= 0.0 && cfg_.q <= 1.0)) throw config_error("quantile level q must lie in [0,1]");
  if (cfg_.space.kind != SpaceKind::Interval)
    throw config_error("randomized quantile forecaster needs an interval outcome space");
}

int RandQuantileForecaster::group_of(const Context& x) const {
  for (std::size_t i = 0; i < cfg_.groups.size(); ++i)
    if (cfg_.groups[i](x)) return static_cast<int>(i);
  return -1;
}

void RandQuantileForecaster::decide_mode(const Context& x) {
  if (mode_ != Mode::Undecided) return;
  if (auto fm = finite_feature_map(cfg_.kernel, static_cast<int>(x.size()))) {
    phi_ = std::move(*fm);
    feature_sum_.assign(static_cast<std::size_t>(phi_->dim) + cfg_.groups.size(), 0.0);
    mode_ = Mode::Explicit;
  } else {
    mode_ = Mode::Kernelized;
  }
}

double RandQuantileForecaster::summary(const Context& x, double p) const {
  const double pt = rescale(p);
  if (mode_ == Mode::Explicit) {
    std::vector<double> phi(static_cast<std::size_t>(phi_->dim));
    phi_->fill(x, pt, phi.data());
    double s = 0;
    for (std::size_t i = 0; i < phi.size(); ++i) s += phi[i] * feature_sum_[i];
    const int g = group_of(x);
    if (g >= 0) s += feature_sum_[phi.size() + static_cast<std::size_t>(g)];
    return s;
  }
  double s = 0;
  for (const auto& h : history_) {
    double k = kernel_eval(cfg_.kernel, x, pt, h.x, rescale(h.p));
    if (!cfg_.groups.empty()) {
      const int g = group_of(x);
      if (g >= 0 && g == group_of(h.x)) k += 1.0;
    }
    s += k * h.r;
  }
  return s;
}

Forecast RandQuantileForecaster::predict(const Context& x, Rng& rng) {
  decide_mode(x);
  const double lo = cfg_.space.y_min, hi = cfg_.space.y_max;
  Forecast out;

  Summary S;
  S.eval = [this, &x](double p) { return summary(x, p); };

  const double s_lo = S.eval(lo);
  if (s_lo >= 0) {
    out.value = lo;
    out.branch = Branch::AtMin;
    out.s_value = s_lo;
    return out;
  }
  const double s_hi = S.eval(hi);
  if (s_hi <= 0) {
    out.value = hi;
    out.branch = Branch::AtMax;
    out.s_value = s_hi;
    return out;
  }

  // S(lo) < 0 < S(hi). Narrow until the width beats the scale-aware target
  // 1/(10 t^2 |S(p1)|), re-checked as the bracket moves.
  SignChange br;
  br.lo = lo;
  br.hi = hi;
  br.s_lo = s_lo;
  br.s_hi = s_hi;
  const double tt = static_cast<double>(t_);  // t_ is the 1-based round index
  const double width_floor = 0x1.0p-52 * std::max({1.0, std::fabs(lo), std::fabs(hi)});
  for (;;) {
    if (std::fabs(br.s_lo) < 1e-12) {
      // numerically a root already: point mass
      out.value = br.lo;
      out.branch = Branch::Root;
      out.s_value = br.s_lo;
      return out;
    }
    const double gamma = 1.0 / (10.0 * tt * tt * std::fabs(br.s_lo));
    if (br.hi - br.lo <= gamma || br.hi - br.lo <= width_floor) break;
    br = sign_change_search(S, br.lo, br.hi, std::max(gamma, width_floor));
  }

  const double tau = std::fabs(br.s_hi) / (std::fabs(br.s_lo) + std::fabs(br.s_hi));
  out.dist = TwoPointDist{br.lo, br.hi, tau};
  const bool take_lo = rng.uniform01() < tau;
  out.value = take_lo ? br.lo : br.hi;
  out.s_value = take_lo ? br.s_lo : br.s_hi;
  out.branch = Branch::TwoPoint;
  return out;
}

void RandQuantileForecaster::update(const Context& x, const Forecast& f, double y) {
  decide_mode(x);
  if (!cfg_.space.contains(y)) throw game_error("outcome outside the interval space");
  const double r = (y <= f.value ? 1.0 : 0.0) - cfg_.q;
  if (mode_ == Mode::Explicit) {
    const double pt = rescale(f.value);
    std::vector<double> phi(static_cast<std::size_t>(phi_->dim));
    phi_->fill(x, pt, phi.data());
    for (std::size_t i = 0; i < phi.size(); ++i) feature_sum_[i] += phi[i] * r;
    const int g = group_of(x);
    if (g >= 0) feature_sum_[phi.size() + static_cast<std::size_t>(g)] += r;
  } else {
    history_.push_back(Past{x, f.value, r});
  }
  ++t_;
}

std::unique_ptr<Forecaster> RandQuantileForecaster::clone() const {
  return std::make_unique<RandQuantileForecaster>(*this);
}

CdfFamily uniform_cdf_family(double y_min, double y_max) {
  const OutcomeSpace sp = OutcomeSpace::interval(y_min, y_max);
  CdfFamily fam;
  fam.space = sp;
  fam.L = 1.0 / sp.width();
  fam.cdf = [sp](const Context&, double v) {
    if (v <= sp.y_min) return 0.0;
    if (v >= sp.y_max) return 1.0;
    return (v - sp.y_min) / sp.width();
  };
  fam.inv = [sp](const Context&, double u) { return sp.y_min + u * sp.width(); };
  return fam;
}

CdfFamily logistic_cdf_family(OutcomeSpace space, double a0, std::vector<double> w, double s) {
  if (!(s > 0)) throw config_error("logistic family needs scale > 0");
  if (space.kind != SpaceKind::Interval) throw config_error("logistic family needs an interval space");

  // location range reachable from unit-box contexts, for the declared L
  double mu_lo = a0, mu_hi = a0;
  for (double wi : w) {
    if (wi > 0)
      mu_hi += wi;
    else
      mu_lo += wi;
  }

  const auto sigma = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
  const auto loc = [a0, w = std::move(w)](const Context& x) {
    double m = a0;
    const std::size_t d = std::min(w.size(), x.size());
    for (std::size_t i = 0; i < d; ++i) m += w[i] * x[i];
    return m;
  };

  CdfFamily fam;
  fam.space = space;
  fam.cdf = [space, s, sigma, loc](const Context& x, double v) {
    const double mu = loc(x);
    const double c_lo = sigma((space.y_min - mu) / s);
    const double c_hi = sigma((space.y_max - mu) / s);
    if (v <= space.y_min) return 0.0;
    if (v >= space.y_max) return 1.0;
    return (sigma((v - mu) / s) - c_lo) / (c_hi - c_lo);
  };
  fam.inv = [space, s, sigma, loc](const Context& x, double u) {
    const double mu = loc(x);
    const double c_lo = sigma((space.y_min - mu) / s);
    const double c_hi = sigma((space.y_max - mu) / s);
    const double c = c_lo + u * (c_hi - c_lo);
    // logit, guarded: u in (0,1] keeps c in (c_lo, c_hi]
    const double v = mu + s * std::log(c / (1.0 - c));
    return std::min(std::max(v, std::nextafter(space.y_min, space.y_max)), space.y_max);
  };

  // Declared constant: the truncated density sigma'((v-mu)/s) / (s Z(mu)),
  // maximized over grids of reachable locations and outcomes, padded for
  // the grid gaps.
  double density_max = 0;
  for (int i = 0; i <= 64; ++i) {
    const double mu = mu_lo + (mu_hi - mu_lo) * static_cast<double>(i) / 64.0;
    const double z = sigma((space.y_max - mu) / s) - sigma((space.y_min - mu) / s);
    for (int j = 0; j <= 256; ++j) {
      const double v = space.y_min + space.width() * static_cast<double>(j) / 256.0;
      const double sv = sigma((v - mu) / s);
      const double dens = sv * (1.0 - sv) / (s * z);
      density_max = std::max(density_max, dens);
    }
    if (mu_hi == mu_lo) break;
  }
  fam.L = density_max * 1.05;
  return fam;
}

namespace {

class LipschitzNature final : public Nature {
 public:
  LipschitzNature(CdfFamily fam, ContextRule ctx) : fam_(std::move(fam)), ctx_(std::move(ctx)) {}

  OutcomeSpace space() const override { return fam_.space; }

  Context next_context(const GameTrace& sofar, Rng& rng) override {
    if (!ctx_) return {};
    return ctx_(sofar, rng);
  }

  double next_outcome(const GameTrace&, const Context& x, const Forecast&, Rng& rng) override {
    return fam_.inv(x, rng.uniform01_oc());
  }

 private:
  CdfFamily fam_;
  ContextRule ctx_;
};

}  // namespace

std::unique_ptr<Nature> lipschitz_nature(CdfFamily family, ContextRule context) {
  if (!family.cdf || !family.inv) throw config_error("cdf family needs both cdf and inverse");
  if (!(family.L > 0)) throw config_error("cdf family needs a positive Lipschitz constant");

  // sampled Lipschitz certificate: adjacent grid increments of the CDF must
  // respect the declared constant, for a handful of sampled contexts
  Rng probe(0x5eedbeef);
  const int grid = 512;
  const double w = family.space.width();
  for (int trial = 0; trial < 16; ++trial) {
    Context x;
    if (context) {
      GameTrace empty;
      empty.space = family.space;
      x = context(empty, probe);
    }
    double prev = family.cdf(x, family.space.y_min);
    for (int i = 1; i <= grid; ++i) {
      const double v = family.space.y_min + w * static_cast<double>(i) / grid;
      const double c = family.cdf(x, v);
      if (c + 1e-12 < prev) throw config_error("cdf family is not monotone");
      if (c - prev > family.L * (w / grid) + 1e-9)
        throw config_error("cdf family violates its declared Lipschitz constant");
      prev = c;
    }
  }
  return std::make_unique<LipschitzNature>(std::move(family), std::move(context));
}

double conditional_coverage_gap(const GameTrace& trace,
                                const std::function<double(const Context&, double)>& f, double q) {
  double acc = 0;
  for (const auto& r : trace.rounds)
    acc += f(r.x, r.f.value) * ((r.y <= r.f.value ? 1.0 : 0.0) - q);
  return std::fabs(acc);
}

}  // namespace df
