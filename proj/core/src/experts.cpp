#include "df/experts.hpp"

#include <algorithm>
#include <cmath>

namespace df {

std::vector<double> ExpertPanel::eval(const GameTrace& prefix, const Context& x) const {
  std::vector<double> f(experts.size());
  for (std::size_t j = 0; j < experts.size(); ++j) {
    f[j] = experts[j](prefix, x);
    if (!(f[j] >= 0.0 && f[j] <= 1.0))
      throw game_error("expert " + std::to_string(j) + " left [0,1]: " + fmt_double(f[j]));
  }
  return f;
}

Expert constant_expert(double c) {
  if (!(c >= 0.0 && c <= 1.0)) throw config_error("constant expert needs c in [0,1]");
  return [c](const GameTrace&, const Context&) { return c; };
}

Expert linear_expert(std::vector<double> w) {
  return [w = std::move(w)](const GameTrace&, const Context& x) {
    if (x.size() != w.size()) throw game_error("linear expert dimension mismatch");
    double s = 0;
    for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * x[i];
    return std::clamp(s, 0.0, 1.0);
  };
}

Expert lagged_mean_expert(int k) {
  if (k < 1) throw config_error("lagged mean expert needs k >= 1");
  return [k](const GameTrace& prefix, const Context&) {
    const std::int64_t T = prefix.T();
    if (T == 0) return 0.5;
    const std::int64_t lo = std::max<std::int64_t>(0, T - k);
    double s = 0;
    for (std::int64_t i = lo; i < T; ++i) s += prefix.rounds[static_cast<std::size_t>(i)].y;
    return s / static_cast<double>(T - lo);
  };
}

double expert_gap(const ExpertsConfig& cfg, double fj, double p, double y) {
  if (cfg.loss == GapLoss::Squared) {
    return cfg.lambda * ((p - y) * (p - y) - (fj - y) * (fj - y));
  }
  const double d = cfg.clamp;
  const double pc = std::clamp(p, d, 1.0 - d);
  const double fc = std::clamp(fj, d, 1.0 - d);
  if (y == 1.0) return -(std::log(pc) - std::log(fc));
  return -(std::log1p(-pc) - std::log1p(-fc));
}

double wealth_lhs(const ExpertsConfig& cfg, double fj, double p) {
  return p * std::exp(expert_gap(cfg, fj, p, 1.0)) +
         (1.0 - p) * std::exp(expert_gap(cfg, fj, p, 0.0));
}

double wealth_hoeffding_bound(double lambda, double fj, double p) {
  const double d = p - fj;
  return std::exp((0.5 * lambda * lambda - lambda) * d * d);
}

ExpertsForecaster::ExpertsForecaster(ExpertPanel panel, ExpertsConfig cfg)
    : panel_(std::move(panel)), cfg_(cfg) {
  if (panel_.size() == 0) throw config_error("experts forecaster needs at least one expert");
  if (cfg_.loss == GapLoss::Squared && !(cfg_.lambda > 0 && cfg_.lambda <= 2.0))
    throw config_error("squared-loss scale lambda must lie in (0, 2]");
  if (cfg_.loss == GapLoss::Log && !(cfg_.clamp > 0 && cfg_.clamp < 0.5))
    throw config_error("log-loss clamp must lie in (0, 1/2)");
  q_.assign(panel_.size(), 0.0);
}

std::vector<double> ExpertsForecaster::alphas() const {
  const double m = *std::max_element(q_.begin(), q_.end());
  std::vector<double> a(q_.size());
  double z = 0;
  for (std::size_t j = 0; j < q_.size(); ++j) {
    a[j] = std::exp(q_[j] - m);
    z += a[j];
  }
  for (double& v : a) v /= z;
  return a;
}

double ExpertsForecaster::potential_log() const {
  const double m = *std::max_element(q_.begin(), q_.end());
  double z = 0;
  for (double qj : q_) z += std::exp(qj - m);
  return m + std::log(z);
}

double ExpertsForecaster::summary(const std::vector<double>& alpha, const std::vector<double>& f,
                                  double p) const {
  double up = 0, down = 0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    up += alpha[j] * std::exp(expert_gap(cfg_, f[j], p, 1.0));
    down += alpha[j] * std::exp(expert_gap(cfg_, f[j], p, 0.0));
  }
  return up - down;
}

Forecast ExpertsForecaster::predict(const Context& x, Rng&) {
  const std::vector<double> f = panel_.eval(prefix_, x);
  const std::vector<double> alpha = alphas();

  // Log loss blows up at the endpoints, so the search runs on the clamped
  // interval, reparameterized to [0, 1].
  const double lo = cfg_.loss == GapLoss::Log ? cfg_.clamp : 0.0;
  const double hi = 1.0 - lo;

  Summary S;
  S.eval = [&](double u) { return summary(alpha, f, lo + u * (hi - lo)); };
  const SearchResult r = anticorrelation_search(S, cfg_.tol.at(t_ + 1), EndpointOrder::OneFirst);

  Forecast out;
  out.value = lo + r.p * (hi - lo);
  out.s_value = r.s_at_p;
  out.branch = r.branch;
  return out;
}

void ExpertsForecaster::update(const Context& x, const Forecast& f, double y) {
  if (y != 0.0 && y != 1.0) throw game_error("binary forecaster fed a non-binary outcome");
  const std::vector<double> fe = panel_.eval(prefix_, x);
  for (std::size_t j = 0; j < q_.size(); ++j) q_[j] += expert_gap(cfg_, fe[j], f.value, y);
  eps_sum_ += cfg_.tol.at(t_ + 1);
  ++t_;
  if (cfg_.track_prefix) prefix_.rounds.push_back(Round{x, f, y});
}

std::unique_ptr<Forecaster> ExpertsForecaster::clone() const {
  return std::make_unique<ExpertsForecaster>(*this);
}

ExpertsRegret experts_regret(const GameTrace& trace, const ExpertPanel& panel,
                             const ExpertsConfig& cfg) {
  ExpertsRegret out;
  out.per_expert.assign(panel.size(), 0.0);

  const auto loss_of = [&cfg](double v, double y) {
    if (cfg.loss == GapLoss::Squared) return (v - y) * (v - y);
    const double c = std::clamp(v, cfg.clamp, 1.0 - cfg.clamp);
    return y == 1.0 ? -std::log(c) : -std::log1p(-c);
  };

  GameTrace prefix;
  prefix.space = trace.space;
  for (const auto& r : trace.rounds) {
    const std::vector<double> f = panel.eval(prefix, r.x);
    const double lp = loss_of(r.f.value, r.y);
    for (std::size_t j = 0; j < panel.size(); ++j) out.per_expert[j] += lp - loss_of(f[j], r.y);
    prefix.rounds.push_back(r);
  }
  for (std::size_t j = 0; j < panel.size(); ++j) {
    if (out.per_expert[j] > out.max_regret || out.best_expert < 0) {
      out.max_regret = out.per_expert[j];
      out.best_expert = static_cast<int>(j);
    }
  }
  if (!out.per_expert.empty())
    out.max_regret = *std::max_element(out.per_expert.begin(), out.per_expert.end());
  return out;
}

double experts_regret_bound(const ExpertsConfig& cfg, std::size_t n_experts, std::int64_t T,
                            double eps_sum) {
  const double logn = std::log(static_cast<double>(n_experts));
  if (cfg.loss == GapLoss::Squared) return (logn + eps_sum) / cfg.lambda;
  return logn + static_cast<double>(T) * cfg.clamp / (1.0 - cfg.clamp) + eps_sum;
}

}  // namespace df
