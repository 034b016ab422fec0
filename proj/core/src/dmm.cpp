#include "df/dmm.hpp"

#include <cmath>

namespace df {

DmmForecaster::DmmForecaster(KernelSpec kernel, ToleranceSchedule tol, EndpointOrder init)
    : kernel_(std::move(kernel)), tol_(std::move(tol)), init_(init) {}

DmmForecaster::DmmForecaster(FeatureMap phi, ToleranceSchedule tol, EndpointOrder init)
    : phi_(std::move(phi)), tol_(std::move(tol)), init_(init), mode_(Mode::Explicit) {
  feature_sum_.assign(static_cast<std::size_t>(phi_->dim), 0.0);
}

void DmmForecaster::decide_mode(const Context& x) {
  if (mode_ != Mode::Undecided) return;
  KernelSplit sp = split_finite_part(kernel_, static_cast<int>(x.size()));
  phi_ = std::move(sp.features);
  rest_ = std::move(sp.rest);
  if (phi_) feature_sum_.assign(static_cast<std::size_t>(phi_->dim), 0.0);
  mode_ = rest_ ? Mode::Kernelized : Mode::Explicit;
}

const std::vector<double>& DmmForecaster::feature_sum() const {
  if (!phi_) throw game_error("feature_sum: kernel has no finite feature part");
  return feature_sum_;
}

double DmmForecaster::summary(const Context& x, double p) const {
  double s = 0;
  if (phi_) {
    std::vector<double> phi(static_cast<std::size_t>(phi_->dim));
    phi_->fill(x, p, phi.data());
    for (std::size_t i = 0; i < phi.size(); ++i) s += phi[i] * feature_sum_[i];
  }
  if (rest_)
    for (const auto& h : history_) s += kernel_eval(*rest_, x, p, h.x, h.p) * h.r;
  return s;
}

double DmmForecaster::self_kernel(const Context& x, double p) const {
  double s = 0;
  if (phi_) {
    std::vector<double> phi(static_cast<std::size_t>(phi_->dim));
    phi_->fill(x, p, phi.data());
    for (double v : phi) s += v * v;
  }
  if (rest_) s += kernel_eval(*rest_, x, p, x, p);
  return s;
}

Forecast DmmForecaster::predict(const Context& x, Rng& rng) {
  (void)rng;  // deterministic rule
  decide_mode(x);
  Summary S;
  S.eval = [this, &x](double p) { return summary(x, p); };
  const SearchResult r = anticorrelation_search(S, tol_.at(t_), init_);
  Forecast f;
  f.value = r.p;
  f.s_value = r.s_at_p;
  f.branch = r.branch;
  return f;
}

void DmmForecaster::update(const Context& x, const Forecast& f, double y) {
  if (y != 0.0 && y != 1.0) throw game_error("binary forecaster fed a non-binary outcome");
  decide_mode(x);
  const double r = y - f.value;
  if (phi_) {
    std::vector<double> phi(static_cast<std::size_t>(phi_->dim));
    phi_->fill(x, f.value, phi.data());
    for (std::size_t i = 0; i < phi.size(); ++i) feature_sum_[i] += phi[i] * r;
  }
  if (rest_) history_.push_back(Past{x, f.value, r});
  eps_sum_ += tol_.at(t_);
  ++t_;
}

std::unique_ptr<Forecaster> DmmForecaster::clone() const {
  return std::make_unique<DmmForecaster>(*this);
}

double oi_gap(const GameTrace& trace, const TestFunction& f) {
  if (trace.rounds.empty()) return 0;
  double acc = 0;
  for (const auto& r : trace.rounds) {
    const double p = r.f.value;
    acc += f(r.x, p, r.y) - (p * f(r.x, p, 1.0) + (1.0 - p) * f(r.x, p, 0.0));
  }
  return std::fabs(acc) / static_cast<double>(trace.T());
}

namespace {

// Incremental identity: with G_t = |Sum_{s<=t} Phi r_s|^2,
//   G_t = G_{t-1} + 2 r_t S_t(p_t) + r_t^2 k((x_t,p_t),(x_t,p_t)),
// and the search guarantees r_t S_t(p_t) <= eps_t. The recorded s_value is
// exactly S_t(p_t), so the check replays off the trace alone.
DiagonalCheck run_check(const GameTrace& trace,
                        const std::function<double(const Context&, double)>& self_k,
                        const ToleranceSchedule& tol) {
  DiagonalCheck out;
  double lhs = 0, diag = 0, eps2 = 0;
  std::int64_t t = 0;
  // small fp headroom; the mathematical slack is the 2*eps term itself
  const double headroom = 1e-9;
  for (const auto& r : trace.rounds) {
    ++t;
    const double res = r.y - r.f.value;
    const double ktt = self_k(r.x, r.f.value);
    lhs += 2.0 * res * r.f.s_value + res * res * ktt;
    diag += res * res * ktt;
    eps2 += 2.0 * tol.at(t);
    const double rhs = diag + eps2;
    const double viol = lhs - rhs * (1.0 + 1e-12) - headroom;
    if (viol > out.max_violation) out.max_violation = viol;
    out.lhs_final = lhs;
    out.rhs_final = rhs;
  }
  out.pass = out.max_violation <= 0;
  return out;
}

}  // namespace

DiagonalCheck diagonal_bound_check(const GameTrace& trace, const KernelSpec& kernel,
                                   const ToleranceSchedule& tol) {
  return run_check(
      trace, [&kernel](const Context& x, double p) { return kernel_eval(kernel, x, p, x, p); },
      tol);
}

DiagonalCheck diagonal_bound_check(const GameTrace& trace, const FeatureMap& phi,
                                   const ToleranceSchedule& tol) {
  return run_check(
      trace,
      [&phi](const Context& x, double p) {
        std::vector<double> v(static_cast<std::size_t>(phi.dim));
        phi.fill(x, p, v.data());
        double s = 0;
        for (double a : v) s += a * a;
        return s;
      },
      tol);
}

}  // namespace df
