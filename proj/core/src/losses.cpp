#include "df/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace df {

Loss square_loss() {
  Loss l;
  l.name = "square";
  l.eval = [](double a, double y) { return (a - y) * (a - y); };
  l.bayes = [](double p) { return p; };
  l.range_bound = 1;  // |(a-1)^2 - a^2| = |1 - 2a| <= 1 on [0,1]
  l.bayes_diff_continuous = true;
  return l;
}

Loss zero_one_loss() {
  Loss l;
  l.name = "zeroone";
  l.eval = [](double a, double y) {
    // interior actions miss both outcomes
    if (a == 0.0) return y == 0.0 ? 0.0 : 1.0;
    if (a == 1.0) return y == 1.0 ? 0.0 : 1.0;
    return 1.0;
  };
  l.bayes = [](double p) { return p >= 0.5 ? 1.0 : 0.0; };
  l.range_bound = 1;
  l.bayes_diff_continuous = false;  // jumps at p = 1/2
  return l;
}

Loss log_loss() {
  Loss l;
  l.name = "log";
  l.eval = [](double a, double y) {
    return y == 1.0 ? -std::log(a) : -std::log1p(-a);
  };
  l.bayes = [](double p) { return p; };
  l.range_bound = std::numeric_limits<double>::infinity();
  l.bayes_diff_continuous = true;
  return l;
}

Loss loss_by_name(std::string_view name) {
  if (name == "square") return square_loss();
  if (name == "zeroone") return zero_one_loss();
  if (name == "log") return log_loss();
  throw config_error("unknown loss: '" + std::string(name) + "'");
}

double bayes_action(const Loss& loss, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw game_error("bayes_action needs p in [0,1]");
  return loss.bayes(p);
}

FeatureMap risk_feature_map(const Loss& loss) {
  if (!std::isfinite(loss.range_bound))
    throw config_error("risk feature map needs a finite loss range bound");
  if (!loss.bayes_diff_continuous)
    throw config_error("risk feature map needs a continuous bayes loss difference; '" +
                       loss.name + "' jumps");
  const double B = loss.range_bound;
  const auto eval = loss.eval;
  const auto bayes = loss.bayes;
  FeatureMap fm;
  fm.dim = 2;
  fm.fill = [eval, bayes, B](const Context&, double p, double* out) {
    const double a = bayes(p);
    out[0] = eval(a, 1.0) - eval(a, 0.0);
    out[1] = B;
  };
  return fm;
}

FeatureMap linear_feature_map(int context_dim) {
  if (context_dim < 0) throw config_error("context_dim must be >= 0");
  FeatureMap fm;
  fm.dim = 2 + context_dim;
  fm.fill = [context_dim](const Context& x, double p, double* out) {
    if (static_cast<int>(x.size()) != context_dim)
      throw game_error("linear feature map dimension mismatch");
    out[0] = 1.0;
    out[1] = p;
    for (int i = 0; i < context_dim; ++i) out[2 + i] = x[static_cast<std::size_t>(i)];
  };
  return fm;
}

ConstantRegret regret_vs_constant(const GameTrace& trace, const Loss& loss) {
  ConstantRegret out;
  const auto total = [&](double a) {
    double s = 0;
    for (const auto& r : trace.rounds) s += loss.eval(a, r.y);
    return s;
  };

  for (const auto& r : trace.rounds) out.actions_loss += loss.eval(bayes_action(loss, r.f.value), r.y);

  // grid pass
  const int n = 10000;
  double best_a = 0, best = total(0.0);
  for (int i = 1; i <= n; ++i) {
    const double a = static_cast<double>(i) / n;
    const double v = total(a);
    if (v < best) {
      best = v;
      best_a = a;
    }
  }
  // ternary refinement one grid cell either side; a no-op for flat losses
  double lo = std::max(0.0, best_a - 1.0 / n), hi = std::min(1.0, best_a + 1.0 / n);
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (total(m1) <= total(m2))
      hi = m2;
    else
      lo = m1;
  }
  const double refined = 0.5 * (lo + hi);
  const double vr = total(refined);
  if (vr < best) {
    best = vr;
    best_a = refined;
  }

  out.best_action = best_a;
  out.best_loss = best;
  out.observed = out.actions_loss - best;
  return out;
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

void project_ball(std::vector<double>& w, double M) {
  const double n = norm(w);
  if (n > M && n > 0) {
    const double c = M / n;
    for (double& v : w) v *= c;
  }
}

}  // namespace

std::vector<double> pgd_ball_least_squares(const std::vector<std::vector<double>>& A,
                                           const std::vector<double>& b, double M,
                                           double grad_tol, long max_iters, long* iters_out,
                                           double* residual_out) {
  const std::size_t d = b.size();
  std::vector<double> w(d, 0.0), g(d), wn(d);

  // Lipschitz constant of the gradient: 2 lambda_max(A), via power iteration.
  double lam = 0;
  {
    std::vector<double> v(d, 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(d, 1))));
    for (int it = 0; it < 200; ++it) {
      std::vector<double> av(d, 0.0);
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) av[i] += A[i][j] * v[j];
      const double n = norm(av);
      if (n == 0) break;
      for (std::size_t i = 0; i < d; ++i) v[i] = av[i] / n;
      lam = n;
    }
  }
  const double step = lam > 0 ? 1.0 / (2.0 * lam * 1.01) : 1.0;

  long it = 0;
  double res = std::numeric_limits<double>::infinity();
  for (; it < max_iters; ++it) {
    for (std::size_t i = 0; i < d; ++i) {
      double av = 0;
      for (std::size_t j = 0; j < d; ++j) av += A[i][j] * w[j];
      g[i] = 2.0 * (av - b[i]);
    }
    for (std::size_t i = 0; i < d; ++i) wn[i] = w[i] - step * g[i];
    project_ball(wn, M);
    double diff = 0;
    for (std::size_t i = 0; i < d; ++i) {
      const double dd = w[i] - wn[i];
      diff += dd * dd;
    }
    res = std::sqrt(diff) / step;  // gradient-mapping norm
    w = wn;
    if (res <= grad_tol) break;
  }
  if (iters_out) *iters_out = it;
  if (residual_out) *residual_out = res;
  return w;
}

LinearRegret regret_vs_linear(const GameTrace& trace, double M) {
  if (!(M > 0)) throw config_error("regret_vs_linear needs M > 0");
  LinearRegret out;
  if (trace.rounds.empty()) return out;
  const std::size_t d = trace.rounds.front().x.size();

  std::vector<std::vector<double>> A(d, std::vector<double>(d, 0.0));
  std::vector<double> b(d, 0.0);
  double c = 0;
  for (const auto& r : trace.rounds) {
    out.forecast_loss += (r.y - r.f.value) * (r.y - r.f.value);
    for (std::size_t i = 0; i < d; ++i) {
      b[i] += r.y * r.x[i];
      for (std::size_t j = 0; j <= i; ++j) A[i][j] += r.x[i] * r.x[j];
    }
    c += r.y * r.y;
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) A[i][j] = A[j][i];

  if (d == 0) {
    // no context: the only linear predictor is 0
    out.oracle_loss = c;
    out.observed = out.forecast_loss - c;
    return out;
  }

  out.w_star = pgd_ball_least_squares(A, b, M, 1e-8, 2'000'000, &out.iterations, &out.residual);
  double quad = c;
  for (std::size_t i = 0; i < d; ++i) {
    quad -= 2.0 * b[i] * out.w_star[i];
    for (std::size_t j = 0; j < d; ++j) quad += out.w_star[i] * A[i][j] * out.w_star[j];
  }
  out.oracle_loss = quad;
  out.observed = out.forecast_loss - out.oracle_loss;
  return out;
}

OnlineGradient::OnlineGradient(double alpha, double M, int dim) : alpha_(alpha), M_(M) {
  if (!(alpha > 0) || !(M > 0) || dim < 1) throw config_error("OnlineGradient needs alpha > 0, M > 0, dim >= 1");
  w_.assign(static_cast<std::size_t>(dim), 0.0);
}

Forecast OnlineGradient::predict(const Context& x, Rng&) {
  if (x.size() != w_.size()) throw game_error("OnlineGradient context dimension mismatch");
  Forecast f;
  f.value = dot(w_, x);
  f.branch = Branch::None;
  return f;
}

void OnlineGradient::update(const Context& x, const Forecast& f, double y) {
  const double g = f.value - y;
  for (std::size_t i = 0; i < w_.size(); ++i) w_[i] -= alpha_ * g * x[i];
  project_ball(w_, M_);
}

std::unique_ptr<Forecaster> OnlineGradient::clone() const {
  return std::make_unique<OnlineGradient>(*this);
}

}  // namespace df
