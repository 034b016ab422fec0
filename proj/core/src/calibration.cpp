#include "df/calibration.hpp"

#include <algorithm>
#include <cmath>

namespace df {

namespace {

// Concave piecewise-linear function on [0,1]: breakpoints xs (sorted,
// first 0, last 1) with values ys, linear in between.
struct ConcavePL {
  std::vector<double> xs, ys;

  double eval(double x) const {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs.begin());
    const double x0 = xs[i - 1], x1 = xs[i];
    const double w = (x - x0) / (x1 - x0);
    return ys[i - 1] * (1.0 - w) + ys[i] * w;
  }

  double max_value() const { return *std::max_element(ys.begin(), ys.end()); }

  // plateau of the maximum: [xs[iL], xs[iR]]
  std::pair<double, double> argmax_plateau() const {
    const double m = max_value();
    std::size_t iL = 0, iR = 0;
    bool seen = false;
    for (std::size_t i = 0; i < ys.size(); ++i) {
      if (ys[i] == m) {
        if (!seen) iL = i;
        iR = i;
        seen = true;
      }
    }
    return {xs[iL], xs[iR]};
  }
};

void dedupe(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

// h(f) = max_{u in [f-d, f+d] cap [0,1]} g(u); concave again. For concave g
// the window maximum sits at the projection of a global argmax ul onto the
// window, so h(f) = g(clamp(ul, f-d, f+d)): the plateau [ul-d, ul+d], a
// shifted copy g(f-d) to its right, g(f+d) to its left.
ConcavePL window_max(const ConcavePL& g, double d) {
  const double ul = g.argmax_plateau().first;
  const auto h_at = [&](double f) {
    const double u = std::clamp(ul, std::max(0.0, f - d), std::min(1.0, f + d));
    return g.eval(u);
  };

  std::vector<double> cand{0.0, 1.0, ul - d, ul + d};
  for (double x : g.xs) {
    if (x < ul) cand.push_back(x - d);
    if (x > ul) cand.push_back(x + d);
  }
  std::vector<double> xs;
  for (double x : cand)
    if (x >= 0.0 && x <= 1.0) xs.push_back(x);
  xs.push_back(0.0);
  xs.push_back(1.0);
  dedupe(xs);

  ConcavePL h;
  h.xs = xs;
  h.ys.reserve(xs.size());
  for (double x : xs) h.ys.push_back(h_at(x));
  return h;
}

}  // namespace

double chain_lp_max(const std::vector<double>& c, const std::vector<double>& d) {
  if (c.empty()) return 0;
  if (d.size() + 1 != c.size()) throw game_error("chain_lp_max: need one gap per adjacent pair");
  const std::size_t n = c.size();

  // g_i(f) = best value of Sum_{j>=i} c_j f_j given f_i = f; backward pass
  ConcavePL g;
  g.xs = {0.0, 1.0};
  g.ys = {0.0, c[n - 1]};
  for (std::size_t i = n - 1; i-- > 0;) {
    ConcavePL h = window_max(g, d[i]);
    for (std::size_t k = 0; k < h.xs.size(); ++k) h.ys[k] += c[i] * h.xs[k];
    g = std::move(h);
  }
  return std::max(0.0, g.max_value());
}

namespace {

// sorted distinct forecasts with summed residuals
void merge_duplicates(const std::vector<std::pair<double, double>>& py, std::vector<double>& ps,
                      std::vector<double>& cs) {
  std::vector<std::pair<double, double>> s(py);
  std::sort(s.begin(), s.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [p, y] : s) {
    if (!(p >= 0.0 && p <= 1.0)) throw game_error("smooth calibration needs forecasts in [0,1]");
    if (!ps.empty() && ps.back() == p) {
      cs.back() += y - p;
    } else {
      ps.push_back(p);
      cs.push_back(y - p);
    }
  }
}

}  // namespace

double smooth_calibration_error(const std::vector<std::pair<double, double>>& py) {
  if (py.empty()) return 0;
  std::vector<double> ps, cs;
  merge_duplicates(py, ps, cs);
  std::vector<double> gaps;
  for (std::size_t i = 0; i + 1 < ps.size(); ++i) gaps.push_back(ps[i + 1] - ps[i]);

  const double up = chain_lp_max(cs, gaps);
  std::vector<double> neg(cs.size());
  for (std::size_t i = 0; i < cs.size(); ++i) neg[i] = -cs[i];
  const double down = chain_lp_max(neg, gaps);
  return std::max(up, down);
}

double smooth_calibration_error(const GameTrace& trace) {
  std::vector<std::pair<double, double>> py;
  py.reserve(trace.rounds.size());
  for (const auto& r : trace.rounds) py.emplace_back(r.f.value, r.y);
  return smooth_calibration_error(py);
}

double round_forecast(double p, int N, Rng& rng) {
  if (N < 1) throw config_error("round_forecast needs N >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw game_error("round_forecast needs p in [0,1]");
  const double g = p * static_cast<double>(N);
  const double r = std::nearbyint(g);
  if (std::fabs(g - r) <= 1e-9) return r / static_cast<double>(N);
  const double lo = std::floor(g);
  const double frac = g - lo;
  const double up = rng.uniform01() < frac ? lo + 1.0 : lo;
  return up / static_cast<double>(N);
}

BinnedReport binned_calibration_error(const std::vector<std::pair<double, double>>& py, int N) {
  if (N < 1) throw config_error("binned calibration needs N >= 1");
  BinnedReport rep;
  rep.N = N;
  std::vector<double> sums(static_cast<std::size_t>(N) + 1, 0.0);
  rep.counts.assign(static_cast<std::size_t>(N) + 1, 0);
  for (const auto& [p, y] : py) {
    const double g = p * static_cast<double>(N);
    const double r = std::nearbyint(g);
    if (std::fabs(g - r) > 1e-9)
      throw game_error("binned calibration fed the off-grid forecast " + fmt_double(p));
    const std::size_t n = static_cast<std::size_t>(r);
    sums[n] += y - r / static_cast<double>(N);
    ++rep.counts[n];
  }
  rep.errors.resize(sums.size());
  for (std::size_t n = 0; n < sums.size(); ++n) {
    rep.errors[n] = std::fabs(sums[n]);
    rep.max_error = std::max(rep.max_error, rep.errors[n]);
  }
  return rep;
}

double binned_bound(std::int64_t T, int N, double delta) {
  if (T < 0 || N < 1 || !(delta > 0 && delta < 1))
    throw config_error("binned_bound needs T >= 0, N >= 1, delta in (0,1)");
  const double Td = static_cast<double>(T);
  return std::sqrt(Td) * (std::sqrt((8.0 * N + 2.0) / 3.0) +
                          std::sqrt(2.0 * std::log(2.0 * (N + 1) / delta))) +
         Td / (2.0 * N);
}

}  // namespace df
