#include "df/search.hpp"

#include <cmath>

#include "df/common.hpp"

namespace df {

namespace {

double checked_eval(const Summary& S, double p, int& evals) {
  double v = S.eval(p);
  ++evals;
  if (!std::isfinite(v))
    throw game_error("summary returned a non-finite value at p=" + fmt_double(p));
  return v;
}

}  // namespace

std::string_view to_string(Branch b) {
  switch (b) {
    case Branch::AtOne: return "at_one";
    case Branch::AtZero: return "at_zero";
    case Branch::Root: return "root";
    case Branch::AtMin: return "at_min";
    case Branch::AtMax: return "at_max";
    case Branch::TwoPoint: return "two_point";
    case Branch::None: return "none";
  }
  return "none";
}

Branch branch_from_string(std::string_view s) {
  if (s == "at_one") return Branch::AtOne;
  if (s == "at_zero") return Branch::AtZero;
  if (s == "root") return Branch::Root;
  if (s == "at_min") return Branch::AtMin;
  if (s == "at_max") return Branch::AtMax;
  if (s == "two_point") return Branch::TwoPoint;
  if (s == "none") return Branch::None;
  throw config_error("unknown branch label: '" + std::string(s) + "'");
}

SearchResult anticorrelation_search(const Summary& S, double eps, EndpointOrder order) {
  SearchResult r;

  double s1 = 0, s0 = 0;
  bool have1 = false, have0 = false;
  auto at_one = [&]() -> bool {
    s1 = checked_eval(S, 1.0, r.evals);
    have1 = true;
    return s1 >= 0;
  };
  auto at_zero = [&]() -> bool {
    s0 = checked_eval(S, 0.0, r.evals);
    have0 = true;
    return s0 <= 0;
  };

  bool done_one = false, done_zero = false;
  if (order == EndpointOrder::OneFirst) {
    done_one = at_one();
    if (!done_one) done_zero = at_zero();
  } else {
    done_zero = at_zero();
    if (!done_zero) done_one = at_one();
  }
  if (done_one) {
    r.p = 1.0;
    r.branch = Branch::AtOne;
    r.s_at_p = s1;
    return r;
  }
  if (done_zero) {
    r.p = 0.0;
    r.branch = Branch::AtZero;
    r.s_at_p = s0;
    return r;
  }

  // Both endpoint checks failed, so S(0) > 0 > S(1). A root exists only if
  // the summary is continuous.
  (void)have0;
  (void)have1;
  if (!S.continuous)
    throw game_error("summary changes sign but is declared discontinuous; no valid forecast");

  double a = 0.0, b = 1.0;  // S(a) > 0 > S(b)
  for (;;) {
    const double mid = 0.5 * (a + b);
    const double s = checked_eval(S, mid, r.evals);
    if (std::fabs(s) <= eps || s == 0.0 || b - a <= 0x1.0p-52) {
      r.p = mid;
      r.branch = Branch::Root;
      r.s_at_p = s;
      return r;
    }
    (s > 0 ? a : b) = mid;
  }
}

SignChange sign_change_search(const Summary& S, double lo, double hi, double gamma) {
  if (!(lo < hi)) throw game_error("sign_change_search: empty bracket");
  SignChange r;
  r.lo = lo;
  r.hi = hi;
  r.s_lo = checked_eval(S, lo, r.evals);
  r.s_hi = checked_eval(S, hi, r.evals);
  if (!(r.s_lo < 0 && r.s_hi > 0))
    throw game_error("sign_change_search: bracket does not straddle a sign change");

  double neg_p = lo;  // last point with a strictly negative summary value
  const double width_floor = 0x1.0p-52 * std::max({1.0, std::fabs(lo), std::fabs(hi)});
  while (r.hi - r.lo > gamma && r.hi - r.lo > width_floor) {
    const double mid = 0.5 * (r.lo + r.hi);
    if (!(mid > r.lo && mid < r.hi)) break;  // bracket exhausted in this precision
    const double s = checked_eval(S, mid, r.evals);
    if (s <= 0) {
      if (s < 0) neg_p = mid;
      r.lo = mid;
      r.s_lo = s;
    } else {
      r.hi = mid;
      r.s_hi = s;
    }
  }

  // Restore a strictly negative lower endpoint if a zero midpoint landed on it.
  if (r.s_lo == 0) {
    double c = r.lo;
    for (int i = 0; i < 64 && c > neg_p; ++i) {
      c = std::nextafter(c, neg_p);
      const double s = checked_eval(S, c, r.evals);
      if (s < 0) {
        r.lo = c;
        r.s_lo = s;
        return r;
      }
    }
    // plateau of exact zeros: fall back to the last known negative point
    r.lo = neg_p;
    r.s_lo = checked_eval(S, neg_p, r.evals);
  }
  return r;
}

double ToleranceSchedule::at(std::int64_t t) const {
  if (t < 1) throw game_error("tolerance schedule queried at t < 1");
  if (name == "fixed") return fixed;
  // default: min(1e-9, 1/(10 t^2))
  const double dt = static_cast<double>(t);
  return std::min(1e-9, 1.0 / (10.0 * dt * dt));
}

ToleranceSchedule ToleranceSchedule::parse(std::string_view s) {
  ToleranceSchedule ts;
  if (s.empty() || s == "default") return ts;
  if (s.substr(0, 6) == "fixed:") {
    ts.name = "fixed";
    ts.fixed = parse_double(s.substr(6));
    if (ts.fixed < 0) throw config_error("fixed tolerance must be nonnegative");
    return ts;
  }
  throw config_error("unknown tolerance schedule: '" + std::string(s) + "'");
}

double ToleranceSchedule::partial_sum(std::int64_t T) const {
  double acc = 0;
  for (std::int64_t t = 1; t <= T; ++t) acc += at(t);
  return acc;
}

}  // namespace df
