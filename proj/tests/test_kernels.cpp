#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "df/common.hpp"
#include "df/kernels.hpp"

using namespace df;

namespace {

std::vector<KernelPoint> random_points(int n, int dim, Rng& rng) {
  std::vector<KernelPoint> pts;
  for (int i = 0; i < n; ++i) {
    Context x(static_cast<std::size_t>(dim));
    for (auto& v : x) v = 2 * rng.uniform01() - 1;
    pts.emplace_back(std::move(x), rng.uniform01());
  }
  return pts;
}

double min_eigenvalue(const std::vector<std::vector<double>>& g) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      m(i, j) = g[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  return es.eigenvalues().minCoeff();
}

// Unit tent of half-width eps centered at c, restricted to [0,1].
double tent(double c, double eps, double p) {
  return std::max(0.0, 1.0 - std::fabs(p - c) / eps);
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("grammar round trips through to_string") {
  const char* specs[] = {"1",
                         "fs",
                         "pp",
                         "lin",
                         "rbf(0.5)",
                         "1 + fs + pp + lin",
                         "0.5*fs + rbf(0.5)",
                         "2 + 3*pp",
                         "0.25*lin + 1e-3"};
  for (const char* s : specs) {
    const KernelSpec k = parse_kernel(s);
    const KernelSpec k2 = parse_kernel(to_string(k));
    CHECK(k == k2);
  }
  // whitespace and order are preserved semantically, not textually
  CHECK(parse_kernel("1+fs") == parse_kernel(" 1 + fs "));
}

TEST_CASE("grammar rejects malformed input") {
  CHECK_THROWS_AS(parse_kernel(""), config_error);
  CHECK_THROWS_AS(parse_kernel("fs +"), config_error);
  CHECK_THROWS_AS(parse_kernel("rbf"), config_error);
  CHECK_THROWS_AS(parse_kernel("rbf()"), config_error);
  CHECK_THROWS_AS(parse_kernel("-1"), config_error);
  CHECK_THROWS_AS(parse_kernel("2 ** fs"), config_error);
  CHECK_THROWS_AS(parse_kernel("unknown"), config_error);
  CHECK_THROWS_AS(parse_kernel("rbf(-2)"), config_error);
}

TEST_CASE("fermi sobolev closed form values") {
  // min(p,q)^2/2 + min(1-p,1-q)^2/2 + 5/6
  CHECK(fermi_sobolev_kernel(0, 0) == doctest::Approx(0.5 + 5.0 / 6.0));
  CHECK(fermi_sobolev_kernel(1, 1) == doctest::Approx(0.5 + 5.0 / 6.0));
  CHECK(fermi_sobolev_kernel(0, 1) == doctest::Approx(5.0 / 6.0));
  CHECK(fermi_sobolev_kernel(0.5, 0.5) == doctest::Approx(0.125 + 0.125 + 5.0 / 6.0));
  CHECK(fermi_sobolev_kernel(0.2, 0.7) ==
        doctest::Approx(0.02 + 0.045 + 5.0 / 6.0));
  // symmetry
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const double p = rng.uniform01(), q = rng.uniform01();
    CHECK(fermi_sobolev_kernel(p, q) == fermi_sobolev_kernel(q, p));
  }
  // diagonal maximum 4/3 sits at the endpoints
  for (int i = 0; i <= 100; ++i) {
    const double p = i / 100.0;
    CHECK(fermi_sobolev_kernel(p, p) <= 4.0 / 3.0 + 1e-15);
  }
}

TEST_CASE("gram matrices are symmetric and positive semidefinite") {
  Rng rng(17);
  const char* specs[] = {"1",  "fs", "pp", "lin", "rbf(0.7)",
                         "1 + fs + pp + lin", "0.5*fs + 2*rbf(1.5) + 0.1"};
  for (const char* s : specs) {
    const KernelSpec k = parse_kernel(s);
    for (int rep = 0; rep < 3; ++rep) {
      const auto pts = random_points(8, 3, rng);
      const auto g = gram_matrix(k, pts);
      REQUIRE(g.size() == 8);
      for (std::size_t i = 0; i < 8; ++i) {
        CHECK(g[i][i] >= -1e-12);
        for (std::size_t j = 0; j < 8; ++j) CHECK(g[i][j] == g[j][i]);
      }
      CHECK(min_eigenvalue(g) >= -1e-10);
    }
  }
}

TEST_CASE("fs norm of the tent matches quadrature") {
  // norm^2 = (integral f)^2 + integral f'^2 for f vanishing outside [0,1]
  for (const double eps : {0.05, 0.1, 0.25}) {
    const double c = 0.5;  // tent fully inside [0,1]
    const int n = 200000;
    double integral = 0, deriv2 = 0;
    for (int i = 0; i < n; ++i) {
      const double p = (i + 0.5) / n;
      integral += tent(c, eps, p) / n;
      const double d = std::fabs(p - c) < eps ? 1.0 / eps : 0.0;
      deriv2 += d * d / n;
    }
    const double quadrature = std::sqrt(integral * integral + deriv2);
    CHECK(fs_norm_bump(eps) == doctest::Approx(quadrature).epsilon(1e-3));
  }
}

TEST_CASE("lipschitz test functions have fs norm at most sqrt(2)") {
  // (integral f)^2 + integral f'^2 <= 1 + 1 for 1-Lipschitz f into [0,1]
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    // random 1-Lipschitz piecewise linear function on [0,1]
    const int knots = 50;
    std::vector<double> f(knots + 1);
    f[0] = rng.uniform01();
    for (int i = 1; i <= knots; ++i) {
      const double step = (2 * rng.uniform01() - 1) / knots;  // slope in [-1,1]
      f[static_cast<std::size_t>(i)] =
          std::min(1.0, std::max(0.0, f[static_cast<std::size_t>(i - 1)] + step));
    }
    double integral = 0, deriv2 = 0;
    for (int i = 0; i < knots; ++i) {
      const double a = f[static_cast<std::size_t>(i)], b = f[static_cast<std::size_t>(i + 1)];
      integral += (a + b) / 2.0 / knots;
      const double slope = (b - a) * knots;
      deriv2 += slope * slope / knots;
    }
    CHECK(integral * integral + deriv2 <= 2.0 + 1e-9);
  }
}

TEST_CASE("finite feature map reproduces the kernel") {
  Rng rng(31);
  const KernelSpec k = parse_kernel("2 + 3*pp + 0.5*lin");
  const auto fm = finite_feature_map(k, 3);
  REQUIRE(fm.has_value());
  for (int i = 0; i < 100; ++i) {
    const auto a = random_points(1, 3, rng)[0];
    const auto b = random_points(1, 3, rng)[0];
    const auto va = fm->at(a.first, a.second);
    const auto vb = fm->at(b.first, b.second);
    double dot = 0;
    for (std::size_t j = 0; j < va.size(); ++j) dot += va[j] * vb[j];
    CHECK(dot == doctest::Approx(kernel_eval(k, a.first, a.second, b.first, b.second))
                     .epsilon(1e-12));
  }
}

TEST_CASE("feature map is undefined once fs or rbf appears") {
  CHECK_FALSE(finite_feature_map(parse_kernel("fs"), 2).has_value());
  CHECK_FALSE(finite_feature_map(parse_kernel("1 + rbf(0.5)"), 2).has_value());
  CHECK(finite_feature_map(parse_kernel("1 + pp + lin"), 2).has_value());
}

TEST_CASE("split keeps features plus rest equal to the whole kernel") {
  Rng rng(41);
  const char* specs[] = {"1 + fs + pp + lin", "0.5*fs + 2*pp + 3",
                         "rbf(0.5) + lin", "fs + rbf(2)"};
  for (const char* s : specs) {
    const KernelSpec k = parse_kernel(s);
    const KernelSplit sp = split_finite_part(k, 2);
    REQUIRE(sp.rest.has_value());  // all cases above keep a remainder
    for (int i = 0; i < 50; ++i) {
      const auto a = random_points(1, 2, rng)[0];
      const auto b = random_points(1, 2, rng)[0];
      double v = kernel_eval(*sp.rest, a.first, a.second, b.first, b.second);
      if (sp.features) {
        const auto va = sp.features->at(a.first, a.second);
        const auto vb = sp.features->at(b.first, b.second);
        for (std::size_t j = 0; j < va.size(); ++j) v += va[j] * vb[j];
      }
      const double full = kernel_eval(k, a.first, a.second, b.first, b.second);
      CHECK(v == doctest::Approx(full).epsilon(1e-12));
    }
  }
}

TEST_CASE("split edge shapes") {
  // pure finite: no rest
  const KernelSplit fin = split_finite_part(parse_kernel("1 + pp"), 0);
  CHECK(fin.features.has_value());
  CHECK_FALSE(fin.rest.has_value());
  // pure kernelized: no features
  const KernelSplit ker = split_finite_part(parse_kernel("fs"), 0);
  CHECK_FALSE(ker.features.has_value());
  REQUIRE(ker.rest.has_value());
  CHECK(*ker.rest == parse_kernel("fs"));
  CHECK_THROWS_AS(split_finite_part(parse_kernel("1"), -1), config_error);
}

TEST_CASE("scale distributes through splits") {
  Rng rng(43);
  const KernelSpec k = parse_kernel("0.25*fs + 0.5*pp");
  const KernelSplit sp = split_finite_part(k, 0);
  REQUIRE(sp.features.has_value());
  REQUIRE(sp.rest.has_value());
  const Context none;
  for (int i = 0; i < 20; ++i) {
    const double p = rng.uniform01(), q = rng.uniform01();
    const auto va = sp.features->at(none, p);
    const auto vb = sp.features->at(none, q);
    double dot = 0;
    for (std::size_t j = 0; j < va.size(); ++j) dot += va[j] * vb[j];
    CHECK(dot == doctest::Approx(0.5 * p * q).epsilon(1e-12));
    CHECK(kernel_eval(*sp.rest, none, p, none, q) ==
          doctest::Approx(0.25 * fermi_sobolev_kernel(p, q)).epsilon(1e-12));
  }
}

}  // TEST_SUITE
