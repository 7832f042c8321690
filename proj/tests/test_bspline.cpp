#include <doctest.h>

#include <cmath>
#include <random>

#include "c1h/bspline.hpp"
#include "c1h/errors.hpp"
#include "c1h/quadrature.hpp"

using namespace c1h;

namespace {
// Cox-de Boor on an explicit knot vector, independent of the library code.
double cox_de_boor(const std::vector<double>& t, int i, int p, double x) {
  if (p == 0) {
    const bool last = x == t.back() && t[i] < t[i + 1] && t[i + 1] == t.back();
    return (t[i] <= x && x < t[i + 1]) || last ? 1.0 : 0.0;
  }
  double v = 0;
  if (t[i + p] > t[i]) v += (x - t[i]) / (t[i + p] - t[i]) * cox_de_boor(t, i, p - 1, x);
  if (t[i + p + 1] > t[i + 1])
    v += (t[i + p + 1] - x) / (t[i + p + 1] - t[i + 1]) * cox_de_boor(t, i + 1, p - 1, x);
  return v;
}

SplineSpace random_space(std::mt19937& rng) {
  std::uniform_int_distribution<int> pd(3, 5), kd(0, 4);
  const int p = pd(rng);
  std::uniform_int_distribution<int> rd(1, p - 2);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  std::vector<double> T;
  const int k = kd(rng);
  for (int i = 0; i < k; ++i) T.push_back(u(rng));
  std::sort(T.begin(), T.end());
  T.erase(std::unique(T.begin(), T.end(), [](double a, double b) { return b - a < 0.02; }), T.end());
  return make_space(p, rd(rng), T);
}
}  // namespace

TEST_CASE("dimension formulas") {
  CHECK(make_space(3, 1, {0.5}).dimension() == 6);
  CHECK(make_space(3, 1, {}).dimension() == 4);
  CHECK(make_space(4, 2, {1.0 / 3, 2.0 / 3}).dimension() == 9);
  auto d = derived_spaces(make_space(3, 1, {0.5}));
  CHECK(d.n0 == 5);
  CHECK(d.n1 == 4);
  d = derived_spaces(make_space(3, 1, {}));
  CHECK(d.n0 == 4);
  CHECK(d.n1 == 3);
  d = derived_spaces(make_space(4, 2, {1.0 / 3, 2.0 / 3}));
  CHECK(d.n0 == 7);
  CHECK(d.n1 == 6);

  std::mt19937 rng(1);
  for (int t = 0; t < 50; ++t) {
    const SplineSpace s = random_space(rng);
    const int p = s.degree(), r = s.regularity();
    const Index k = s.num_interior_breakpoints();
    CHECK(s.dimension() == p + 1 + k * (p - r));
    CHECK(Index(s.knot_vector().size()) == s.dimension() + p + 1);
    if (r + 1 <= p - 1) {
      const auto ds = derived_spaces(s);
      CHECK(ds.n0 == p + 1 + k * (p - r - 1));
      CHECK(ds.n1 == p + k * (p - r - 1));
      CHECK(ds.smooth.dimension() == ds.n0);
      CHECK(ds.lower.dimension() == ds.n1);
    }
  }
}

TEST_CASE("invalid spaces are rejected") {
  CHECK_THROWS_AS(make_space(3, 3, {}), ValidationError);
  CHECK_THROWS_AS(make_space(3, 1, {0.6, 0.4}), ValidationError);
  CHECK_THROWS_AS(make_space(3, 1, {0.0}), ValidationError);
  CHECK_THROWS_AS(make_space(3, 1, {0.5, 0.5}), ValidationError);
  CHECK_THROWS_AS(derived_spaces(make_space(3, 2, {0.5})), ValidationError);
  CHECK_THROWS_AS(eval_basis(make_space(3, 1, {0.5}), 1.5, 0), DomainError);
}

TEST_CASE("knot vector layout") {
  const auto t = make_space(3, 1, {0.5}).knot_vector();
  const std::vector<double> expect{0, 0, 0, 0, 0.5, 0.5, 1, 1, 1, 1};
  CHECK(t == expect);
}

TEST_CASE("evaluation matches Cox-de Boor") {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 20; ++t) {
    const SplineSpace s = random_space(rng);
    const auto kv = s.knot_vector();
    for (int q = 0; q < 30; ++q) {
      const double x = q == 0 ? 1.0 : u(rng);
      const auto w = eval_basis(s, x, 2);
      double sum = 0, dsum = 0, d2sum = 0;
      for (Index i = 0; i < s.dimension(); ++i) {
        const Index k = i - w.first;
        const double v = k >= 0 && k <= s.degree() ? w.ders(0, k) : 0.0;
        CHECK(v == doctest::Approx(cox_de_boor(kv, int(i), s.degree(), x)).epsilon(1e-12));
        CHECK(v >= 0.0);
        const auto [lo, hi] = s.support(i);
        if (x < s.breakpoint(lo) || x > s.breakpoint(hi + 1)) CHECK(v == 0.0);
      }
      for (int k = 0; k <= s.degree(); ++k) {
        sum += w.ders(0, k);
        dsum += w.ders(1, k);
        d2sum += w.ders(2, k);
      }
      CHECK(std::abs(sum - 1) < 1e-12);
      CHECK(std::abs(dsum) < 1e-9);
      CHECK(std::abs(d2sum) < 1e-7);
    }
  }
}

TEST_CASE("derivatives match finite differences") {
  const SplineSpace s = make_space(4, 2, {0.3, 0.7});
  const double h = 1e-6;
  for (double x : {0.1, 0.45, 0.8}) {
    for (Index i = 0; i < s.dimension(); ++i) {
      const double fd = (eval_function(s, i, x + h) - eval_function(s, i, x - h)) / (2 * h);
      CHECK(eval_function(s, i, x, 1) == doctest::Approx(fd).epsilon(1e-6).scale(1));
      const double fd2 =
          (eval_function(s, i, x + h, 1) - eval_function(s, i, x - h, 1)) / (2 * h);
      CHECK(eval_function(s, i, x, 2) == doctest::Approx(fd2).epsilon(1e-5).scale(1));
    }
  }
}

TEST_CASE("endpoint values") {
  const SplineSpace s = make_space(3, 1, {0.5});
  CHECK(eval_function(s, 0, 0.0) == 1.0);
  for (Index i = 1; i < s.dimension(); ++i) CHECK(eval_function(s, i, 0.0) == 0.0);
  CHECK(eval_function(s, s.dimension() - 1, 1.0) == 1.0);
}

TEST_CASE("greville abscissae") {
  auto g = greville(make_space(3, 1, {}));
  REQUIRE(g.size() == 4);
  CHECK(g[1] == doctest::Approx(1.0 / 3));
  CHECK(g[2] == doctest::Approx(2.0 / 3));
  g = greville(make_space(3, 1, {0.5}));
  const std::vector<double> expect{0, 1.0 / 6, 1.0 / 3, 2.0 / 3, 5.0 / 6, 1};
  for (int i = 0; i < 6; ++i) CHECK(g[i] == doctest::Approx(expect[i]).epsilon(1e-15));

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 20; ++t) {
    const SplineSpace s = random_space(rng);
    const auto z = greville(s);
    CHECK(z.front() == 0.0);
    CHECK(z.back() == doctest::Approx(1.0));
    for (std::size_t i = 1; i < z.size(); ++i) CHECK(z[i] >= z[i - 1]);
    for (int q = 0; q < 50; ++q) {
      const double x = u(rng);
      const auto w = eval_basis(s, x, 0);
      double lin = 0;
      for (int k = 0; k <= s.degree(); ++k) lin += z[w.first + k] * w.ders(0, k);
      CHECK(std::abs(lin - x) < 1e-12);
    }
  }
}

TEST_CASE("dyadic refinement") {
  const auto R0 = refine_dyadic(make_space(3, 1, {}));
  CHECK(R0.fine.dimension() == 6);
  CHECK(R0.fine.interior_breakpoints() == std::vector<double>{0.5});

  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 20; ++t) {
    const SplineSpace s = random_space(rng);
    const auto R = refine_dyadic(s);
    const Eigen::MatrixXd L = Eigen::MatrixXd(R.lambda);
    CHECK(R.fine.num_interior_breakpoints() == 2 * s.num_interior_breakpoints() + 1);
    CHECK(L(0, 0) == doctest::Approx(1.0));
    CHECK(L(0, 1) == doctest::Approx(0.5));
    CHECK(L(1, 0) == 0.0);
    CHECK(L(1, 1) == doctest::Approx(0.5));
    CHECK((L.array() >= 0).all());
    CHECK((L.colwise().sum().array() - 1).abs().maxCoeff() < 1e-13);
    // Rows by local collocation agree with knot insertion.
    for (Index i = 0; i < s.dimension(); ++i) {
      const SparseRow row = refinement_row(s, i);
      for (Index j = 0; j < R.fine.dimension(); ++j) {
        const double c = j >= row.first && j <= row.last() ? row.c[j - row.first] : 0.0;
        CHECK(std::abs(c - L(i, j)) < 1e-12);
      }
    }
    double worst = 0;
    for (int q = 0; q < 1000; ++q) {
      const double x = u(rng);
      for (Index i = 0; i < s.dimension(); ++i) {
        double fine = 0;
        for (Index j = 0; j < R.fine.dimension(); ++j) {
          if (L(i, j) != 0) fine += L(i, j) * eval_function(R.fine, j, x);
        }
        worst = std::max(worst, std::abs(fine - eval_function(s, i, x)));
      }
    }
    CHECK(worst < 1e-13);
  }
}

TEST_CASE("deep levels keep exact breakpoints") {
  const SplineSpace s(3, 1, {0.5}, 20);
  CHECK(s.num_elements() == (Index(2) << 20));
  CHECK(s.breakpoint(1) == std::ldexp(1.0, -21));
  CHECK(s.find_element(0.75) == (Index(3) << 19));
}

TEST_CASE("express_in reproduces the source function") {
  const SplineSpace s = make_space(3, 1, {0.25, 0.5, 0.75});
  const auto ds = derived_spaces(s);
  for (Index i = 0; i < ds.n0; ++i) {
    const SparseRow row = express_in(s, ds.smooth, i);
    for (double x : {0.1, 0.3, 0.55, 0.9}) {
      double v = 0;
      for (std::size_t k = 0; k < row.c.size(); ++k) v += row.c[k] * eval_function(s, row.first + Index(k), x);
      CHECK(std::abs(v - eval_function(ds.smooth, i, x)) < 1e-13);
    }
  }
}

TEST_CASE("gauss-legendre exactness") {
  for (int n = 1; n <= 8; ++n) {
    const auto q = gauss_legendre(n);
    for (int d = 0; d <= 2 * n - 1; ++d) {
      double s = 0;
      for (int i = 0; i < n; ++i) s += q.weights[i] * std::pow(q.points[i], d);
      CHECK(s == doctest::Approx(1.0 / (d + 1)).epsilon(1e-13));
    }
  }
}
