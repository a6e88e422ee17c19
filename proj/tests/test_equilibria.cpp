#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "hillnet/equilibria.hpp"
#include "test_support.hpp"

using namespace hillnet;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

const ReducedToggleParams kRegion5{0.5, 1, 1, 0.5, 1, 1};
const ReducedToggleParams kRegion1{2, 1, 1, 0.1, 0.2, 1};
const ReducedToggleParams kRegion7{0.2, 0.3, 1, 0.1, 0.2, 1};

HillModel reduced(ReducedToggleParams p, double d) {
  p.d = d;
  return builtin_reduced_toggle(p);
}

// Equilibria of the reduced Toggle as sign changes of
// h(x1) = -x1 + H12(H21(x1)/gamma2) along x1, then bisection.
std::vector<VectorXd> nullcline_roots(const ReducedToggleParams& p, int n = 200000) {
  auto x2_of = [&](double x1) { return (p.ell21 + p.delta21 / (1 + std::pow(x1, p.d))) / p.gamma2; };
  auto h = [&](double x1) { return -x1 + p.ell12 + p.delta12 / (1 + std::pow(x2_of(x1), p.d)); };
  const double hi = p.ell12 + p.delta12 + 1e-9;
  std::vector<VectorXd> roots;
  double a = 0.0, ha = h(a);
  for (int i = 1; i <= n; ++i) {
    const double b = hi * i / n, hb = h(b);
    if (ha == 0.0 || ha * hb < 0) {
      double lo = a, up = b;
      for (int it = 0; it < 200 && ha != 0.0; ++it) {
        const double m = 0.5 * (lo + up);
        (h(lo) * h(m) <= 0 ? up : lo) = m;
      }
      const double x1 = ha == 0.0 ? a : 0.5 * (lo + up);
      VectorXd x(2);
      x << x1, x2_of(x1);
      roots.push_back(x);
    }
    a = b;
    ha = hb;
  }
  return roots;
}

}  // namespace

TEST_CASE("bootstrap map basics") {
  const auto m = reduced(kRegion5, 100);
  CHECK_NOTHROW(require_monotone_factorization(m));
  // alpha = beta collapses to the vector field's fixed-point form
  VectorXd x(2);
  x << 0.8, 1.7;
  const auto img = bootstrap_map(m, {x, x});
  const double e12 = eval_hill_response(x[1], EdgeSign::repressing, {0.5, 1, 1, 100});
  const double e21 = eval_hill_response(x[0], EdgeSign::repressing, {0.5, 1, 1, 100});
  CHECK(img.lower[0] == doctest::Approx(e12));
  CHECK(img.upper[0] == doctest::Approx(e12));
  CHECK(img.lower[1] == doctest::Approx(e21 / 1.0));
  CHECK(img.upper[1] == doctest::Approx(e21 / 1.0));

  // gamma2 enters the second component
  const auto mg = builtin_reduced_toggle({0.5, 1, 2, 0.5, 1, 3});
  const auto ig = bootstrap_map(mg, {x, x});
  CHECK(ig.lower[1] == doctest::Approx(eval_hill_response(x[0], EdgeSign::repressing, {0.5, 1, 1, 3}) / 2));

  // fixed point iff equilibrium
  const auto roots = nullcline_roots({0.5, 1, 1, 0.5, 1, 100});
  for (const auto& r : roots) {
    const auto fr = bootstrap_map(m, {r, r});
    CHECK((fr.lower - r).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((fr.upper - r).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("canonical start and nesting") {
  const auto m = reduced({0.3, 2.0, 1.7, 0.4, 1.1, 1}, 8);
  Rectangle r = canonical_start(m);
  // limits at 0 and infinity of repressing responses
  CHECK(r.lower[0] == doctest::Approx(0.3));
  CHECK(r.upper[0] == doctest::Approx(2.3));
  CHECK(r.lower[1] == doctest::Approx(0.4 / 1.7));
  CHECK(r.upper[1] == doctest::Approx(1.5 / 1.7));
  for (int it = 0; it < 200; ++it) {
    const Rectangle nxt = bootstrap_map(m, r);
    CHECK((nxt.lower.array() >= r.lower.array() - 1e-15).all());
    CHECK((nxt.upper.array() <= r.upper.array() + 1e-15).all());
    CHECK((nxt.lower.array() <= nxt.upper.array()).all());
    r = nxt;
  }
}

TEST_CASE("root enclosure dichotomy") {
  const auto e7 = root_enclosure(reduced(kRegion7, 10));
  CHECK(e7.converged);
  CHECK(e7.rect.width() < 1e-9);
  const auto r7 = nullcline_roots({0.2, 0.3, 1, 0.1, 0.2, 10});
  REQUIRE(r7.size() == 1);
  CHECK(e7.rect.contains(r7[0], 1e-9));

  const auto e5 = root_enclosure(reduced(kRegion5, 100));
  CHECK(e5.converged);
  CHECK(e5.rect.width() > 0.5);
  for (const auto& r : nullcline_roots({0.5, 1, 1, 0.5, 1, 100})) CHECK(e5.rect.contains(r, 1e-12));
}

TEST_CASE("find_root") {
  const auto m = reduced(kRegion5, 100);
  const auto corner = root_enclosure(m).rect;
  VectorXd c(2);
  c << corner.lower[0], corner.upper[1];
  const auto r = find_root(m, c);
  REQUIRE(r);
  CHECK(m.eval(*r).cwiseAbs().maxCoeff() <= 1e-12);
  const auto eq = describe_equilibrium(m, *r);
  CHECK(eq.stable());

  // exact equilibrium is returned unchanged
  const auto again = find_root(m, *r);
  REQUIRE(again);
  CHECK((*again - *r).norm() == 0.0);

  VectorXd ones = VectorXd::Ones(2);
  const auto mid = find_root(m, ones);
  REQUIRE(mid);
  CHECK((*mid - ones).norm() == 0.0);
  CHECK_THROWS_AS(find_root(m, -ones), std::domain_error);
}

TEST_CASE("radii polynomial") {
  CHECK(*radii_root(0.0, 0.0, 4.0) == doctest::Approx(0.25));
  CHECK_FALSE(radii_root(1.0, 0.0, 1.0));   // negative discriminant
  CHECK_FALSE(radii_root(1e-3, 1.0, 1.0));  // Z0 >= 1
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const double Y = 1e-3 * u(rng), Z0 = 0.5 * u(rng), Z1 = 10 * u(rng) + 0.1;
    const auto r = radii_root(Y, Z0, Z1);
    if (!r) {
      CHECK((1 - Z0) * (1 - Z0) - 4 * Z1 * Y < 0);
      continue;
    }
    const double p = Z1 * *r * *r + (Z0 - 1) * *r + Y;
    CHECK(std::abs(p) <= 1e-10 * std::max(1.0, *r));
  }

  // at region-5 equilibria the balls are disjoint
  const auto m = reduced(kRegion5, 100);
  const auto roots = nullcline_roots({0.5, 1, 1, 0.5, 1, 100});
  REQUIRE(roots.size() == 3);
  std::vector<double> radii;
  for (const auto& x : roots) {
    const auto polished = find_root(m, x);
    REQUIRE(polished);
    const auto b = radii_pol(m, *polished);
    REQUIRE(b);
    CHECK(b->Z0 < 1.0);
    CHECK(b->r > 0.0);
    radii.push_back(b->r);
  }
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      CHECK((roots[i] - roots[j]).cwiseAbs().maxCoeff() > std::max(radii[i], radii[j]));
}

TEST_CASE("second derivative bound dominates the pointwise value") {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 20; ++t) {
    const auto m = testing::random_toggle(rng);
    const VectorXd x = testing::random_state(rng, 2, 0.2, 3.0);
    const MatrixXd A = m.dx(x).inverse();
    const auto D = m.derivatives(x);
    double pointwise = 0.0;
    for (int i = 0; i < 2; ++i) {
      double s = 0.0;
      for (int l = 0; l < 2; ++l)
        s += std::abs(A(i, l)) * D.dxx[l].cwiseAbs().sum();
      pointwise = std::max(pointwise, s);
    }
    CHECK(second_derivative_bound(m, A, x, 1e-3) >= pointwise * (1 - 1e-9));
  }
}

TEST_CASE("unique") {
  const auto m = reduced(kRegion5, 100);
  CHECK(unique(m, {}).size() == 0);
  VectorXd x(2);
  x << 1.5, 0.5;
  const auto x0 = *find_root(m, x);
  VectorXd y = x0;
  y[0] += 1e-13;
  CHECK(unique(m, {x0, y}).size() == 1);

  const auto roots = nullcline_roots({0.5, 1, 1, 0.5, 1, 100});
  std::vector<VectorXd> cands;
  for (const auto& r : roots) cands.push_back(*find_root(m, r));
  const auto set = unique(m, cands);
  CHECK(set.size() == 3);
  CHECK(set.stable_count() == 2);
  CHECK_FALSE(set.tolerance_fallback);
  std::vector<VectorXd> survivors;
  for (const auto& e : set.points) survivors.push_back(e.x);
  const auto twice = unique(m, survivors);
  CHECK(twice.size() == set.size());
  for (int i = 0; i < set.size(); ++i) CHECK(twice.points[i].x == set.points[i].x);
}

TEST_CASE("hill_equilibria counts") {
  for (double d : {1.0, 10.0, 100.0}) {
    CHECK(hill_equilibria(reduced(kRegion1, d), 4).size() == 1);
    CHECK(hill_equilibria(reduced(kRegion7, d), 4).size() == 1);
  }
  CHECK(hill_equilibria(reduced(kRegion5, 1), 4).size() == 1);
  const auto s100 = hill_equilibria(reduced(kRegion5, 100), 4);
  CHECK(s100.size() == 3);
  CHECK(s100.stable_count() == 2);

  // counts agree with the nullcline oracle and every equilibrium is enclosed
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.05, 2.0), ud(1.0, 60.0);
  for (int t = 0; t < 40; ++t) {
    ReducedToggleParams p{u(rng), u(rng), u(rng), u(rng), u(rng), ud(rng)};
    const auto m = builtin_reduced_toggle(p);
    const auto rect = root_enclosure(m).rect;
    const auto set = hill_equilibria(m, rect, 8);
    const auto oracle = nullcline_roots(p);
    CHECK(set.size() == static_cast<int>(oracle.size()));
    for (const auto& e : set.points) CHECK(rect.contains(e.x, 1e-9));
  }

  // d = 0 gives a unique equilibrium
  auto d0 = reduced(kRegion5, 0.0);
  CHECK(hill_equilibria(d0, 2).size() == 1);
}

TEST_CASE("grid refinement is monotone on fixtures") {
  for (const auto& p : {kRegion1, kRegion5, kRegion7, ReducedToggleParams{0.9243, 0.0506, 0.8125, 0.0779, 0.8161, 1}}) {
    for (double d : {1.0, 10.0, 50.0, 100.0}) {
      const auto m = reduced(p, d);
      const auto rect = root_enclosure(m).rect;
      int prev = 0;
      for (int k : {1, 2, 4, 8}) {
        const int c = hill_equilibria(m, rect, k).size();
        CHECK(c >= prev);
        prev = c;
      }
    }
  }
}

TEST_CASE("toggle corner equilibria") {
  const auto m5 = reduced(kRegion5, 100);
  const auto rect5 = root_enclosure(m5).rect;
  const auto c5 = toggle_corner_equilibria(m5, rect5);
  CHECK_FALSE(c5.degenerate);
  REQUIRE(c5.points.size() == 2);
  for (const auto& e : c5.points) {
    CHECK(e.residual <= 1e-10);
    CHECK(e.stable());
    // real eigenvalues; tr^2 - 4 det cancels to 0 here, (a-d)^2 + 4bc does not
    const MatrixXd J = m5.dx(e.x);
    const double disc = (J(0, 0) - J(1, 1)) * (J(0, 0) - J(1, 1)) + 4 * J(0, 1) * J(1, 0);
    CHECK(disc > 0);
  }
  CHECK(c5.points[0].x[0] == rect5.lower[0]);
  CHECK(c5.points[0].x[1] == rect5.upper[1]);

  const auto m7 = reduced(kRegion7, 10);
  const auto c7 = toggle_corner_equilibria(m7, root_enclosure(m7).rect);
  CHECK(c7.degenerate);
  REQUIRE(c7.points.size() == 1);
  CHECK(c7.points[0].residual <= 1e-10);
  CHECK(c7.points[0].stable());

  // at d = 100 the canonical start is already fixed to ~1e-18; use d = 4
  const auto m5s = reduced(kRegion5, 4);
  CHECK_THROWS(toggle_corner_equilibria(m5s, canonical_start(m5s)));
}
