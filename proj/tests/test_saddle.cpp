#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hillnet/saddle.hpp"
#include "test_support.hpp"

using namespace hillnet;
using testing::fd_jacobian;
using testing::rel_err;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// g(x, s) = s - x^2
class NormalForm : public ParameterFamily {
 public:
  int dim() const override { return 1; }
  bool nonnegative_state() const override { return false; }
  FamilyJet jet(const VectorXd& x, double s) const override {
    FamilyJet j;
    j.g = VectorXd::Constant(1, s - x[0] * x[0]);
    j.dx = MatrixXd::Constant(1, 1, -2 * x[0]);
    j.dxx = {MatrixXd::Constant(1, 1, -2.0)};
    j.ds = VectorXd::Ones(1);
    j.dxds = MatrixXd::Zero(1, 1);
    return j;
  }
};

VectorXd pack_u(const VectorXd& x, const VectorXd& v, double s) {
  VectorXd u(2 * x.size() + 1);
  u << x, v, s;
  return u;
}

HillPath reduced_path(double l12, double d12, double g2, double l21, double d21) {
  return HillPath(builtin_reduced_toggle({l12, d12, g2, l21, d21, 1.0}));
}

void check_verified(const SaddleResult& r, const HillPath& path) {
  CHECK(r.verified);
  CHECK(r.residual <= 1e-10);
  CHECK(std::abs(r.v.norm() - 1.0) <= 1e-10);
  CHECK(r.min_abs_eigenvalue <= 1e-6);
  const auto m = path.at(r.s);
  CHECK((m.dx(r.x) * r.v).norm() <= 1e-8);
  const VectorXd G = saddle_map(path, pack_u(r.x, r.v, r.s));
  CHECK(G.cwiseAbs().maxCoeff() <= 1e-10);
}

}  // namespace

TEST_CASE("normal form map and Jacobian") {
  NormalForm nf;
  const VectorXd u = pack_u(VectorXd::Zero(1), VectorXd::Ones(1), 0.0);
  CHECK(saddle_map(nf, u).cwiseAbs().maxCoeff() == 0.0);
  MatrixXd expect(3, 3);
  expect << 0, 0, 1, -2, 0, 0, 0, 2, 0;
  const MatrixXd J = saddle_map_jacobian(nf, u);
  CHECK(J == expect);
  CHECK(std::abs(J.determinant()) > 1.0);

  const VectorXd u0 = pack_u(VectorXd::Constant(1, 0.3), VectorXd::Zero(1), 0.2);
  CHECK(saddle_map(nf, u0)[2] == -1.0);
}

TEST_CASE("normal form Newton") {
  NormalForm nf;
  const auto r = solve_saddle(nf, {VectorXd::Constant(1, 0.1), VectorXd::Ones(1), 0.05});
  CHECK(r.verified);
  CHECK(std::abs(r.x[0]) <= 1e-10);
  CHECK(std::abs(std::abs(r.v[0]) - 1.0) <= 1e-12);
  CHECK(std::abs(r.s) <= 1e-10);
  const auto neg = solve_saddle(nf, {VectorXd::Constant(1, -0.1), -VectorXd::Ones(1), 0.05});
  CHECK(neg.verified);
  CHECK(std::abs(neg.v[0] + 1.0) <= 1e-12);
}

TEST_CASE("path constancy") {
  const auto path = reduced_path(0.5, 1, 1, 0.5, 1);
  CHECK(HillPath::exponent(0.0) == 1.0);
  CHECK(HillPath::exponent(1.0) == 100.0);
  const auto a = path.at(0.0), b = path.at(0.37), c = path.at(1.0);
  CHECK(c.hill() == 100.0);
  for (int e = 0; e < 2; ++e) {
    CHECK(a.edge_params()[e].ell == b.edge_params()[e].ell);
    CHECK(a.edge_params()[e].delta == c.edge_params()[e].delta);
    CHECK(a.edge_params()[e].theta == c.edge_params()[e].theta);
  }
  CHECK(a.gamma() == c.gamma());
}

TEST_CASE("saddle map Jacobian matches finite differences") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> us(0.02, 0.3), uv(-1.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    for (bool emt : {false, true}) {
      auto base = emt ? testing::random_emt(rng) : testing::random_toggle(rng);
      const HillPath path(base);
      const int n = path.dim();
      VectorXd v(n);
      for (int i = 0; i < n; ++i) v[i] = uv(rng);
      const VectorXd u = pack_u(testing::random_state(rng, n, 0.3, 2.5), v, us(rng));
      auto G = [&](const VectorXd& w) { return saddle_map(path, w); };
      CHECK(rel_err(saddle_map_jacobian(path, u), fd_jacobian(G, u)) <= 1e-5);
    }
  }
}

TEST_CASE("counts along the path") {
  const auto p1 = reduced_path(2, 1, 1, 0.1, 0.2);
  PathCounter c1(p1, 4);
  for (int n : count_along_path(c1, 10)) CHECK(n == 1);

  const auto p5 = reduced_path(0.5, 1, 1, 0.5, 1);
  PathCounter c5(p5, 4);
  const auto counts = count_along_path(c5, 10);
  CHECK(counts.size() == 11);
  CHECK(counts.front() == 1);
  CHECK(counts.back() == 3);
  const auto evals = c5.evaluations();
  CHECK(c5.count(0.5) == counts[5]);
  CHECK(c5.evaluations() == evals);
}

TEST_CASE("bisection on a count change") {
  const auto p5 = reduced_path(0.5, 1, 1, 0.5, 1);
  PathCounter c(p5, 4);
  // one subinterval only: tol equal to the width gives no refinement
  const auto coarse = bisect_change(c, 0.0, 0.1, 0.1);
  REQUIRE(coarse.size() == 1);
  CHECK(coarse[0].lo == 0.0);
  CHECK(coarse[0].hi == 0.1);

  const auto fine = bisect_change(c, 0.0, 0.1, 1e-6);
  REQUIRE(!fine.empty());
  for (const auto& iv : fine) {
    CHECK(iv.hi - iv.lo <= 1e-6);
    CHECK(iv.count_lo != iv.count_hi);
    CHECK(c.count(iv.lo) == iv.count_lo);
    CHECK(c.count(iv.hi) == iv.count_hi);
  }
  const auto cands = saddle_candidates(c, fine[0]);
  REQUIRE(!cands.empty());
  const auto& cand = cands[0];
  CHECK(std::abs(cand.v.norm() - 1.0) < 1e-12);
  const auto eig = p5.at(cand.s).dx(cand.x).eigenvalues();
  double mn = 1e300;
  for (int i = 0; i < eig.size(); ++i) mn = std::min(mn, std::abs(eig[i]));
  CHECK(mn < 0.1);
}

TEST_CASE("kernel guess sign convention") {
  const auto p5 = reduced_path(0.5, 1, 1, 0.5, 1);
  VectorXd x = VectorXd::Ones(2);
  const VectorXd v = kernel_guess(p5, x, 0.2);
  CHECK(std::abs(v.norm() - 1.0) < 1e-12);
  for (int i = 0; i < v.size(); ++i) {
    if (v[i] != 0.0) {
      CHECK(v[i] > 0.0);
      break;
    }
  }
}

TEST_CASE("pipeline outcomes on fixtures") {
  PipelineConfig cfg;

  const auto none7 = classify_parameter(reduced_path(0.2, 0.3, 1, 0.1, 0.2), cfg);
  CHECK(none7.kind() == OutcomeKind::none);
  CHECK(none7.saddles.empty());

  const auto p5 = reduced_path(0.5, 1, 1, 0.5, 1);
  const auto one = classify_parameter(p5, cfg);
  CHECK(one.kind() == OutcomeKind::one);
  REQUIRE(one.saddles.size() == 1);
  const double d = HillPath::exponent(one.saddles[0].s);
  CHECK(d > 1.0);
  CHECK(d < 100.0);
  check_verified(one.saddles[0], p5);

  const auto ph = reduced_path(0.9243, 0.0506, 0.8125, 0.0779, 0.8161);
  const auto hyst = classify_parameter(ph, cfg);
  CHECK(hyst.kind() == OutcomeKind::multiple);
  CHECK(hyst.multiple());
  REQUIRE(hyst.saddles.size() == 2);
  CHECK(hyst.saddles[0].s < hyst.saddles[1].s);
  for (const auto& s : hyst.saddles) check_verified(s, ph);

  const auto j = saddle_outcome_to_json(hyst);
  CHECK(j["outcome"] == "multiple");
  CHECK(j["saddles"].size() == 2);
  CHECK(parse_outcome(outcome_name(OutcomeKind::bad)) == OutcomeKind::bad);
}

TEST_CASE("pipeline is deterministic across threads") {
  const auto ph = reduced_path(0.9243, 0.0506, 0.8125, 0.0779, 0.8161);
  PipelineConfig a, b;
  b.threads = 4;
  const auto ra = classify_parameter(ph, a), rb = classify_parameter(ph, b);
  REQUIRE(ra.saddles.size() == rb.saddles.size());
  for (std::size_t i = 0; i < ra.saddles.size(); ++i) {
    CHECK(ra.saddles[i].s == rb.saddles[i].s);
    CHECK(ra.saddles[i].x == rb.saddles[i].x);
  }
  CHECK(ra.counts == rb.counts);
}

TEST_CASE("Newton failure is data, not a fault") {
  NormalForm nf;
  SaddleOptions o;
  o.max_iter = 1;
  const auto r = solve_saddle(nf, {VectorXd::Constant(1, 3.0), VectorXd::Ones(1), -4.0}, o);
  CHECK_FALSE(r.verified);
  CHECK_FALSE(r.failure.empty());
}
