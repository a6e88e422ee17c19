#include "hillnet/saddle.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

namespace hillnet {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sup_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

void split(const Eigen::VectorXd& u, int n, Eigen::VectorXd& x, Eigen::VectorXd& v, double& s) {
  if (u.size() != 2 * n + 1) throw std::invalid_argument("saddle state must have length 2N+1");
  x = u.head(n);
  v = u.segment(n, n);
  s = u[2 * n];
}

// Index of the eigenvalue of smallest modulus.
Eigen::Index smallest_modulus(const Eigen::VectorXcd& ev) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < ev.size(); ++i)
    if (std::abs(ev[i]) < std::abs(ev[best])) best = i;
  return best;
}

double min_abs_eigenvalue(const Eigen::MatrixXd& J) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(J, false);
  const Eigen::VectorXcd ev = es.eigenvalues();
  return std::abs(ev[smallest_modulus(ev)]);
}

}  // namespace

HillPath::HillPath(HillModel base) : base_(base.with_hill(1.0)) {}

FamilyJet HillPath::jet(const Eigen::VectorXd& x, double s) const {
  const HillModel m = at(s);
  Derivatives d = m.derivatives(x);
  FamilyJet j;
  j.g = m.eval(x);
  j.dx = std::move(d.dx);
  j.dxx = std::move(d.dxx);
  j.ds = 99.0 * d.dd;      // dd/ds = 99
  j.dxds = 99.0 * d.dxdd;
  return j;
}

Eigen::VectorXd saddle_map(const ParameterFamily& family, const Eigen::VectorXd& u) {
  const int n = family.dim();
  Eigen::VectorXd x, v;
  double s;
  split(u, n, x, v, s);
  const FamilyJet j = family.jet(x, s);
  Eigen::VectorXd G(2 * n + 1);
  G.head(n) = j.g;
  G.segment(n, n) = j.dx * v;
  G[2 * n] = v.squaredNorm() - 1.0;
  return G;
}

Eigen::MatrixXd saddle_map_jacobian(const ParameterFamily& family, const Eigen::VectorXd& u) {
  const int n = family.dim();
  Eigen::VectorXd x, v;
  double s;
  split(u, n, x, v, s);
  const FamilyJet j = family.jet(x, s);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * n + 1, 2 * n + 1);
  J.block(0, 0, n, n) = j.dx;
  J.block(0, 2 * n, n, 1) = j.ds;
  for (int i = 0; i < n; ++i) J.block(n + i, 0, 1, n) = (j.dxx[i] * v).transpose();  // symmetric in (j, k)
  J.block(n, n, n, n) = j.dx;
  J.block(n, 2 * n, n, 1) = j.dxds * v;
  J.block(2 * n, n, 1, n) = 2.0 * v.transpose();
  return J;
}

const EquilibriumSet& PathCounter::at(double s) {
  auto it = cache_.find(s);
  if (it != cache_.end()) return it->second;
  return cache_.emplace(s, hill_equilibria(path_.at(s), k_, threads_)).first->second;
}

std::vector<int> count_along_path(PathCounter& counter, int subdivisions) {
  if (subdivisions < 1) throw std::invalid_argument("subdivision count must be at least 1");
  std::vector<int> counts;
  for (int i = 0; i <= subdivisions; ++i) counts.push_back(counter.count(static_cast<double>(i) / subdivisions));
  return counts;
}

namespace {

void refine(PathCounter& counter, ChangeInterval iv, double tol_s, int max_intervals,
            std::vector<ChangeInterval>& out) {
  if (static_cast<int>(out.size()) >= max_intervals) return;
  if (iv.hi - iv.lo <= tol_s) {
    out.push_back(iv);
    return;
  }
  const double mid = 0.5 * (iv.lo + iv.hi);
  const int cm = counter.count(mid);
  if (cm != iv.count_lo) refine(counter, {iv.lo, mid, iv.count_lo, cm}, tol_s, max_intervals, out);
  if (cm != iv.count_hi) refine(counter, {mid, iv.hi, cm, iv.count_hi}, tol_s, max_intervals, out);
}

}  // namespace

std::vector<ChangeInterval> bisect_change(PathCounter& counter, double lo, double hi, double tol_s,
                                          int max_intervals) {
  if (!(hi > lo)) throw std::invalid_argument("bisection interval must have hi > lo");
  ChangeInterval iv{lo, hi, counter.count(lo), counter.count(hi)};
  std::vector<ChangeInterval> out;
  if (iv.count_lo == iv.count_hi) return out;
  refine(counter, iv, tol_s, max_intervals, out);
  return out;
}

Eigen::VectorXd kernel_guess(const ParameterFamily& family, const Eigen::VectorXd& x, double s) {
  const Eigen::MatrixXd J = family.jet(x, s).dx;
  Eigen::EigenSolver<Eigen::MatrixXd> es(J, true);
  const Eigen::Index k = smallest_modulus(es.eigenvalues());
  Eigen::VectorXd v = es.eigenvectors().col(k).real();
  if (v.norm() < 1e-12) v = es.eigenvectors().col(k).imag();
  v.normalize();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v[i] != 0.0) {
      if (v[i] < 0.0) v = -v;
      break;
    }
  return v;
}

std::vector<SaddleCandidate> saddle_candidates(PathCounter& counter, const ChangeInterval& iv) {
  const double s = iv.count_hi >= iv.count_lo ? iv.hi : iv.lo;
  const EquilibriumSet& set = counter.at(s);
  const HillModel model = counter.path().at(s);
  std::vector<Eigen::VectorXd> xs;
  if (set.size() == 1) {
    xs.push_back(set.points[0].x);
  } else if (set.size() >= 2) {
    int bi = 0, bj = 1;
    double best = kInf;
    for (int i = 0; i < set.size(); ++i)
      for (int j = i + 1; j < set.size(); ++j) {
        const double dist = sup_norm(set.points[i].x - set.points[j].x);
        if (dist < best) {
          best = dist;
          bi = i;
          bj = j;
        }
      }
    const Eigen::VectorXd& xi = set.points[bi].x;
    const Eigen::VectorXd& xj = set.points[bj].x;
    if (min_abs_eigenvalue(model.dx(xj)) < min_abs_eigenvalue(model.dx(xi))) {
      xs.push_back(xj);
      xs.push_back(xi);
    } else {
      xs.push_back(xi);
      xs.push_back(xj);
    }
    xs.push_back(0.5 * (xi + xj));
  }
  std::vector<SaddleCandidate> out;
  for (auto& x : xs) out.push_back({x, kernel_guess(counter.path(), x, s), s});
  return out;
}

SaddleResult solve_saddle(const ParameterFamily& family, const SaddleCandidate& c, const SaddleOptions& opt) {
  const int n = family.dim();
  SaddleResult res;
  Eigen::VectorXd u(2 * n + 1);
  const double vn = c.v.norm();
  if (!(vn > 0.0)) {
    res.failure = "zero kernel guess";
    return res;
  }
  u << c.x, c.v / vn, c.s;
  if (!family.admissible(c.x, c.s)) {
    res.failure = "candidate outside the family's domain";
    return res;
  }

  auto feasible = [&](const Eigen::VectorXd& w) { return w.allFinite() && family.admissible(w.head(n), w[2 * n]); };
  auto fill = [&] {
    res.x = u.head(n);
    res.v = u.segment(n, n);
    res.s = u[2 * n];
  };

  try {
    Eigen::VectorXd G = saddle_map(family, u);
    res.residual = sup_norm(G);
    for (res.iterations = 0; res.iterations < opt.max_iter && !(res.residual <= opt.tol); ++res.iterations) {
      if (!G.allFinite()) break;
      Eigen::FullPivLU<Eigen::MatrixXd> lu(saddle_map_jacobian(family, u));
      if (!lu.isInvertible()) {
        fill();
        res.failure = "singular extended Jacobian during Newton";
        return res;
      }
      const Eigen::VectorXd step = lu.solve(-G);
      double t = 1.0;
      bool moved = false;
      for (int h = 0; h <= 30; ++h, t *= 0.5) {
        const Eigen::VectorXd un = u + t * step;
        if (!feasible(un)) continue;
        const Eigen::VectorXd Gn = saddle_map(family, un);
        if (!Gn.allFinite()) continue;
        u = un;
        G = Gn;
        res.residual = sup_norm(G);
        moved = true;
        break;
      }
      if (!moved) break;
    }
    fill();
    if (!(res.residual <= opt.tol)) {
      res.failure = "Newton did not reach the residual tolerance";
      return res;
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(saddle_map_jacobian(family, u));
    const auto& sv = svd.singularValues();
    res.condition = sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1] : kInf;
    const Eigen::MatrixXd Jx = family.jet(res.x, res.s).dx;
    Eigen::EigenSolver<Eigen::MatrixXd> es(Jx, false);
    const Eigen::VectorXcd ev = es.eigenvalues();
    const Eigen::Index k0 = smallest_modulus(ev);
    res.min_abs_eigenvalue = std::abs(ev[k0]);

    if (!(res.condition < opt.max_condition)) {
      res.failure = "extended Jacobian is ill conditioned";
      return res;
    }
    for (Eigen::Index i = 0; i < ev.size(); ++i)
      if (i != k0 && !(std::abs(ev[i].real()) > opt.hyperbolic_tol)) {
        res.failure = "a second eigenvalue has vanishing real part";
        return res;
      }
    if (res.s < 0.0 || res.s > 1.0) {
      res.failure = "saddle lies outside the path";
      return res;
    }
    if (family.nonnegative_state() && !(res.x.array() > 0.0).all()) {
      res.failure = "saddle state leaves the positive orthant";
      return res;
    }
  } catch (const std::domain_error& e) {
    fill();
    res.failure = e.what();
    return res;
  }
  res.verified = true;
  return res;
}

std::string outcome_name(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::none: return "none";
    case OutcomeKind::one: return "one";
    case OutcomeKind::multiple: return "multiple";
    case OutcomeKind::bad: return "bad";
  }
  return "none";
}

OutcomeKind parse_outcome(const std::string& s) {
  if (s == "none") return OutcomeKind::none;
  if (s == "one") return OutcomeKind::one;
  if (s == "multiple") return OutcomeKind::multiple;
  if (s == "bad") return OutcomeKind::bad;
  throw std::invalid_argument("unknown outcome '" + s + "'");
}

OutcomeKind SaddleOutcome::kind() const {
  if (saddles.size() >= 2) return OutcomeKind::multiple;
  if (saddles.size() == 1) return OutcomeKind::one;
  return bad_candidates.empty() ? OutcomeKind::none : OutcomeKind::bad;
}

SaddleOutcome classify_parameter(const HillPath& path, const PipelineConfig& cfg) {
  PathCounter counter(path, cfg.grid_k, cfg.threads);
  SaddleOutcome out;
  out.counts = count_along_path(counter, cfg.subdivisions);
  int budget = cfg.max_intervals;
  for (int i = 0; i < cfg.subdivisions; ++i) {
    if (out.counts[i] == out.counts[i + 1]) continue;
    const double lo = static_cast<double>(i) / cfg.subdivisions;
    const double hi = static_cast<double>(i + 1) / cfg.subdivisions;
    if (budget <= 0) {
      const ChangeInterval skipped{lo, hi, out.counts[i], out.counts[i + 1]};
      out.intervals.push_back(skipped);
      out.bad_candidates.push_back({skipped, "interval budget exhausted"});
      continue;
    }
    const auto intervals = bisect_change(counter, lo, hi, cfg.tol_s, budget);
    budget -= static_cast<int>(intervals.size());
    for (const auto& iv : intervals) {
      out.intervals.push_back(iv);
      const auto cands = saddle_candidates(counter, iv);
      if (cands.empty()) {
        out.bad_candidates.push_back({iv, "no equilibrium on either side of the change"});
        continue;
      }
      std::string first_failure;
      bool found = false;
      for (const auto& c : cands) {
        SaddleResult r = solve_saddle(path, c, cfg.saddle);
        if (!r.verified) {
          if (first_failure.empty()) first_failure = r.failure;
          continue;
        }
        found = true;
        const bool dup = std::any_of(out.saddles.begin(), out.saddles.end(), [&](const SaddleResult& o) {
          // unresolvable below the bisection width
          return std::abs(o.s - r.s) < cfg.tol_s && sup_norm(o.x - r.x) < 1e-3;
        });
        if (!dup) out.saddles.push_back(std::move(r));
        break;
      }
      if (found)
        ++out.verified_intervals;
      else
        out.bad_candidates.push_back({iv, first_failure});
    }
  }
  std::sort(out.saddles.begin(), out.saddles.end(),
            [](const SaddleResult& a, const SaddleResult& b) { return a.s < b.s; });
  return out;
}

nlohmann::json saddle_outcome_to_json(const SaddleOutcome& o) {
  using nlohmann::json;
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  json saddles = json::array();
  for (const auto& s : o.saddles)
    saddles.push_back({{"d", HillPath::exponent(s.s)},
                       {"s", s.s},
                       {"x", vec(s.x)},
                       {"v", vec(s.v)},
                       {"residual", s.residual},
                       {"min_abs_eigenvalue", s.min_abs_eigenvalue},
                       {"condition", s.condition}});
  json bad = json::array();
  for (const auto& b : o.bad_candidates)
    bad.push_back({{"s_lo", b.interval.lo},
                   {"s_hi", b.interval.hi},
                   {"count_lo", b.interval.count_lo},
                   {"count_hi", b.interval.count_hi},
                   {"reason", b.reason}});
  return {{"outcome", outcome_name(o.kind())},
          {"saddles", saddles},
          {"bad_candidates", bad},
          {"change_intervals", o.intervals.size()}};
}

}  // namespace hillnet
