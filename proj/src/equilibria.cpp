#include "hillnet/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hillnet/parallel.hpp"

namespace hillnet {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool summand_sign(const HillModel& model, const std::vector<int>& summand, EdgeSign& sign) {
  const auto& edges = model.topology().edges();
  sign = edges[summand.front()].sign;
  for (int e : summand)
    if (edges[e].sign != sign) return false;
  return true;
}

// Product over summands of the given sign, each summand evaluated at x.
double partial_product(const HillModel& model, int i, EdgeSign sign, const Eigen::VectorXd& x) {
  const auto& edges = model.topology().edges();
  double p = 1.0;
  for (const auto& summand : model.topology().summands(i)) {
    EdgeSign s;
    summand_sign(model, summand, s);
    if (s != sign) continue;
    double sum = 0.0;
    for (int e : summand) sum += eval_hill_response(x[edges[e].source], edges[e].sign, model.edge_params()[e]);
    p *= sum;
  }
  return p;
}

// Same product in the limit x -> infinity.
double partial_product_at_infinity(const HillModel& model, int i, EdgeSign sign) {
  const auto& edges = model.topology().edges();
  double p = 1.0;
  for (const auto& summand : model.topology().summands(i)) {
    EdgeSign s;
    summand_sign(model, summand, s);
    if (s != sign) continue;
    double sum = 0.0;
    for (int e : summand) {
      const HillEdgeParams& hp = model.edge_params()[e];
      if (hp.hill == 0.0)
        sum += hp.ell + hp.delta / 2.0;
      else
        sum += edges[e].sign == EdgeSign::activating ? hp.ell + hp.delta : hp.ell;
    }
    p *= sum;
  }
  return p;
}

double sup_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

bool Rectangle::contains(const Eigen::VectorXd& x, double tol) const {
  return ((x.array() >= lower.array() - tol) && (x.array() <= upper.array() + tol)).all();
}

void require_monotone_factorization(const HillModel& model) {
  for (int i = 0; i < model.dim(); ++i)
    for (const auto& summand : model.topology().summands(i)) {
      EdgeSign s;
      if (!summand_sign(model, summand, s))
        throw std::invalid_argument("node " + std::to_string(i) +
                                    " mixes activation and repression in one summand; no monotone factorization");
    }
}

Rectangle bootstrap_map(const HillModel& model, const Rectangle& r) {
  require_monotone_factorization(model);
  const int n = model.dim();
  if (r.lower.size() != n || r.upper.size() != n) throw std::invalid_argument("rectangle dimension mismatch");
  Rectangle out{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    const double g = model.gamma()[i];
    out.lower[i] = partial_product(model, i, EdgeSign::activating, r.lower) *
                   partial_product(model, i, EdgeSign::repressing, r.upper) / g;
    out.upper[i] = partial_product(model, i, EdgeSign::activating, r.upper) *
                   partial_product(model, i, EdgeSign::repressing, r.lower) / g;
  }
  return out;
}

Rectangle canonical_start(const HillModel& model) {
  require_monotone_factorization(model);
  const int n = model.dim();
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
  Rectangle out{Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    const double g = model.gamma()[i];
    out.lower[i] = partial_product(model, i, EdgeSign::activating, zero) *
                   partial_product_at_infinity(model, i, EdgeSign::repressing) / g;
    out.upper[i] = partial_product_at_infinity(model, i, EdgeSign::activating) *
                   partial_product(model, i, EdgeSign::repressing, zero) / g;
  }
  return out;
}

EnclosureResult root_enclosure(const HillModel& model, double eps, int max_iter) {
  EnclosureResult res;
  res.rect = canonical_start(model);
  for (res.iterations = 0; res.iterations < max_iter; ++res.iterations) {
    Rectangle next = bootstrap_map(model, res.rect);
    // guard against rounding breaking the nesting
    next.lower = next.lower.cwiseMax(res.rect.lower);
    next.upper = next.upper.cwiseMin(res.rect.upper);
    const double change = std::max(sup_norm(next.lower - res.rect.lower), sup_norm(next.upper - res.rect.upper));
    res.rect = std::move(next);
    if (change < eps) {
      res.converged = true;
      ++res.iterations;
      break;
    }
  }
  return res;
}

std::optional<Eigen::VectorXd> find_root(const HillModel& model, const Eigen::VectorXd& x0,
                                         const NewtonOptions& opt) {
  if (x0.size() != model.dim()) throw std::invalid_argument("start point dimension mismatch");
  if ((x0.array() < 0.0).any()) throw std::domain_error("start point must be nonnegative");
  Eigen::VectorXd x = x0;
  Eigen::VectorXd f = model.eval(x);
  double norm = sup_norm(f);
  for (int it = 0; it <= opt.max_iter; ++it) {
    if (!std::isfinite(norm)) return std::nullopt;
    if (norm <= opt.tol) return x;
    if (it == opt.max_iter) break;
    const Eigen::MatrixXd J = model.dx(x);
    if (!J.allFinite()) return std::nullopt;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
    if (!lu.isInvertible()) return std::nullopt;
    const Eigen::VectorXd step = lu.solve(-f);
    if (!step.allFinite()) return std::nullopt;
    double t = 1.0;
    bool accepted = false;
    for (int h = 0; h <= opt.max_halvings; ++h, t *= 0.5) {
      const Eigen::VectorXd xn = (x + t * step).cwiseMax(0.0);
      const Eigen::VectorXd fn = model.eval(xn);
      const double nn = sup_norm(fn);
      if (nn < norm) {
        x = xn;
        f = fn;
        norm = nn;
        accepted = true;
        break;
      }
    }
    if (!accepted) return norm <= opt.tol ? std::optional<Eigen::VectorXd>(x) : std::nullopt;
  }
  return std::nullopt;
}

std::optional<double> radii_root(double Y, double Z0, double Z1) {
  if (!(Z0 < 1.0)) return std::nullopt;
  if (Z1 == 0.0) return kInf;
  const double disc = (1.0 - Z0) * (1.0 - Z0) - 4.0 * Z1 * Y;
  if (!(disc >= 0.0)) return std::nullopt;
  return (1.0 - Z0 + std::sqrt(disc)) / (2.0 * Z1);
}

namespace {

struct EdgeBound {
  double h = 0.0;   // sup |H|
  double h1 = 0.0;  // sup |H'|
  double h2 = 0.0;  // sup |H''|
};

EdgeBound edge_bound(EdgeSign sign, const HillEdgeParams& p, double lo, double hi) {
  EdgeBound b;
  b.h = p.ell + p.delta;
  auto take = [&](double y) {
    if (y < lo || y > hi) return;
    const HillJet j = hill_response_jet(y, sign, p);
    b.h1 = std::max(b.h1, std::abs(j.dx));
    b.h2 = std::max(b.h2, std::abs(j.dxx));
  };
  constexpr int kUniform = 32;
  for (int i = 0; i <= kUniform; ++i) take(lo + (hi - lo) * i / kUniform);
  // the derivatives live in a band of width ~theta/d around the threshold
  if (p.hill > 0.0)
    for (int i = -24; i <= 24; ++i) take(p.theta * std::exp(0.25 * i / p.hill));
  return b;
}

}  // namespace

double second_derivative_bound(const HillModel& model, const Eigen::MatrixXd& A, const Eigen::VectorXd& x,
                               double r) {
  const int n = model.dim();
  const auto& edges = model.topology().edges();
  std::vector<EdgeBound> eb(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double c = x[edges[e].source];
    eb[e] = edge_bound(edges[e].sign, model.edge_params()[e], std::max(0.0, c - r), c + r);
  }
  // entrywise bound on |D2 f_l|, summed over (j, k)
  Eigen::VectorXd B = Eigen::VectorXd::Zero(n);
  for (int l = 0; l < n; ++l) {
    const auto& summands = model.topology().summands(l);
    const int q = static_cast<int>(summands.size());
    std::vector<double> smax(q, 0.0);
    for (int m = 0; m < q; ++m)
      for (int e : summands[m]) smax[m] += eb[e].h;
    for (int m = 0; m < q; ++m) {
      double pm = 1.0;
      for (int m2 = 0; m2 < q; ++m2)
        if (m2 != m) pm *= smax[m2];
      for (int e : summands[m]) {
        B[l] += pm * eb[e].h2;
        for (int m2 = 0; m2 < q; ++m2) {
          if (m2 == m) continue;
          double pmm = 1.0;
          for (int m3 = 0; m3 < q; ++m3)
            if (m3 != m && m3 != m2) pmm *= smax[m3];
          for (int e2 : summands[m2]) B[l] += pmm * eb[e].h1 * eb[e2].h1;
        }
      }
    }
  }
  return (A.cwiseAbs() * B).maxCoeff();
}

std::optional<RadiiBounds> radii_pol(const HillModel& model, const Eigen::VectorXd& x) {
  const int n = model.dim();
  const Eigen::MatrixXd Df = model.dx(x);
  if (!Df.allFinite()) return std::nullopt;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(Df);
  if (!lu.isInvertible()) return std::nullopt;
  const Eigen::MatrixXd A = lu.inverse();
  RadiiBounds b;
  b.Y = sup_norm(A * model.eval(x));
  b.Z0 = (Eigen::MatrixXd::Identity(n, n) - A * Df).cwiseAbs().rowwise().sum().maxCoeff();
  if (!(b.Z0 < 1.0)) return std::nullopt;

  auto p = [&](double r, double& z1) {
    z1 = second_derivative_bound(model, A, x, r);
    return z1 * r * r - (1.0 - b.Z0) * r + b.Y;
  };
  double z1 = 0.0;
  double lo = std::max(2.0 * b.Y / (1.0 - b.Z0), 1e-14);
  if (!(p(lo, z1) < 0.0)) return std::nullopt;
  b.Z1 = z1;
  constexpr double kCap = 1e12;
  double hi = lo;
  while (true) {
    hi = lo * 4.0;
    if (hi > kCap) {
      b.r = kInf;
      b.Z1 = 0.0;
      return b;
    }
    if (!(p(hi, z1) < 0.0)) break;
    lo = hi;
    b.Z1 = z1;
  }
  for (int it = 0; it < 60 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (p(mid, z1) < 0.0) {
      lo = mid;
      b.Z1 = z1;
    } else {
      hi = mid;
    }
  }
  b.r = lo;
  return b;
}

Equilibrium describe_equilibrium(const HillModel& model, const Eigen::VectorXd& x) {
  Equilibrium e;
  e.x = x;
  e.residual = sup_norm(model.eval(x));
  if (auto b = radii_pol(model, x)) e.radius = b->r;
  Eigen::EigenSolver<Eigen::MatrixXd> es(model.dx(x), false);
  e.eigen_real = es.eigenvalues().real();
  std::sort(e.eigen_real.data(), e.eigen_real.data() + e.eigen_real.size());
  return e;
}

int EquilibriumSet::stable_count() const {
  return static_cast<int>(std::count_if(points.begin(), points.end(), [](const Equilibrium& e) { return e.stable(); }));
}

EquilibriumSet unique(const HillModel& model, const std::vector<Eigen::VectorXd>& candidates) {
  EquilibriumSet out;
  for (const auto& x : candidates) {
    bool keep = true;
    for (const auto& k : out.points)
      if (sup_norm(x - k.x) < k.radius.value_or(kMergeTolerance)) {
        keep = false;
        break;
      }
    if (!keep) continue;
    Equilibrium e = describe_equilibrium(model, x);
    const double rx = e.radius.value_or(kMergeTolerance);
    for (const auto& k : out.points)
      if (sup_norm(x - k.x) < rx) {
        keep = false;
        break;
      }
    if (!keep) continue;
    if (!e.radius) out.tolerance_fallback = true;
    out.points.push_back(std::move(e));
  }
  return out;
}

EquilibriumSet hill_equilibria(const HillModel& model, const Rectangle& r, int k, int threads) {
  if (k < 1) throw std::invalid_argument("grid density must be at least 1");
  const int n = model.dim();
  if (r.lower.size() != n || r.upper.size() != n) throw std::invalid_argument("rectangle dimension mismatch");
  std::size_t total = 1;
  for (int i = 0; i < n; ++i) total *= static_cast<std::size_t>(k + 1);

  std::vector<std::optional<Eigen::VectorXd>> roots(total);
  parallel_for(total, threads, [&](std::size_t idx) {
    Eigen::VectorXd x0(n);
    std::size_t rem = idx;
    for (int i = 0; i < n; ++i) {
      const double t = static_cast<double>(rem % (k + 1)) / k;
      rem /= (k + 1);
      x0[i] = r.lower[i] + t * (r.upper[i] - r.lower[i]);
    }
    roots[idx] = find_root(model, x0);
  });
  std::vector<Eigen::VectorXd> found;
  for (auto& x : roots)
    if (x) found.push_back(std::move(*x));
  return unique(model, found);
}

EquilibriumSet hill_equilibria(const HillModel& model, int k, int threads) {
  return hill_equilibria(model, root_enclosure(model).rect, k, threads);
}

ToggleCorners toggle_corner_equilibria(const HillModel& model, const Rectangle& r, double degenerate_tol,
                                       double fixed_point_tol) {
  if (model.dim() != 2) throw std::invalid_argument("corner equilibria apply to the two node Toggle Switch");
  const Rectangle image = bootstrap_map(model, r);
  const double gap = std::max(sup_norm(image.lower - r.lower), sup_norm(image.upper - r.upper));
  if (gap > fixed_point_tol) throw std::invalid_argument("rectangle is not a fixed point of the bootstrap map");
  ToggleCorners out;
  if (r.degenerate(degenerate_tol)) {
    out.degenerate = true;
    out.points.push_back(describe_equilibrium(model, (r.lower + r.upper) / 2.0));
    return out;
  }
  Eigen::Vector2d c1(r.lower[0], r.upper[1]), c2(r.upper[0], r.lower[1]);
  out.points.push_back(describe_equilibrium(model, c1));
  out.points.push_back(describe_equilibrium(model, c2));
  return out;
}

nlohmann::json equilibria_to_json(const EquilibriumSet& s) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : s.points) {
    nlohmann::json j;
    j["x"] = std::vector<double>(e.x.data(), e.x.data() + e.x.size());
    j["residual"] = e.residual;
    j["radius"] = e.radius ? nlohmann::json(*e.radius) : nlohmann::json(nullptr);
    j["eigen_real_parts"] = std::vector<double>(e.eigen_real.data(), e.eigen_real.data() + e.eigen_real.size());
    j["stable"] = e.stable();
    arr.push_back(j);
  }
  return arr;
}

}  // namespace hillnet
