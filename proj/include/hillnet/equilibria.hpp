#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hillnet/hill_model.hpp"

namespace hillnet {

struct Rectangle {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  double width() const { return (upper - lower).maxCoeff(); }
  bool degenerate(double tol = 0.0) const { return width() <= tol; }
  bool contains(const Eigen::VectorXd& x, double tol = 0.0) const;
};

/// Splits each node's interaction into the product of its all-activating
/// summands (g+) and all-repressing summands (g-). Throws
/// std::invalid_argument when a summand mixes signs.
void require_monotone_factorization(const HillModel& model);

/// Phi(V(a, b)) = V(g+(a) g-(b) / gamma, g+(b) g-(a) / gamma), componentwise.
Rectangle bootstrap_map(const HillModel& model, const Rectangle& r);

/// Starting rectangle: lower_i = g+_i(0) liminf g-_i / gamma_i,
/// upper_i = limsup g+_i g-_i(0) / gamma_i.
Rectangle canonical_start(const HillModel& model);

struct EnclosureResult {
  Rectangle rect;
  int iterations = 0;
  bool converged = false;  // false: the cap was hit; rect is still an enclosure
};

/// Iterates the bootstrap map from the canonical start until successive
/// rectangles differ by less than eps in the sup norm.
EnclosureResult root_enclosure(const HillModel& model, double eps = 1e-10, int max_iter = 100000);

struct NewtonOptions {
  double tol = 1e-12;  // on |f|_inf
  int max_iter = 100;
  int max_halvings = 30;
};

/// Damped Newton with the analytic Jacobian, iterates clamped to x >= 0.
/// Returns nullopt on a singular Jacobian, a failed line search or the
/// iteration cap.
std::optional<Eigen::VectorXd> find_root(const HillModel& model, const Eigen::VectorXd& x0,
                                         const NewtonOptions& opt = {});

struct RadiiBounds {
  double Y = 0.0;
  double Z0 = 0.0;
  double Z1 = 0.0;  // bound on |A D2f| over the ball of radius r
  double r = 0.0;   // +inf when Z1 vanishes on every ball
};

/// Largest root (1 - Z0 + sqrt((1 - Z0)^2 - 4 Z1 Y)) / (2 Z1) of
/// Z1 r^2 - (1 - Z0) r + Y. nullopt when Z0 >= 1 or the discriminant is
/// negative; +inf when Z1 == 0.
std::optional<double> radii_root(double Y, double Z0, double Z1);

/// Sup-norm bound on |A D2f(y)| for y in the box |y - x|_inf <= r, y >= 0.
/// Per-edge suprema of |H'| and |H''| are taken over sample points that
/// include the interval ends and a dense cluster around the threshold.
double second_derivative_bound(const HillModel& model, const Eigen::MatrixXd& A,
                               const Eigen::VectorXd& x, double r);

/// A = numerical inverse of Df(x), Y = |A f(x)|, Z0 = |I - A Df(x)|, all in
/// the sup norm. Returns the largest r with Z1(r) r^2 - (1 - Z0) r + Y < 0,
/// where Z1(r) = second_derivative_bound(.., r). nullopt when Df is singular,
/// Z0 >= 1, or no such r exists.
std::optional<RadiiBounds> radii_pol(const HillModel& model, const Eigen::VectorXd& x);

struct Equilibrium {
  Eigen::VectorXd x;
  double residual = 0.0;
  std::optional<double> radius;
  Eigen::VectorXd eigen_real;  // real parts of the eigenvalues of Df(x), ascending

  bool stable() const { return eigen_real.size() > 0 && eigen_real.maxCoeff() < 0.0; }
};

Equilibrium describe_equilibrium(const HillModel& model, const Eigen::VectorXd& x);

struct EquilibriumSet {
  std::vector<Equilibrium> points;
  bool tolerance_fallback = false;  // some radius failed and the fixed merge tolerance was used

  int size() const { return static_cast<int>(points.size()); }
  int stable_count() const;
};

inline constexpr double kMergeTolerance = 1e-8;

/// Scans in order and drops any candidate within max(r_x, r_y) of an
/// earlier survivor. A failed radius falls back to kMergeTolerance.
/// Radii are computed lazily, so duplicates of a survivor cost nothing.
EquilibriumSet unique(const HillModel& model, const std::vector<Eigen::VectorXd>& candidates);

/// Newton from the (k+1)^N uniform grid over r, then unique().
EquilibriumSet hill_equilibria(const HillModel& model, const Rectangle& r, int k, int threads = 1);

/// Same, over the rectangle from root_enclosure (or its last iterate).
EquilibriumSet hill_equilibria(const HillModel& model, int k, int threads = 1);

struct ToggleCorners {
  bool degenerate = false;
  std::vector<Equilibrium> points;  // one point, or the corners (a1, b2) and (b1, a2)
};

/// For the reduced Toggle Switch: a converged enclosure is either a point,
/// the unique equilibrium, or has its two off-diagonal corners as stable
/// equilibria. Throws std::invalid_argument if r is not a fixed point of
/// the bootstrap map to fixed_point_tol.
ToggleCorners toggle_corner_equilibria(const HillModel& model, const Rectangle& r,
                                       double degenerate_tol = 1e-7, double fixed_point_tol = 1e-8);

nlohmann::json equilibria_to_json(const EquilibriumSet& s);

}  // namespace hillnet
