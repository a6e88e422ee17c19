#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hillnet/equilibria.hpp"
#include "hillnet/hill_model.hpp"

namespace hillnet {

/// Value and derivatives of a one-parameter family g(x, s).
struct FamilyJet {
  Eigen::VectorXd g;
  Eigen::MatrixXd dx;
  std::vector<Eigen::MatrixXd> dxx;  // dxx[i](j, k)
  Eigen::VectorXd ds;
  Eigen::MatrixXd dxds;
};

class ParameterFamily {
 public:
  virtual ~ParameterFamily() = default;
  virtual int dim() const = 0;
  virtual FamilyJet jet(const Eigen::VectorXd& x, double s) const = 0;
  /// Whether the state is confined to the nonnegative orthant.
  virtual bool nonnegative_state() const { return true; }
  /// Whether (x, s) lies in the domain where jet() is defined.
  virtual bool admissible(const Eigen::VectorXd& x, double s) const {
    (void)s;
    return !nonnegative_state() || (x.array() >= 0.0).all();
  }
};

/// Hill model with every non-exponent parameter fixed and d = 1 + 99 s.
class HillPath : public ParameterFamily {
 public:
  explicit HillPath(HillModel base);

  static double exponent(double s) { return 1.0 + 99.0 * s; }
  HillModel at(double s) const { return base_.with_hill(exponent(s)); }
  const HillModel& base() const { return base_; }

  int dim() const override { return base_.dim(); }
  FamilyJet jet(const Eigen::VectorXd& x, double s) const override;
  bool admissible(const Eigen::VectorXd& x, double s) const override {
    return exponent(s) >= 0.0 && (x.array() >= 0.0).all();
  }

 private:
  HillModel base_;
};

/// G(u) = (g(x, s); Dx g(x, s) v; v.v - 1) with u = (x, v, s).
Eigen::VectorXd saddle_map(const ParameterFamily& family, const Eigen::VectorXd& u);
Eigen::MatrixXd saddle_map_jacobian(const ParameterFamily& family, const Eigen::VectorXd& u);

/// Equilibrium sets along a Hill path, cached by s.
class PathCounter {
 public:
  PathCounter(const HillPath& path, int grid_k, int threads = 1)
      : path_(path), k_(grid_k), threads_(threads) {}

  const EquilibriumSet& at(double s);
  int count(double s) { return at(s).size(); }
  std::size_t evaluations() const { return cache_.size(); }
  const HillPath& path() const { return path_; }

 private:
  const HillPath& path_;
  int k_;
  int threads_;
  std::map<double, EquilibriumSet> cache_;
};

/// Counts at s_i = i / I, i = 0..I.
std::vector<int> count_along_path(PathCounter& counter, int subdivisions);

struct SaddleCandidate {
  Eigen::VectorXd x;
  Eigen::VectorXd v;
  double s = 0.0;
};

struct ChangeInterval {
  double lo = 0.0;
  double hi = 0.0;
  int count_lo = 0;
  int count_hi = 0;
};

/// Refines [lo, hi] (whose endpoint counts differ) down to width <= tol_s.
/// Where both halves show a change, both are followed, so several changes
/// inside one subinterval come back as separate intervals (at most
/// max_intervals).
std::vector<ChangeInterval> bisect_change(PathCounter& counter, double lo, double hi, double tol_s,
                                          int max_intervals = 16);

/// Starting guesses for an interval, in order of preference: on the side
/// with more equilibria, the member of the closest pair with the smallest
/// |eigenvalue|, then the other member, then the pair midpoint. v is the
/// unit eigenvector for the smallest |eigenvalue| with its first nonzero
/// component positive.
std::vector<SaddleCandidate> saddle_candidates(PathCounter& counter, const ChangeInterval& interval);

/// Kernel direction guess at x for family parameter s.
Eigen::VectorXd kernel_guess(const ParameterFamily& family, const Eigen::VectorXd& x, double s);

struct SaddleOptions {
  double tol = 1e-10;           // on |G|_inf
  int max_iter = 50;
  double max_condition = 1e12;  // on D_u G
  double hyperbolic_tol = 1e-8;  // |Re| of the remaining eigenvalues
};

struct SaddleResult {
  bool verified = false;
  std::string failure;  // empty when verified
  Eigen::VectorXd x;
  Eigen::VectorXd v;
  double s = 0.0;
  double residual = 0.0;  // |G|_inf
  double condition = 0.0;
  double min_abs_eigenvalue = 0.0;
  int iterations = 0;
};

/// Newton on G from the candidate, then the regularity and hyperbolicity
/// checks.
SaddleResult solve_saddle(const ParameterFamily& family, const SaddleCandidate& candidate,
                          const SaddleOptions& opt = {});

struct BadCandidate {
  ChangeInterval interval;
  std::string reason;
};

enum class OutcomeKind { none, one, multiple, bad };
std::string outcome_name(OutcomeKind k);
OutcomeKind parse_outcome(const std::string& s);

struct SaddleOutcome {
  std::vector<SaddleResult> saddles;  // verified, increasing in s
  std::vector<BadCandidate> bad_candidates;
  std::vector<int> counts;  // along the coarse subdivision
  std::vector<ChangeInterval> intervals;  // every count change examined
  int verified_intervals = 0;             // intervals that produced a verified saddle

  OutcomeKind kind() const;
  bool multiple() const { return saddles.size() >= 2; }
};

struct PipelineConfig {
  int subdivisions = 100;
  double tol_s = 1e-6;
  int grid_k = 4;
  int max_intervals = 16;
  int threads = 1;  // inside one parameter
  SaddleOptions saddle{};
};

/// Subdivide, bisect every count change, solve each candidate.
SaddleOutcome classify_parameter(const HillPath& path, const PipelineConfig& cfg = {});

nlohmann::json saddle_outcome_to_json(const SaddleOutcome& o);

}  // namespace hillnet
