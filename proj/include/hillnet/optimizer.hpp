#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "hillnet/regions.hpp"
#include "hillnet/sampler.hpp"

namespace hillnet {

struct NelderMeadConfig {
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  double x_tol = 1e-6;
  double f_tol = 1e-10;
  int max_iter = 1000;
  double init_step = 0.5;

  void validate() const;
};

struct TraceEntry {
  int iteration = 0;
  Eigen::VectorXd best_x;
  double best_f = 0.0;
  long evaluations = 0;
};

enum class StopReason { x_tol, f_tol, max_iter };

struct NelderMeadResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int iterations = 0;
  long evaluations = 0;
  StopReason stop = StopReason::max_iter;
  double diameter = 0.0;
  std::vector<TraceEntry> trace;  // one entry per iteration, including the initial simplex

  bool converged() const { return stop != StopReason::max_iter; }
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

/// Minimizes `objective` from the simplex x0, x0 + init_step * e_i. Stops when
/// the simplex diameter (max sup-norm distance to the best vertex) drops
/// below x_tol, the value spread below f_tol, or after max_iter iterations.
/// Throws std::invalid_argument if the initial simplex has a non-finite value;
/// later non-finite values rank as +inf.
NelderMeadResult nelder_mead(const Objective& objective, const Eigen::VectorXd& x0,
                             const NelderMeadConfig& cfg);

/// v -> 1 - score(count(sample(unpack(family, v), k, seed))). The seed is
/// fixed, so the objective is a deterministic function of v. Vectors whose
/// unpacked parameters overflow evaluate to +inf.
Objective score_objective(Family family, const RegionPartition& partition, int k, std::uint64_t seed);

/// Score of an already built distribution with a fixed seed.
double score_distribution(const Distribution& dist, const RegionPartition& partition, int k,
                          std::uint64_t seed, int threads = 1);

struct RestartResult {
  Eigen::VectorXd start;
  double start_score = 0.0;
  Eigen::VectorXd best;
  double best_score = 0.0;
  NelderMeadResult run;
};

struct NoiseCheck {
  std::vector<double> fresh_scores;
  double mean = 0.0;
  double stddev = 0.0;
  bool noisy = false;
};

struct OptimizationResult {
  Family family = Family::fisher;
  Eigen::VectorXd best_coeffs;  // search-space vector
  Distribution best;
  double best_score = 0.0;
  int best_restart = 0;
  double baseline_score = 0.0;  // all-zero search vector: Fisher(1,...,1) or N(0, I)^2
  std::vector<RestartResult> restarts;
  NoiseCheck noise;
  CountVector best_counts;
};

struct OptimizeOptions {
  int k = 10000;
  int restarts = 5;
  std::uint64_t seed = 0;
  int threads = 1;
  double start_radius = 2.0;  // starts drawn uniformly from [-r, r]^m
  int noise_seeds = 10;
  double noise_stddev = 0.05;
  double noise_gap = 0.1;
  NelderMeadConfig nm{};
};

/// Nelder-Mead on score_objective from `restarts` random starts, run
/// concurrently and merged by restart index. The best restart (ties to the
/// lowest index) is rescored with fresh seeds to flag seed-specific optima.
OptimizationResult optimize_distribution(Family family, const RegionPartition& partition,
                                         const OptimizeOptions& opt);

}  // namespace hillnet
