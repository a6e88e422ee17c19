#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hillnet/regions.hpp"

namespace hillnet {

/// Product of Fisher F(d_1^j, d_2^j) laws, coeffs = (d_1^1, d_2^1, ..., d_1^N, d_2^N).
struct FisherProduct {
  Eigen::VectorXd coeffs;

  int dim() const { return static_cast<int>(coeffs.size() / 2); }
  void validate() const;
};

/// Componentwise square of z ~ N(mean, chol chol^T).
struct SquaredGaussian {
  Eigen::VectorXd mean;
  Eigen::MatrixXd chol;  // lower triangular, positive diagonal

  int dim() const { return static_cast<int>(mean.size()); }
  void validate() const;
};

using Distribution = std::variant<FisherProduct, SquaredGaussian>;

enum class Family { fisher, squared_gaussian };

int distribution_dim(const Distribution& d);
Family family_of(const Distribution& d);
Family parse_family(const std::string& name);
std::string family_name(Family f);

using Batch = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// k iid draws, one per row. Draws are produced in fixed chunks, each with its
/// own substream of `seed`, so the batch is identical for any thread count.
Batch sample(const Distribution& dist, int k, std::uint64_t seed, int threads = 1);

inline constexpr int kSampleChunk = 1024;

struct CountVector {
  std::vector<long> counts;  // aligned with partition.regions()
  long k = 0;
  long boundary = 0;
  long outside = 0;  // no region, or a coordinate not strictly positive and finite
};

CountVector count(const Batch& batch, const RegionPartition& partition);

/// min c_i / max c_i, or 0 when every count is zero.
double score(const CountVector& c);
std::vector<double> frequencies(const CountVector& c);

struct LabeledBatch {
  Batch points;
  std::vector<Classification> labels;
};

/// Rejection sampling: keeps the first n_in draws that land in region_id and
/// the first n_out that land in another region (boundary and unclassified
/// draws are skipped). Draws come from consecutive substreams of `seed`, in
/// order. Throws std::runtime_error if max_draws is exhausted.
LabeledBatch sample_balanced(const Distribution& dist, const RegionPartition& partition, int region_id,
                             int n_in, int n_out, std::uint64_t seed, long max_draws = 100000000);

/// Length of the unconstrained search vector for a family in dimension n:
/// 2n for Fisher, n + n(n+1)/2 for the squared Gaussian.
int n_coefficients(Family family, int n);

/// Search vector -> distribution. Fisher takes exp of every entry; the
/// squared Gaussian reads the mean, then the lower triangle row by row with
/// the diagonal passed through exp.
Distribution unpack(Family family, std::span<const double> v, int n);
Eigen::VectorXd pack(const Distribution& d);

nlohmann::json distribution_to_json(const Distribution& d);
Distribution distribution_from_json(const nlohmann::json& j);

}  // namespace hillnet
