#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hillnet/expression.hpp"

namespace hillnet {

enum class Relation { less, greater };

/// Strict inequality lhs < rhs or lhs > rhs.
struct Constraint {
  Expression lhs;
  Relation rel;
  Expression rhs;

  /// Positive when the strict inequality holds, zero on its boundary.
  double slack(std::span<const double> point) const;
};

struct SemiAlgebraicRegion {
  int id = 0;
  std::vector<Constraint> constraints;
};

struct Classification {
  enum class Kind { region, boundary, outside };
  Kind kind = Kind::outside;
  int id = 0;  // meaningful for Kind::region

  bool is_region() const { return kind == Kind::region; }
};

class RegionPartition {
 public:
  RegionPartition(std::vector<std::string> variables, std::vector<SemiAlgebraicRegion> regions,
                  std::vector<std::pair<int, int>> adjacency,
                  std::map<int, std::vector<double>> witnesses = {});

  int dim() const { return static_cast<int>(variables_.size()); }
  int size() const { return static_cast<int>(regions_.size()); }
  const std::vector<std::string>& variables() const { return variables_; }
  const std::vector<SemiAlgebraicRegion>& regions() const { return regions_; }
  const std::vector<std::pair<int, int>>& adjacency() const { return adjacency_; }
  const std::map<int, std::vector<double>>& witnesses() const { return witnesses_; }

  /// Position of a region id in regions(), or -1.
  int index_of(int id) const;

  /// The unique region whose constraints hold strictly. `boundary` when no
  /// region holds strictly but one holds with some constraint at equality.
  /// Throws std::invalid_argument for non-positive points or a dimension
  /// mismatch and std::logic_error if two regions overlap at the point.
  Classification classify(std::span<const double> point) const;

 private:
  std::vector<std::string> variables_;
  std::vector<SemiAlgebraicRegion> regions_;
  std::vector<std::pair<int, int>> adjacency_;
  std::map<int, std::vector<double>> witnesses_;
};

/// The nine Toggle Switch regions in reduced coordinates
/// (ell12, delta12, gamma2, ell21, delta21), or with full_space in
/// (gamma1, ell12, delta12, theta12, gamma2, ell21, delta21, theta21).
RegionPartition toggle_partition(bool full_space = false);

/// Single-variable partition {x < 1}, {x > 1}; small enough for tests.
RegionPartition half_line_partition();

/// Schema: {dim, variables:[..], regions:[{id, constraints:[{lhs, rel, rhs}]}],
/// adjacency:[[i,j]], witnesses?:{id:[..]}}. lhs/rhs are strings or numbers.
RegionPartition partition_from_json(const nlohmann::json& j);
nlohmann::json partition_to_json(const RegionPartition& p);

/// Adjacent pairs whose stable counts differ by exactly one, oriented
/// (higher count, lower count). Throws if a region lacks a count.
std::vector<std::pair<int, int>> saddle_node_edges(const RegionPartition& partition,
                                                   const std::map<int, int>& stable_counts);

}  // namespace hillnet
