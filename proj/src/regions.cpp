#include "hillnet/regions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hillnet {

using nlohmann::json;

double Constraint::slack(std::span<const double> point) const {
  const double l = lhs.eval(point), r = rhs.eval(point);
  return rel == Relation::less ? r - l : l - r;
}

RegionPartition::RegionPartition(std::vector<std::string> variables,
                                 std::vector<SemiAlgebraicRegion> regions,
                                 std::vector<std::pair<int, int>> adjacency,
                                 std::map<int, std::vector<double>> witnesses)
    : variables_(std::move(variables)),
      regions_(std::move(regions)),
      adjacency_(std::move(adjacency)),
      witnesses_(std::move(witnesses)) {
  if (variables_.empty()) throw std::invalid_argument("partition needs at least one variable");
  for (std::size_t a = 0; a < regions_.size(); ++a)
    for (std::size_t b = a + 1; b < regions_.size(); ++b)
      if (regions_[a].id == regions_[b].id)
        throw std::invalid_argument("duplicate region id " + std::to_string(regions_[a].id));
  for (const auto& [i, j] : adjacency_)
    if (index_of(i) < 0 || index_of(j) < 0)
      throw std::invalid_argument("adjacency references unknown region");
  for (const auto& [id, w] : witnesses_) {
    if (index_of(id) < 0) throw std::invalid_argument("witness for unknown region");
    if (static_cast<int>(w.size()) != dim()) throw std::invalid_argument("witness dimension mismatch");
  }
}

int RegionPartition::index_of(int id) const {
  for (std::size_t k = 0; k < regions_.size(); ++k)
    if (regions_[k].id == id) return static_cast<int>(k);
  return -1;
}

Classification RegionPartition::classify(std::span<const double> point) const {
  if (static_cast<int>(point.size()) != dim())
    throw std::invalid_argument("point has dimension " + std::to_string(point.size()) +
                                ", partition has " + std::to_string(dim()));
  for (double v : point)
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("point must be strictly positive");

  Classification out;
  bool on_boundary = false;
  for (const auto& r : regions_) {
    double lo = std::numeric_limits<double>::infinity();
    for (const auto& c : r.constraints) lo = std::min(lo, c.slack(point));
    if (lo > 0.0) {
      if (out.kind == Classification::Kind::region)
        throw std::logic_error("regions " + std::to_string(out.id) + " and " + std::to_string(r.id) +
                               " overlap");
      out.kind = Classification::Kind::region;
      out.id = r.id;
    } else if (lo == 0.0) {
      on_boundary = true;
    }
  }
  if (out.kind != Classification::Kind::region && on_boundary) out.kind = Classification::Kind::boundary;
  return out;
}

namespace {

Constraint make(const std::string& lhs, Relation rel, const std::string& rhs,
                const std::vector<std::string>& vars) {
  return {Expression::parse(lhs, vars), rel, Expression::parse(rhs, vars)};
}

}  // namespace

RegionPartition toggle_partition(bool full_space) {
  std::vector<std::string> vars;
  std::string one1, one2;  // the thresholds scaled by decay: gamma1*theta21, gamma2*theta12
  if (full_space) {
    vars = {"gamma1", "ell12", "delta12", "theta12", "gamma2", "ell21", "delta21", "theta21"};
    one1 = "gamma1*theta21";
    one2 = "gamma2*theta12";
  } else {
    vars = {"ell12", "delta12", "gamma2", "ell21", "delta21"};
    one1 = "1";
    one2 = "gamma2";
  }
  const auto lt = Relation::less;
  // rows: x1 threshold above / inside / below the H12 range
  std::vector<std::vector<Constraint>> rows = {
      {make(one1, lt, "ell12", vars)},
      {make("ell12", lt, one1, vars), make(one1, lt, "ell12 + delta12", vars)},
      {make("ell12 + delta12", lt, one1, vars)}};
  std::vector<std::vector<Constraint>> cols = {
      {make("ell21 + delta21", lt, one2, vars)},
      {make("ell21", lt, one2, vars), make(one2, lt, "ell21 + delta21", vars)},
      {make(one2, lt, "ell21", vars)}};

  std::vector<SemiAlgebraicRegion> regions;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      SemiAlgebraicRegion reg;
      reg.id = 3 * r + c + 1;
      reg.constraints = rows[r];
      reg.constraints.insert(reg.constraints.end(), cols[c].begin(), cols[c].end());
      regions.push_back(std::move(reg));
    }
  std::vector<std::pair<int, int>> adj = {{1, 2}, {1, 4}, {2, 3}, {2, 5}, {3, 6}, {4, 5},
                                          {4, 7}, {5, 6}, {5, 8}, {6, 9}, {7, 8}, {8, 9}};

  std::map<int, std::vector<double>> w;
  const double row_pts[3][2] = {{2.0, 1.0}, {0.5, 1.0}, {0.2, 0.3}};
  const double col_pts[3][2] = {{0.1, 0.2}, {0.5, 1.0}, {2.0, 1.0}};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      if (full_space)
        w[3 * r + c + 1] = {1.0, row_pts[r][0], row_pts[r][1], 1.0, 1.0, col_pts[c][0], col_pts[c][1], 1.0};
      else
        w[3 * r + c + 1] = {row_pts[r][0], row_pts[r][1], 1.0, col_pts[c][0], col_pts[c][1]};
    }
  return RegionPartition(std::move(vars), std::move(regions), std::move(adj), std::move(w));
}

RegionPartition half_line_partition() {
  std::vector<std::string> vars = {"x"};
  std::vector<SemiAlgebraicRegion> regions = {{1, {make("x", Relation::less, "1", vars)}},
                                              {2, {make("x", Relation::greater, "1", vars)}}};
  return RegionPartition(vars, std::move(regions), {{1, 2}}, {{1, {0.5}}, {2, {2.0}}});
}

namespace {

Expression side(const json& j, const std::vector<std::string>& vars) {
  if (j.is_number()) return Expression::constant(j.get<double>());
  if (j.is_string()) return Expression::parse(j.get<std::string>(), vars);
  throw std::invalid_argument("constraint side must be a string or number");
}

}  // namespace

RegionPartition partition_from_json(const json& j) {
  try {
    auto vars = j.at("variables").get<std::vector<std::string>>();
    if (j.contains("dim") && j.at("dim").get<int>() != static_cast<int>(vars.size()))
      throw std::invalid_argument("dim does not match variable count");
    std::vector<SemiAlgebraicRegion> regions;
    for (const auto& jr : j.at("regions")) {
      SemiAlgebraicRegion r;
      r.id = jr.at("id").get<int>();
      for (const auto& jc : jr.at("constraints")) {
        const std::string rel = jc.at("rel").get<std::string>();
        Relation rr;
        if (rel == "<")
          rr = Relation::less;
        else if (rel == ">")
          rr = Relation::greater;
        else
          throw std::invalid_argument("relation must be '<' or '>', got '" + rel + "'");
        r.constraints.push_back({side(jc.at("lhs"), vars), rr, side(jc.at("rhs"), vars)});
      }
      regions.push_back(std::move(r));
    }
    std::vector<std::pair<int, int>> adj;
    if (j.contains("adjacency"))
      for (const auto& e : j.at("adjacency")) adj.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    std::map<int, std::vector<double>> w;
    if (j.contains("witnesses"))
      for (const auto& [k, v] : j.at("witnesses").items()) w[std::stoi(k)] = v.get<std::vector<double>>();
    return RegionPartition(std::move(vars), std::move(regions), std::move(adj), std::move(w));
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("partition schema: ") + e.what());
  }
}

json partition_to_json(const RegionPartition& p) {
  json regions = json::array();
  for (const auto& r : p.regions()) {
    json cs = json::array();
    for (const auto& c : r.constraints)
      cs.push_back({{"lhs", c.lhs.text()}, {"rel", c.rel == Relation::less ? "<" : ">"}, {"rhs", c.rhs.text()}});
    regions.push_back({{"id", r.id}, {"constraints", cs}});
  }
  json adj = json::array();
  for (const auto& [a, b] : p.adjacency()) adj.push_back({a, b});
  json w = json::object();
  for (const auto& [id, pt] : p.witnesses()) w[std::to_string(id)] = pt;
  return {{"dim", p.dim()}, {"variables", p.variables()}, {"regions", regions}, {"adjacency", adj},
          {"witnesses", w}};
}

std::vector<std::pair<int, int>> saddle_node_edges(const RegionPartition& partition,
                                                   const std::map<int, int>& stable_counts) {
  std::vector<std::pair<int, int>> out;
  for (const auto& [a, b] : partition.adjacency()) {
    auto ia = stable_counts.find(a), ib = stable_counts.find(b);
    if (ia == stable_counts.end() || ib == stable_counts.end())
      throw std::invalid_argument("stable count missing for an adjacent region");
    if (std::abs(ia->second - ib->second) != 1) continue;
    if (ia->second > ib->second)
      out.emplace_back(a, b);
    else
      out.emplace_back(b, a);
  }
  return out;
}

}  // namespace hillnet
