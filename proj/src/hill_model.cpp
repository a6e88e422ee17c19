#include "hillnet/hill_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hillnet {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Leading term of c * x^p as x -> 0+.
double leading(double c, double p) {
  if (c == 0.0 || p > 0.0) return 0.0;
  if (p == 0.0) return c;
  return std::copysign(kInf, c);
}

// Activating fraction u^d / (1 + u^d), u = x / theta, with derivatives.
HillJet activating_fraction(double x, double theta, double d) {
  HillJet j;
  if (x == 0.0) {
    j.value = d > 0.0 ? 0.0 : 0.5;
    // u^d - u^{2d} + ...
    j.dx = (leading(d, d - 1.0) + leading(-2.0 * d, 2.0 * d - 1.0)) / theta;
    j.dxx = (leading(d * (d - 1.0), d - 2.0) + leading(-2.0 * d * (2.0 * d - 1.0), 2.0 * d - 2.0)) /
            (theta * theta);
    j.dd = d > 0.0 ? 0.0 : -kInf;
    if (d > 1.0)
      j.dxdd = 0.0;
    else
      j.dxdd = d == 0.0 ? kInf : -kInf;
    return j;
  }
  const double lu = std::log(x / theta);
  const double t = d * lu;
  const double e = std::exp(-std::abs(t));
  const double sigma = t >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
  const double q = e / ((1.0 + e) * (1.0 + e));  // sigma (1 - sigma)
  const double skew = t >= 0.0 ? -(1.0 - e) / (1.0 + e) : (1.0 - e) / (1.0 + e);  // 1 - 2 sigma
  j.value = sigma;
  j.dx = q * d / x;
  j.dxx = q * d / (x * x) * (d * skew - 1.0);
  j.dd = q * lu;
  j.dxdd = q / x * (1.0 + d * skew * lu);
  return j;
}

}  // namespace

void validate(const HillEdgeParams& p) {
  if (!(p.ell > 0.0) || !(p.delta > 0.0) || !(p.theta > 0.0))
    throw std::invalid_argument("Hill response requires ell, delta, theta > 0");
  if (!(p.hill >= 0.0) || !std::isfinite(p.hill))
    throw std::invalid_argument("Hill exponent must be finite and nonnegative");
  if (!std::isfinite(p.ell) || !std::isfinite(p.delta) || !std::isfinite(p.theta))
    throw std::invalid_argument("Hill response parameters must be finite");
}

HillJet hill_response_jet(double x, EdgeSign sign, const HillEdgeParams& p) {
  if (!(x >= 0.0)) throw std::domain_error("Hill response evaluated at negative x");
  HillJet f = activating_fraction(x, p.theta, p.hill);
  if (sign == EdgeSign::repressing) {
    f.value = 1.0 - f.value;
    if (x > 0.0) {
      // recompute 1 - sigma directly to keep precision far in the tail
      const double t = p.hill * std::log(x / p.theta);
      const double e = std::exp(-std::abs(t));
      f.value = t >= 0.0 ? e / (1.0 + e) : 1.0 / (1.0 + e);
    }
    f.dx = -f.dx;
    f.dxx = -f.dxx;
    f.dd = -f.dd;
    f.dxdd = -f.dxdd;
  }
  return {p.ell + p.delta * f.value, p.delta * f.dx, p.delta * f.dxx, p.delta * f.dd,
          p.delta * f.dxdd};
}

double eval_hill_response(double x, EdgeSign sign, const HillEdgeParams& p) {
  return hill_response_jet(x, sign, p).value;
}

NetworkTopology::NetworkTopology(int n_nodes, std::vector<Edge> edges,
                                 const std::vector<std::vector<std::vector<int>>>& interactions)
    : n_nodes_(n_nodes), edges_(std::move(edges)) {
  if (n_nodes < 1) throw std::invalid_argument("network needs at least one node");
  for (const Edge& e : edges_) {
    if (e.source < 0 || e.source >= n_nodes || e.target < 0 || e.target >= n_nodes)
      throw std::invalid_argument("edge endpoint out of range");
  }
  std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
    return a.target != b.target ? a.target < b.target : a.source < b.source;
  });
  for (std::size_t k = 1; k < edges_.size(); ++k) {
    if (edges_[k].target == edges_[k - 1].target && edges_[k].source == edges_[k - 1].source)
      throw std::invalid_argument("duplicate edge " + std::to_string(edges_[k].source) + " -> " +
                                  std::to_string(edges_[k].target));
  }
  if (static_cast<int>(interactions.size()) != n_nodes)
    throw std::invalid_argument("one interaction per node required");

  summands_.resize(n_nodes);
  for (int i = 0; i < n_nodes; ++i) {
    std::vector<int> seen;
    for (const auto& summand : interactions[i]) {
      if (summand.empty()) throw std::invalid_argument("empty summand in interaction");
      std::vector<int> idx;
      for (int src : summand) {
        const int e = edge_index(src, i);
        if (e < 0)
          throw std::invalid_argument("interaction of node " + std::to_string(i) +
                                      " references missing edge from " + std::to_string(src));
        if (std::find(seen.begin(), seen.end(), e) != seen.end())
          throw std::invalid_argument("edge used twice in interaction of node " + std::to_string(i));
        seen.push_back(e);
        idx.push_back(e);
      }
      summands_[i].push_back(std::move(idx));
    }
    int in_degree = 0;
    for (const Edge& e : edges_) in_degree += e.target == i;
    if (in_degree == 0)
      throw std::invalid_argument("node " + std::to_string(i) + " has no regulating edge");
    if (static_cast<int>(seen.size()) != in_degree)
      throw std::invalid_argument("interaction of node " + std::to_string(i) +
                                  " does not cover every in-edge");
  }
}

std::vector<std::vector<int>> NetworkTopology::interaction(int node) const {
  std::vector<std::vector<int>> out;
  for (const auto& summand : summands_.at(node)) {
    std::vector<int> s;
    for (int e : summand) s.push_back(edges_[e].source);
    out.push_back(std::move(s));
  }
  return out;
}

int NetworkTopology::edge_index(int source, int target) const {
  for (std::size_t k = 0; k < edges_.size(); ++k)
    if (edges_[k].source == source && edges_[k].target == target) return static_cast<int>(k);
  return -1;
}

Eigen::VectorXd ParameterVector::flat() const {
  const Eigen::Index n = gamma.size(), e = ell.size();
  Eigen::VectorXd v(n + 4 * e);
  v << gamma, ell, delta, theta, hill;
  return v;
}

ParameterVector ParameterVector::from_flat(std::span<const double> values, int n_nodes,
                                           int n_edges) {
  if (static_cast<int>(values.size()) != n_nodes + 4 * n_edges)
    throw std::invalid_argument("parameter vector length must be N + 4E = " +
                                std::to_string(n_nodes + 4 * n_edges));
  Eigen::Map<const Eigen::VectorXd> v(values.data(), static_cast<Eigen::Index>(values.size()));
  ParameterVector p;
  p.gamma = v.head(n_nodes);
  p.ell = v.segment(n_nodes, n_edges);
  p.delta = v.segment(n_nodes + n_edges, n_edges);
  p.theta = v.segment(n_nodes + 2 * n_edges, n_edges);
  p.hill = v.segment(n_nodes + 3 * n_edges, n_edges);
  return p;
}

HillModel::HillModel(NetworkTopology topology, Eigen::VectorXd gamma,
                     std::vector<HillEdgeParams> edge_params, bool shared_hill)
    : topology_(std::move(topology)),
      gamma_(std::move(gamma)),
      edge_params_(std::move(edge_params)),
      shared_hill_(shared_hill) {
  if (gamma_.size() != topology_.n_nodes())
    throw std::invalid_argument("gamma length does not match node count");
  if (static_cast<int>(edge_params_.size()) != topology_.n_edges())
    throw std::invalid_argument("edge parameter count does not match edge count");
  for (Eigen::Index i = 0; i < gamma_.size(); ++i)
    if (!(gamma_[i] > 0.0) || !std::isfinite(gamma_[i]))
      throw std::invalid_argument("decay rates must be positive");
  for (const auto& p : edge_params_) validate(p);
  if (shared_hill_) {
    for (const auto& p : edge_params_)
      if (p.hill != edge_params_.front().hill)
        throw std::invalid_argument("shared exponent mode requires equal exponents");
  }
}

HillModel HillModel::from_parameters(NetworkTopology topology, const ParameterVector& params,
                                     bool shared_hill) {
  const int e = topology.n_edges();
  if (params.ell.size() != e || params.delta.size() != e || params.theta.size() != e ||
      params.hill.size() != e)
    throw std::invalid_argument("edge parameter blocks must have length E");
  std::vector<HillEdgeParams> ep(e);
  for (int k = 0; k < e; ++k)
    ep[k] = {params.ell[k], params.delta[k], params.theta[k], params.hill[k]};
  return HillModel(std::move(topology), params.gamma, std::move(ep), shared_hill);
}

double HillModel::hill() const {
  if (!shared_hill_) throw std::logic_error("model does not use a shared exponent");
  return edge_params_.front().hill;
}

HillModel HillModel::with_hill(double d) const {
  HillModel m = *this;
  for (auto& p : m.edge_params_) p.hill = d;
  m.shared_hill_ = true;
  for (const auto& p : m.edge_params_) validate(p);
  return m;
}

ParameterVector HillModel::parameters() const {
  const int e = n_edges();
  ParameterVector p;
  p.gamma = gamma_;
  p.ell.resize(e);
  p.delta.resize(e);
  p.theta.resize(e);
  p.hill.resize(e);
  for (int k = 0; k < e; ++k) {
    p.ell[k] = edge_params_[k].ell;
    p.delta[k] = edge_params_[k].delta;
    p.theta[k] = edge_params_[k].theta;
    p.hill[k] = edge_params_[k].hill;
  }
  return p;
}

int HillModel::n_free_parameters() const {
  return dim() + 3 * n_edges() + (shared_hill_ ? 1 : n_edges());
}

Eigen::VectorXd HillModel::free_parameters() const {
  const Eigen::VectorXd full = parameters().flat();
  if (!shared_hill_) return full;
  Eigen::VectorXd v(n_free_parameters());
  v << full.head(dim() + 3 * n_edges()), hill();
  return v;
}

HillModel HillModel::with_free_parameters(std::span<const double> values) const {
  if (static_cast<int>(values.size()) != n_free_parameters())
    throw std::invalid_argument("expected " + std::to_string(n_free_parameters()) +
                                " free parameters, got " + std::to_string(values.size()));
  const int n = dim(), e = n_edges();
  std::vector<double> full(values.begin(), values.end());
  if (shared_hill_) {
    const double d = full.back();
    full.pop_back();
    full.insert(full.end(), e, d);
  }
  return from_parameters(topology_, ParameterVector::from_flat(full, n, e), shared_hill_);
}

void HillModel::check_state(const Eigen::VectorXd& x) const {
  if (x.size() != dim())
    throw std::invalid_argument("state has dimension " + std::to_string(x.size()) +
                                ", model has " + std::to_string(dim()));
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (!(x[i] >= 0.0)) throw std::domain_error("state must be componentwise nonnegative");
}

Eigen::VectorXd HillModel::eval(const Eigen::VectorXd& x) const {
  check_state(x);
  const auto& edges = topology_.edges();
  Eigen::VectorXd f(dim());
  for (int i = 0; i < dim(); ++i) {
    double p = 1.0;
    for (const auto& summand : topology_.summands(i)) {
      double s = 0.0;
      for (int e : summand)
        s += eval_hill_response(x[edges[e].source], edges[e].sign, edge_params_[e]);
      p *= s;
    }
    f[i] = -gamma_[i] * x[i] + p;
  }
  return f;
}

Eigen::MatrixXd HillModel::dx(const Eigen::VectorXd& x) const {
  check_state(x);
  const int n = dim();
  const auto& edges = topology_.edges();
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  std::vector<HillJet> jet(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e)
    jet[e] = hill_response_jet(x[edges[e].source], edges[e].sign, edge_params_[e]);
  for (int i = 0; i < n; ++i) {
    const auto& summands = topology_.summands(i);
    const int q = static_cast<int>(summands.size());
    std::vector<double> s(q, 0.0);
    for (int m = 0; m < q; ++m)
      for (int e : summands[m]) s[m] += jet[e].value;
    J(i, i) -= gamma_[i];
    for (int m = 0; m < q; ++m) {
      double pm = 1.0;
      for (int m2 = 0; m2 < q; ++m2)
        if (m2 != m) pm *= s[m2];
      for (int e : summands[m]) J(i, edges[e].source) += pm * jet[e].dx;
    }
  }
  return J;
}

Derivatives HillModel::derivatives(const Eigen::VectorXd& x) const {
  check_state(x);
  const int n = dim();
  const auto& edges = topology_.edges();
  std::vector<HillJet> jet(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e)
    jet[e] = hill_response_jet(x[edges[e].source], edges[e].sign, edge_params_[e]);

  Derivatives out;
  out.dx = Eigen::MatrixXd::Zero(n, n);
  out.dxx.assign(n, Eigen::MatrixXd::Zero(n, n));
  out.dd = Eigen::VectorXd::Zero(n);
  out.dxdd = Eigen::MatrixXd::Zero(n, n);

  for (int i = 0; i < n; ++i) {
    const auto& summands = topology_.summands(i);
    const int q = static_cast<int>(summands.size());
    std::vector<double> s(q, 0.0), sd(q, 0.0);
    for (int m = 0; m < q; ++m)
      for (int e : summands[m]) {
        s[m] += jet[e].value;
        sd[m] += jet[e].dd;
      }
    auto prod_except = [&](int a, int b) {
      double p = 1.0;
      for (int m = 0; m < q; ++m)
        if (m != a && m != b) p *= s[m];
      return p;
    };

    out.dx(i, i) -= gamma_[i];
    for (int m = 0; m < q; ++m) {
      const double pm = prod_except(m, -1);
      out.dd[i] += pm * sd[m];
      for (int e : summands[m]) {
        const int j = edges[e].source;
        out.dx(i, j) += pm * jet[e].dx;
        out.dxx[i](j, j) += pm * jet[e].dxx;
        out.dxdd(i, j) += pm * jet[e].dxdd;
        for (int m2 = 0; m2 < q; ++m2) {
          if (m2 == m) continue;
          const double pmm = prod_except(m, m2);
          out.dxdd(i, j) += jet[e].dx * pmm * sd[m2];
          for (int e2 : summands[m2]) out.dxx[i](j, edges[e2].source) += pmm * jet[e].dx * jet[e2].dx;
        }
      }
    }
  }
  return out;
}

ReducedToggleParams ReducedToggleParams::from_combinatorial(std::span<const double> xi, double d) {
  if (xi.size() != 5) throw std::invalid_argument("reduced Toggle parameters have 5 entries");
  return {xi[0], xi[1], xi[2], xi[3], xi[4], d};
}

NetworkTopology toggle_switch_topology() {
  return NetworkTopology(2, {{1, 0, EdgeSign::repressing}, {0, 1, EdgeSign::repressing}},
                         {{{1}}, {{0}}});
}

NetworkTopology emt_topology() {
  const auto r = EdgeSign::repressing;
  const auto a = EdgeSign::activating;
  std::vector<Edge> edges = {{1, 0, r}, {3, 0, r}, {2, 1, r}, {4, 1, r}, {0, 2, a}, {5, 2, r},
                             {4, 3, r}, {1, 4, r}, {2, 4, a}, {3, 4, r}, {2, 5, r}, {4, 5, r}};
  std::vector<std::vector<std::vector<int>>> inter = {
      {{1}, {3}}, {{2}, {4}}, {{0}, {5}}, {{4}}, {{1}, {2}, {3}}, {{2}, {4}}};
  return NetworkTopology(6, std::move(edges), inter);
}

HillModel builtin_toggle_switch() {
  return HillModel(toggle_switch_topology(), Eigen::VectorXd::Ones(2),
                   std::vector<HillEdgeParams>(2), false);
}

HillModel builtin_toggle_switch(const ParameterVector& params) {
  return HillModel::from_parameters(toggle_switch_topology(), params, false);
}

HillModel builtin_reduced_toggle(const ReducedToggleParams& p) {
  Eigen::VectorXd gamma(2);
  gamma << 1.0, p.gamma2;
  // edge 0 is 1 -> 0 (H_{1,2}), edge 1 is 0 -> 1 (H_{2,1})
  std::vector<HillEdgeParams> ep = {{p.ell12, p.delta12, 1.0, p.d}, {p.ell21, p.delta21, 1.0, p.d}};
  return HillModel(toggle_switch_topology(), gamma, std::move(ep), true);
}

HillModel builtin_emt() {
  return HillModel(emt_topology(), Eigen::VectorXd::Ones(6), std::vector<HillEdgeParams>(12), true);
}

HillModel builtin_emt(std::span<const double> shared) { return builtin_emt().with_free_parameters(shared); }

}  // namespace hillnet
