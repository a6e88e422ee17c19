#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace hillnet {

enum class EdgeSign { activating, repressing };

/// Parameters of a single Hill response l + delta * x^d / (theta^d + x^d)
/// (activating) or l + delta * theta^d / (theta^d + x^d) (repressing).
///
/// The exponent admits hill == 0 so the constant-response limit can be
/// exercised; regular use expects hill >= 1.
struct HillEdgeParams {
  double ell = 1.0;
  double delta = 1.0;
  double theta = 1.0;
  double hill = 1.0;
};

/// Throws std::invalid_argument unless ell, delta, theta > 0 and hill >= 0.
void validate(const HillEdgeParams& p);

/// A Hill response and its partial derivatives in x and in the exponent.
struct HillJet {
  double value = 0.0;
  double dx = 0.0;
  double dxx = 0.0;
  double dd = 0.0;
  double dxdd = 0.0;
};

/// Evaluates the response at x >= 0. Throws std::domain_error for x < 0.
double eval_hill_response(double x, EdgeSign sign, const HillEdgeParams& p);

/// Response together with first/second x-derivatives, the exponent
/// derivative and the mixed derivative. At x == 0 the exponent derivative
/// uses the limit x^d ln(x/theta) -> 0 for d > 0.
HillJet hill_response_jet(double x, EdgeSign sign, const HillEdgeParams& p);

struct Edge {
  int source = 0;
  int target = 0;
  EdgeSign sign = EdgeSign::activating;
};

/// Directed regulatory network with a product-of-sums interaction at each
/// node. Edges are stored sorted by (target, source); this order defines
/// the parameter layout.
class NetworkTopology {
 public:
  /// interactions[i] lists the summands of node i, each summand being a list
  /// of source nodes whose edges into i are added together. Every in-edge of
  /// node i must appear in exactly one summand.
  NetworkTopology(int n_nodes, std::vector<Edge> edges,
                  const std::vector<std::vector<std::vector<int>>>& interactions);

  int n_nodes() const { return n_nodes_; }
  int n_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }

  /// Summands of node i as lists of edge indices.
  const std::vector<std::vector<int>>& summands(int node) const { return summands_[node]; }

  /// Summands of node i as lists of source nodes.
  std::vector<std::vector<int>> interaction(int node) const;

  /// Index of the edge source -> target, or -1.
  int edge_index(int source, int target) const;

 private:
  int n_nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::vector<int>>> summands_;
};

/// Flat parameter layout (gamma, ell, delta, theta, hill) with the edge
/// blocks following the topology's (target, source) order.
struct ParameterVector {
  Eigen::VectorXd gamma;
  Eigen::VectorXd ell;
  Eigen::VectorXd delta;
  Eigen::VectorXd theta;
  Eigen::VectorXd hill;

  Eigen::VectorXd flat() const;
  static ParameterVector from_flat(std::span<const double> values, int n_nodes, int n_edges);
};

struct Derivatives {
  Eigen::MatrixXd dx;               // df_i/dx_j
  std::vector<Eigen::MatrixXd> dxx;  // dxx[i](j, k) = d2 f_i / dx_j dx_k
  Eigen::VectorXd dd;               // df_i/dd along the common exponent direction
  Eigen::MatrixXd dxdd;             // d2 f_i / dx_j dd
};

/// f_i(x) = -gamma_i x_i + p_i(H_{i,.}(x)).
///
/// Exponent derivatives are taken along the direction that moves every edge
/// exponent by the same amount, which is the derivative in the shared
/// exponent d when shared_hill() holds.
class HillModel {
 public:
  HillModel(NetworkTopology topology, Eigen::VectorXd gamma,
            std::vector<HillEdgeParams> edge_params, bool shared_hill = false);

  static HillModel from_parameters(NetworkTopology topology, const ParameterVector& params,
                                   bool shared_hill = false);

  int dim() const { return topology_.n_nodes(); }
  int n_edges() const { return topology_.n_edges(); }
  const NetworkTopology& topology() const { return topology_; }
  const Eigen::VectorXd& gamma() const { return gamma_; }
  const std::vector<HillEdgeParams>& edge_params() const { return edge_params_; }
  bool shared_hill() const { return shared_hill_; }

  /// The shared exponent. Throws std::logic_error unless shared_hill().
  double hill() const;

  /// Copy with every edge exponent set to d (and shared mode switched on).
  HillModel with_hill(double d) const;

  ParameterVector parameters() const;

  /// Number of free parameters: N + 4E, or N + 3E + 1 in shared mode.
  int n_free_parameters() const;

  /// Free parameters (gamma, ell, delta, theta, hill). In shared mode the
  /// exponent block collapses to a single trailing entry.
  Eigen::VectorXd free_parameters() const;
  HillModel with_free_parameters(std::span<const double> values) const;

  Eigen::VectorXd eval(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd dx(const Eigen::VectorXd& x) const;
  Derivatives derivatives(const Eigen::VectorXd& x) const;

 private:
  void check_state(const Eigen::VectorXd& x) const;

  NetworkTopology topology_;
  Eigen::VectorXd gamma_;
  std::vector<HillEdgeParams> edge_params_;
  bool shared_hill_;
};

/// Non-dimensionalized Toggle Switch coordinates with
/// gamma_1 = theta_{2,1} = theta_{1,2} = 1 and a shared exponent.
struct ReducedToggleParams {
  double ell12 = 1.0;
  double delta12 = 1.0;
  double gamma2 = 1.0;
  double ell21 = 1.0;
  double delta21 = 1.0;
  double d = 1.0;

  /// Reads (ell12, delta12, gamma2, ell21, delta21) and the exponent.
  static ReducedToggleParams from_combinatorial(std::span<const double> xi, double d);
  std::array<double, 5> combinatorial() const { return {ell12, delta12, gamma2, ell21, delta21}; }
};

NetworkTopology toggle_switch_topology();
NetworkTopology emt_topology();

/// Toggle Switch with all parameters equal to one unless given.
HillModel builtin_toggle_switch();
HillModel builtin_toggle_switch(const ParameterVector& params);
HillModel builtin_reduced_toggle(const ReducedToggleParams& params);

/// Six node EMT network with a shared exponent. `shared` holds the 43 free
/// parameters (gamma[6], ell[12], delta[12], theta[12], d).
HillModel builtin_emt();
HillModel builtin_emt(std::span<const double> shared);

}  // namespace hillnet
