#include "hillnet/model_json.hpp"

#include <stdexcept>

namespace hillnet {

using nlohmann::json;

json model_to_json(const HillModel& model) {
  const auto& topo = model.topology();
  json edges = json::array(), eparams = json::array();
  for (int k = 0; k < topo.n_edges(); ++k) {
    const Edge& e = topo.edges()[k];
    const HillEdgeParams& p = model.edge_params()[k];
    edges.push_back({{"source", e.source},
                     {"target", e.target},
                     {"sign", e.sign == EdgeSign::activating ? "activating" : "repressing"}});
    eparams.push_back({{"ell", p.ell}, {"delta", p.delta}, {"theta", p.theta}, {"hill", p.hill}});
  }
  json inter = json::array();
  for (int i = 0; i < topo.n_nodes(); ++i) inter.push_back(topo.interaction(i));
  std::vector<double> gamma(model.gamma().data(), model.gamma().data() + model.dim());
  return {{"nodes", topo.n_nodes()},
          {"edges", edges},
          {"interactions", inter},
          {"params", {{"gamma", gamma}, {"edges", eparams}}},
          {"shared_hill", model.shared_hill()}};
}

HillModel model_from_json(const json& j) {
  try {
    const int n = j.at("nodes").get<int>();
    std::vector<Edge> edges;
    std::vector<HillEdgeParams> given;
    const json& je = j.at("edges");
    const json& jp = j.at("params").at("edges");
    if (je.size() != jp.size()) throw std::invalid_argument("edges and params.edges differ in length");
    for (std::size_t k = 0; k < je.size(); ++k) {
      const std::string sign = je[k].at("sign").get<std::string>();
      EdgeSign s;
      if (sign == "activating" || sign == "+")
        s = EdgeSign::activating;
      else if (sign == "repressing" || sign == "-")
        s = EdgeSign::repressing;
      else
        throw std::invalid_argument("unknown edge sign '" + sign + "'");
      edges.push_back({je[k].at("source").get<int>(), je[k].at("target").get<int>(), s});
      given.push_back({jp[k].at("ell").get<double>(), jp[k].at("delta").get<double>(),
                       jp[k].at("theta").get<double>(), jp[k].at("hill").get<double>()});
    }
    auto inter = j.at("interactions").get<std::vector<std::vector<std::vector<int>>>>();
    NetworkTopology topo(n, edges, inter);
    // reorder parameters into the canonical edge order
    std::vector<HillEdgeParams> ordered(given.size());
    for (std::size_t k = 0; k < edges.size(); ++k)
      ordered[topo.edge_index(edges[k].source, edges[k].target)] = given[k];
    auto gamma = j.at("params").at("gamma").get<std::vector<double>>();
    Eigen::VectorXd g = Eigen::Map<Eigen::VectorXd>(gamma.data(), static_cast<Eigen::Index>(gamma.size()));
    return HillModel(std::move(topo), g, std::move(ordered), j.value("shared_hill", false));
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("model schema: ") + e.what());
  }
}

}  // namespace hillnet
