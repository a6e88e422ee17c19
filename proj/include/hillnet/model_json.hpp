#pragma once

#include <json.hpp>

#include "hillnet/hill_model.hpp"

namespace hillnet {

/// Model schema:
/// {"nodes": N,
///  "edges": [{"source": j, "target": i, "sign": "activating"|"repressing"}],
///  "interactions": [[[j, ...], ...], ...],   per node, summands of source nodes
///  "params": {"gamma": [...], "edges": [{"ell", "delta", "theta", "hill"}]},
///  "shared_hill": bool}
/// Node indices are 0-based. params.edges follows the order of "edges".
nlohmann::json model_to_json(const HillModel& model);

/// Throws std::invalid_argument on any schema violation.
HillModel model_from_json(const nlohmann::json& j);

}  // namespace hillnet
