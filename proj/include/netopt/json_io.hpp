#pragma once

#include <string>

#include <json.hpp>

#include "netopt/harness.hpp"
#include "netopt/mixing.hpp"
#include "netopt/topology.hpp"

namespace netopt {

nlohmann::json to_json(const Topology& t);
Topology topology_from_json(const nlohmann::json& j);

/// Row-major entries plus kind and Perron data.
nlohmann::json to_json(const MixingMatrix& M);

nlohmann::json to_json(const ExperimentConfig& c);
ExperimentConfig config_from_json(const nlohmann::json& j);

}  // namespace netopt
