#include "netopt/json_io.hpp"

#include <stdexcept>

namespace netopt {

using nlohmann::json;

json to_json(const Topology& t) {
  json edges = json::array();
  for (const auto& [a, b] : t.edges) edges.push_back({a, b});
  return json{{"n", t.n}, {"directed", t.directed}, {"edges", edges}};
}

Topology topology_from_json(const json& j) {
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : j.at("edges")) edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  return custom_topology(j.at("n").get<int>(), j.at("directed").get<bool>(), std::move(edges));
}

json to_json(const MixingMatrix& M) {
  json entries = json::array();
  for (int i = 0; i < M.n(); ++i)
    for (int jj = 0; jj < M.n(); ++jj) entries.push_back(M.W(i, jj));
  json out{{"n", M.n()}, {"kind", to_string(M.kind)}, {"entries", entries}};
  if (M.has_left()) out["perron_left"] = std::vector<double>(M.perron_left.data(), M.perron_left.data() + M.n());
  if (M.has_right()) out["perron_right"] = std::vector<double>(M.perron_right.data(), M.perron_right.data() + M.n());
  return out;
}

namespace {

std::string algo_to_string(AlgoChoice a) {
  switch (a) {
    case AlgoChoice::Dgd: return "dgd";
    case AlgoChoice::Dogt: return "dogt";
    case AlgoChoice::Both: return "both";
  }
  return "?";
}

AlgoChoice algo_from_string(const std::string& s) {
  if (s == "dgd") return AlgoChoice::Dgd;
  if (s == "dogt") return AlgoChoice::Dogt;
  if (s == "both") return AlgoChoice::Both;
  throw std::invalid_argument("unknown algo: " + s);
}

}  // namespace

json to_json(const ExperimentConfig& c) {
  json j;
  j["preset"] = c.preset;
  j["algo"] = algo_to_string(c.algo);
  j["graph"] = to_string(c.graph);
  j["directed"] = c.directed;
  j["n"] = c.n;
  j["m"] = c.m;
  j["delta"] = c.delta;
  j["b_std"] = c.b_std;
  j["convex"] = c.convex;
  j["tau"] = c.tau;
  j["sigma_tilde"] = c.sigma_tilde;
  switch (c.alpha_policy) {
    case AlphaPolicy::Explicit: j["alpha"] = c.alpha_explicit; break;
    case AlphaPolicy::AutoTheoretical: j["alpha"] = "auto"; break;
    case AlphaPolicy::PaperValue: j["alpha"] = "paper"; break;
  }
  j["iters"] = c.iters;
  j["record_stride"] = c.record_stride;
  j["seeds"] = c.seeds;
  j["instance_seed"] = c.instance_seed;
  j["vary_instance"] = c.vary_instance;
  j["init_std"] = c.init_std;
  j["force"] = c.force;
  j["out_dir"] = c.out_dir;
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  c.preset = j.value("preset", c.preset);
  if (j.contains("algo")) c.algo = algo_from_string(j["algo"].get<std::string>());
  if (j.contains("graph")) c.graph = topology_kind_from_string(j["graph"].get<std::string>());
  c.directed = j.value("directed", c.directed);
  c.n = j.value("n", c.n);
  c.m = j.value("m", c.m);
  c.delta = j.value("delta", c.delta);
  c.b_std = j.value("b_std", c.b_std);
  c.convex = j.value("convex", c.convex);
  c.tau = j.value("tau", c.tau);
  c.sigma_tilde = j.value("sigma_tilde", c.sigma_tilde);
  if (j.contains("alpha")) {
    if (j["alpha"].is_number()) {
      c.alpha_policy = AlphaPolicy::Explicit;
      c.alpha_explicit = j["alpha"].get<double>();
    } else if (j["alpha"] == "auto") {
      c.alpha_policy = AlphaPolicy::AutoTheoretical;
    } else {
      c.alpha_policy = AlphaPolicy::PaperValue;
    }
  }
  c.iters = j.value("iters", c.iters);
  c.record_stride = j.value("record_stride", c.record_stride);
  if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  c.instance_seed = j.value("instance_seed", c.instance_seed);
  c.vary_instance = j.value("vary_instance", c.vary_instance);
  c.init_std = j.value("init_std", c.init_std);
  c.force = j.value("force", c.force);
  c.out_dir = j.value("out_dir", c.out_dir);
  return c;
}

}  // namespace netopt
