#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace netopt {

/// Communication graph over agents 0..n-1. Edge (i,j) is a link from i to j;
/// undirected topologies store each edge once, symmetric adjacency implied.
/// Self-loops are never stored: every neighborhood implicitly contains the
/// agent itself.
struct Topology {
  int n = 0;
  bool directed = false;
  std::vector<std::pair<int, int>> edges;

  /// In-neighbors of i including i itself.
  std::vector<int> in_neighbors(int i) const;
  /// Out-neighbors of i including i itself.
  std::vector<int> out_neighbors(int i) const;
  /// Degree not counting the implicit self-loop (undirected graphs).
  int degree(int i) const;

  bool has_edge(int from, int to) const;

  /// Undirected: connected. Directed: strongly connected.
  bool is_connected() const;
};

enum class TopologyKind { Ring, Path, Complete, RandomStronglyConnected, Custom };

TopologyKind topology_kind_from_string(const std::string& s);
std::string to_string(TopologyKind k);

/// Builds one of the named topologies; validates connectivity.
/// `seed` only matters for RandomStronglyConnected.
Topology build_topology(TopologyKind kind, int n, bool directed, std::uint64_t seed = 0);

/// Validates a user-provided edge list (indices in range, no self-loops,
/// connectivity per the directed flag).
Topology custom_topology(int n, bool directed, std::vector<std::pair<int, int>> edges);

}  // namespace netopt
