#include "netopt/topology.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>

#include "netopt/rng.hpp"

namespace netopt {

namespace {

std::vector<std::vector<int>> adjacency(const Topology& t, bool reverse) {
  std::vector<std::vector<int>> adj(t.n);
  for (const auto& [a, b] : t.edges) {
    int from = a, to = b;
    if (reverse) std::swap(from, to);
    adj[from].push_back(to);
    if (!t.directed) adj[to].push_back(from);
  }
  return adj;
}

bool reaches_all(const std::vector<std::vector<int>>& adj, int start) {
  std::vector<char> seen(adj.size(), 0);
  std::queue<int> q;
  q.push(start);
  seen[start] = 1;
  std::size_t count = 1;
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    for (int w : adj[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++count;
        q.push(w);
      }
    }
  }
  return count == adj.size();
}

}  // namespace

std::vector<int> Topology::in_neighbors(int i) const {
  std::vector<int> out{i};
  for (const auto& [a, b] : edges) {
    if (b == i) out.push_back(a);
    if (!directed && a == i) out.push_back(b);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> Topology::out_neighbors(int i) const {
  std::vector<int> out{i};
  for (const auto& [a, b] : edges) {
    if (a == i) out.push_back(b);
    if (!directed && b == i) out.push_back(a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

int Topology::degree(int i) const {
  int d = 0;
  for (const auto& [a, b] : edges)
    if (a == i || b == i) ++d;
  return d;
}

bool Topology::has_edge(int from, int to) const {
  for (const auto& [a, b] : edges) {
    if (a == from && b == to) return true;
    if (!directed && a == to && b == from) return true;
  }
  return false;
}

bool Topology::is_connected() const {
  if (n <= 0) return false;
  if (n == 1) return true;
  const auto fwd = adjacency(*this, false);
  if (!reaches_all(fwd, 0)) return false;
  if (!directed) return true;
  return reaches_all(adjacency(*this, true), 0);
}

TopologyKind topology_kind_from_string(const std::string& s) {
  if (s == "ring") return TopologyKind::Ring;
  if (s == "path") return TopologyKind::Path;
  if (s == "complete") return TopologyKind::Complete;
  if (s == "random-strongly-connected") return TopologyKind::RandomStronglyConnected;
  if (s == "custom") return TopologyKind::Custom;
  throw std::invalid_argument("unknown topology kind: " + s);
}

std::string to_string(TopologyKind k) {
  switch (k) {
    case TopologyKind::Ring: return "ring";
    case TopologyKind::Path: return "path";
    case TopologyKind::Complete: return "complete";
    case TopologyKind::RandomStronglyConnected: return "random-strongly-connected";
    case TopologyKind::Custom: return "custom";
  }
  return "?";
}

Topology build_topology(TopologyKind kind, int n, bool directed, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("topology needs n >= 2 agents");
  Topology t;
  t.n = n;
  t.directed = directed;
  switch (kind) {
    case TopologyKind::Ring:
      for (int i = 0; i < n; ++i) t.edges.emplace_back(i, (i + 1) % n);
      if (!directed && n == 2) t.edges.pop_back();  // {0,1} stored once
      break;
    case TopologyKind::Path:
      if (directed) throw std::invalid_argument("a directed path is not strongly connected");
      for (int i = 0; i + 1 < n; ++i) t.edges.emplace_back(i, i + 1);
      break;
    case TopologyKind::Complete:
      for (int i = 0; i < n; ++i)
        for (int j = directed ? 0 : i + 1; j < n; ++j)
          if (i != j) t.edges.emplace_back(i, j);
      break;
    case TopologyKind::RandomStronglyConnected: {
      Rng rng(seed);
      // Random permutation cycle guarantees strong connectivity, then extra
      // random edges add irregularity.
      std::vector<int> perm(n);
      for (int i = 0; i < n; ++i) perm[i] = i;
      for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
      for (int i = 0; i < n; ++i) t.edges.emplace_back(perm[i], perm[(i + 1) % n]);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          if (i == j || t.has_edge(i, j)) continue;
          if (rng.uniform() < 2.0 / n) t.edges.emplace_back(i, j);
        }
      }
      if (!directed) {
        // keep one copy per undirected pair
        Topology u;
        u.n = n;
        u.directed = false;
        for (const auto& [a, b] : t.edges)
          if (!u.has_edge(a, b)) u.edges.emplace_back(std::min(a, b), std::max(a, b));
        t = u;
      }
      break;
    }
    case TopologyKind::Custom:
      throw std::invalid_argument("use custom_topology() for explicit edge lists");
  }
  if (!t.is_connected()) throw std::runtime_error("generated topology failed the connectivity check");
  return t;
}

Topology custom_topology(int n, bool directed, std::vector<std::pair<int, int>> edges) {
  if (n < 2) throw std::invalid_argument("topology needs n >= 2 agents");
  for (const auto& [a, b] : edges) {
    if (a < 0 || a >= n || b < 0 || b >= n) throw std::invalid_argument("edge index out of range");
    if (a == b) throw std::invalid_argument("edge lists must not contain self-loops");
  }
  Topology t{n, directed, std::move(edges)};
  if (!t.is_connected())
    throw std::runtime_error(directed ? "custom digraph is not strongly connected"
                                      : "custom graph is not connected");
  return t;
}

}  // namespace netopt
