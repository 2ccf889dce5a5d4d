#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cloudmesh/fabric.hpp"
#include "cloudmesh/substrate.hpp"

namespace cmtest {

using namespace cloudmesh;

// A public cloud with one gateway and n VM nodes named "<prefix>-vmK".
inline SubstrateGraph add_public_cloud(SubstrateGraph g, const std::string& id,
                                       int vms, int capacity = 4,
                                       const std::string& region = "",
                                       const std::map<std::string, int>& weights = {}) {
  g = add_cloud(std::move(g), {id, CloudKind::Public, region}, weights);
  g = add_node(std::move(g), {id + "-gw", id, NodeRole::Gateway, 0});
  for (int i = 0; i < vms; ++i)
    g = add_node(std::move(g),
                 {id + "-vm" + std::to_string(i), id, NodeRole::Vm, capacity});
  return g;
}

// Private cloud with a line topology vm0 - vm1 - ... - vm(n-1), gateway
// attached to vm0.
inline SubstrateGraph add_private_line_cloud(SubstrateGraph g, const std::string& id,
                                             int vms, int capacity = 4,
                                             const std::string& region = "priv") {
  g = add_cloud(std::move(g), {id, CloudKind::Private, region});
  g = add_node(std::move(g), {id + "-gw", id, NodeRole::Gateway, 0});
  for (int i = 0; i < vms; ++i)
    g = add_node(std::move(g),
                 {id + "-vm" + std::to_string(i), id, NodeRole::Vm, capacity});
  g = add_link(std::move(g), {id + "-gw", id + "-vm0", 1, 1000000});
  for (int i = 0; i + 1 < vms; ++i)
    g = add_link(std::move(g),
                 {id + "-vm" + std::to_string(i), id + "-vm" + std::to_string(i + 1),
                  1, 1000000});
  return g;
}

// n public clouds c0..c(n-1), unit inter-cloud weights.
inline SubstrateGraph clouds_only(int n) {
  SubstrateGraph g;
  for (int i = 0; i < n; ++i)
    g = add_public_cloud(std::move(g), "c" + std::to_string(i), 2);
  return g;
}

// Brute-force shortest path oracle: enumerates every simple path and
// picks the cheapest, tie-broken by the smaller node sequence.
inline std::optional<Path> brute_force_shortest(const SubstrateGraph& g,
                                                const std::string& a,
                                                const std::string& b) {
  std::map<std::string, std::vector<std::pair<std::string, int>>> adj;
  for (const auto& link : g.links) {
    adj[link.a].push_back({link.b, link.weight});
    adj[link.b].push_back({link.a, link.weight});
  }
  std::optional<Path> best;
  std::vector<std::string> cur{a};
  std::set<std::string> seen{a};
  auto dfs = [&](auto&& self, const std::string& u, long long cost) -> void {
    if (u == b) {
      if (!best || cost < best->cost || (cost == best->cost && cur < best->nodes))
        best = Path{cur, cost};
      return;
    }
    for (const auto& [v, w] : adj[u]) {
      if (seen.count(v)) continue;
      seen.insert(v);
      cur.push_back(v);
      self(self, v, cost + w);
      cur.pop_back();
      seen.erase(v);
    }
  };
  dfs(dfs, a, 0);
  return best;
}

// Minimum spanning tree weight by exhaustive Prufer-sequence
// enumeration; valid for small n only.
inline long long prufer_min_spanning_weight(int n,
                                            const std::map<CloudPair, int>& weights,
                                            const std::vector<std::string>& ids) {
  if (n == 1) return 0;
  if (n == 2) return weights.at(make_cloud_pair(ids[0], ids[1]));
  long long best = -1;
  std::vector<int> seq(n - 2, 0);
  while (true) {
    // Decode the Prufer sequence into tree edges.
    std::vector<int> degree(n, 1);
    for (int s : seq) degree[s]++;
    std::vector<int> deg = degree;
    std::vector<std::pair<int, int>> edges;
    std::set<int> leaves;
    for (int i = 0; i < n; ++i)
      if (deg[i] == 1) leaves.insert(i);
    for (int s : seq) {
      int leaf = *leaves.begin();
      leaves.erase(leaves.begin());
      edges.push_back({leaf, s});
      if (--deg[s] == 1) leaves.insert(s);
    }
    int u = *leaves.begin();
    int v = *std::next(leaves.begin());
    edges.push_back({u, v});
    long long total = 0;
    for (auto [x, y] : edges) total += weights.at(make_cloud_pair(ids[x], ids[y]));
    if (best < 0 || total < best) best = total;

    int pos = n - 3;
    while (pos >= 0 && seq[pos] == n - 1) seq[pos--] = 0;
    if (pos < 0) break;
    seq[pos]++;
  }
  return best;
}

}  // namespace cmtest
