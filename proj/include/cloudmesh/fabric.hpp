#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "cloudmesh/substrate.hpp"
#include "cloudmesh/types.hpp"

namespace cloudmesh {

enum class TunnelState { Planned, Established };
enum class TopologyKind { Mst, FullMesh };

struct Tunnel {
  std::string tunnel_id;  // "<a>--<b>" with a < b
  std::string cloud_a, cloud_b;
  int weight = 1;
  TunnelState state = TunnelState::Planned;
};

inline Tunnel make_tunnel(const SubstrateGraph& g, const std::string& x,
                          const std::string& y) {
  auto [a, b] = make_cloud_pair(x, y);
  return Tunnel{a + "--" + b, a, b, g.inter_cloud_weight(a, b),
                TunnelState::Planned};
}

struct TunnelPlan {
  TopologyKind topology_kind = TopologyKind::Mst;
  std::vector<Tunnel> tunnels;
  long long total_weight = 0;
};

struct CostModel {
  long long c_fixed = 5;
  long long c_per_weight = 1;
};

struct FabricState {
  TunnelPlan plan;
  std::size_t established_count = 0;
  long long setup_cost = 0;  // simulated ticks
};

namespace detail {

// Plain union-find over dense indices.
struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

}  // namespace detail

// Kruskal over the complete inter-cloud graph; ties broken by the
// lexicographically smaller cloud pair so plans are reproducible.
inline TunnelPlan build_mst(const SubstrateGraph& g) {
  TunnelPlan plan;
  plan.topology_kind = TopologyKind::Mst;
  std::vector<std::string> ids;
  for (const auto& [id, _] : g.clouds) ids.push_back(id);
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < ids.size(); ++i) index[ids[i]] = static_cast<int>(i);

  struct Edge {
    int weight;
    CloudPair pair;
  };
  std::vector<Edge> edges;
  for (const auto& [pair, w] : g.inter_cloud_weights) edges.push_back({w, pair});
  std::sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) {
    return std::tie(x.weight, x.pair) < std::tie(y.weight, y.pair);
  });

  detail::DisjointSet dsu(ids.size());
  for (const auto& e : edges) {
    if (dsu.unite(index[e.pair.first], index[e.pair.second])) {
      plan.tunnels.push_back(make_tunnel(g, e.pair.first, e.pair.second));
      plan.total_weight += e.weight;
    }
  }
  return plan;
}

inline TunnelPlan build_full_mesh(const SubstrateGraph& g) {
  TunnelPlan plan;
  plan.topology_kind = TopologyKind::FullMesh;
  for (const auto& [pair, w] : g.inter_cloud_weights) {
    plan.tunnels.push_back(make_tunnel(g, pair.first, pair.second));
    plan.total_weight += w;
  }
  return plan;
}

inline TunnelPlan build_plan(const SubstrateGraph& g, TopologyKind kind) {
  return kind == TopologyKind::Mst ? build_mst(g) : build_full_mesh(g);
}

inline long long tunnel_setup_cost(const Tunnel& t, const CostModel& m) {
  return m.c_fixed + m.c_per_weight * t.weight;
}

inline FabricState establish(TunnelPlan plan, const CostModel& model) {
  FabricState state;
  for (auto& t : plan.tunnels) {
    t.state = TunnelState::Established;
    state.setup_cost += tunnel_setup_cost(t, model);
  }
  state.established_count = plan.tunnels.size();
  state.plan = std::move(plan);
  return state;
}

// Tunnel sequence between two clouds: the unique tree path on an MST
// fabric, the direct tunnel on a full mesh. Same cloud -> empty.
inline std::vector<Tunnel> fabric_path(const FabricState& state,
                                       const std::string& cloud_a,
                                       const std::string& cloud_b) {
  if (cloud_a == cloud_b) return {};
  std::map<std::string, std::vector<const Tunnel*>> adj;
  bool known_a = false, known_b = false;
  for (const auto& t : state.plan.tunnels) {
    adj[t.cloud_a].push_back(&t);
    adj[t.cloud_b].push_back(&t);
    known_a = known_a || t.cloud_a == cloud_a || t.cloud_b == cloud_a;
    known_b = known_b || t.cloud_a == cloud_b || t.cloud_b == cloud_b;
  }
  if (!known_a) throw Error(Errc::UnknownCloud, cloud_a);
  if (!known_b) throw Error(Errc::UnknownCloud, cloud_b);

  // BFS; tunnel sets are small and tree paths unique on MST fabrics.
  std::map<std::string, const Tunnel*> via;
  std::vector<std::string> frontier{cloud_a};
  via[cloud_a] = nullptr;
  while (!frontier.empty() && !via.count(cloud_b)) {
    std::vector<std::string> next;
    for (const auto& c : frontier) {
      for (const Tunnel* t : adj[c]) {
        const std::string& peer = t->cloud_a == c ? t->cloud_b : t->cloud_a;
        if (via.count(peer)) continue;
        via[peer] = t;
        next.push_back(peer);
      }
    }
    frontier = std::move(next);
  }
  auto it = via.find(cloud_b);
  if (it == via.end()) throw Error(Errc::NoPath, cloud_a + " -> " + cloud_b);
  std::vector<Tunnel> path;
  std::string cur = cloud_b;
  while (via[cur] != nullptr) {
    const Tunnel* t = via[cur];
    path.push_back(*t);
    cur = t->cloud_a == cur ? t->cloud_b : t->cloud_a;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace cloudmesh
