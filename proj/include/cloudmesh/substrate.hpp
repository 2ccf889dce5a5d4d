#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cloudmesh/types.hpp"

namespace cloudmesh {

enum class CloudKind { Public, Private };
enum class NodeRole { Vm, Gateway, HardwareSwitch };

struct CloudDescriptor {
  std::string cloud_id;
  CloudKind kind = CloudKind::Public;
  std::string region_label;
};

struct SubstrateNode {
  std::string node_id;
  std::string cloud_id;
  NodeRole role = NodeRole::Vm;
  int capacity = 0;  // max hosted virtual nodes
};

struct SubstrateLink {
  std::string a, b;  // endpoints, same cloud
  int weight = 1;
  long long bandwidth = 1;
};

// Unordered cloud pair, stored normalized.
using CloudPair = std::pair<std::string, std::string>;

inline CloudPair make_cloud_pair(std::string x, std::string y) {
  if (y < x) std::swap(x, y);
  return {std::move(x), std::move(y)};
}

struct Path {
  std::vector<std::string> nodes;
  long long cost = 0;
};

enum class Severity { Violation, Info };

struct Finding {
  std::string kind;     // MissingGateway, ExtraGateway, CrossCloudLink, ...
  std::string subject;  // offending cloud/node/link id
  Severity severity = Severity::Violation;
};

struct ValidationReport {
  std::vector<Finding> findings;

  bool ok() const {
    return std::none_of(findings.begin(), findings.end(), [](const Finding& f) {
      return f.severity == Severity::Violation;
    });
  }
  bool has(const std::string& kind) const {
    return std::any_of(findings.begin(), findings.end(),
                       [&](const Finding& f) { return f.kind == kind; });
  }
};

// Value-semantics substrate description. Operations copy-and-extend; a
// previously returned graph is never observably mutated.
struct SubstrateGraph {
  std::map<std::string, CloudDescriptor> clouds;
  std::map<std::string, SubstrateNode> nodes;
  std::vector<SubstrateLink> links;
  std::map<CloudPair, int> inter_cloud_weights;

  const CloudDescriptor& cloud(const std::string& id) const {
    auto it = clouds.find(id);
    if (it == clouds.end()) throw Error(Errc::UnknownCloud, id);
    return it->second;
  }
  const SubstrateNode& node(const std::string& id) const {
    auto it = nodes.find(id);
    if (it == nodes.end()) throw Error(Errc::UnknownNode, id);
    return it->second;
  }
  int inter_cloud_weight(const std::string& a, const std::string& b) const {
    auto it = inter_cloud_weights.find(make_cloud_pair(a, b));
    if (it == inter_cloud_weights.end())
      throw Error(Errc::UnknownCloud, a + "/" + b);
    return it->second;
  }
};

// weights: existing cloud_id -> tunnel weight for the new pair; missing
// entries default to 1.
inline SubstrateGraph add_cloud(SubstrateGraph g, const CloudDescriptor& desc,
                                const std::map<std::string, int>& weights = {}) {
  if (g.clouds.count(desc.cloud_id)) throw Error(Errc::DuplicateCloudId, desc.cloud_id);
  for (const auto& [existing, _] : g.clouds) {
    auto it = weights.find(existing);
    int w = it == weights.end() ? 1 : it->second;
    g.inter_cloud_weights[make_cloud_pair(existing, desc.cloud_id)] = w;
  }
  g.clouds[desc.cloud_id] = desc;
  return g;
}

inline SubstrateGraph add_node(SubstrateGraph g, const SubstrateNode& node) {
  auto it = g.clouds.find(node.cloud_id);
  if (it == g.clouds.end()) throw Error(Errc::UnknownCloud, node.cloud_id);
  if (g.nodes.count(node.node_id)) throw Error(Errc::DuplicateNodeId, node.node_id);
  if (node.role == NodeRole::HardwareSwitch && it->second.kind == CloudKind::Public)
    throw Error(Errc::HardwareSwitchInPublicCloud, node.node_id);
  g.nodes[node.node_id] = node;
  return g;
}

inline SubstrateGraph add_link(SubstrateGraph g, const SubstrateLink& link) {
  g.links.push_back(link);
  return g;
}

inline ValidationReport validate(const SubstrateGraph& g) {
  ValidationReport report;
  std::map<std::string, int> gateways;
  for (const auto& [id, _] : g.clouds) gateways[id] = 0;
  for (const auto& [id, n] : g.nodes) {
    if (n.role == NodeRole::Gateway) {
      gateways[n.cloud_id]++;
      if (n.capacity > 0)
        report.findings.push_back({"GatewayHostsTenantVms", id, Severity::Info});
    }
  }
  for (const auto& [cloud, count] : gateways) {
    if (count == 0)
      report.findings.push_back({"MissingGateway", cloud, Severity::Violation});
    else if (count > 1)
      report.findings.push_back({"ExtraGateway", cloud, Severity::Violation});
  }
  for (const auto& link : g.links) {
    auto a = g.nodes.find(link.a);
    auto b = g.nodes.find(link.b);
    if (a == g.nodes.end() || b == g.nodes.end()) {
      report.findings.push_back(
          {"DanglingLinkEndpoint", link.a + "--" + link.b, Severity::Violation});
      continue;
    }
    if (a->second.cloud_id != b->second.cloud_id)
      report.findings.push_back(
          {"CrossCloudLink", link.a + "--" + link.b, Severity::Violation});
    if (g.cloud(a->second.cloud_id).kind == CloudKind::Public)
      report.findings.push_back(
          {"LinkInPublicCloud", link.a + "--" + link.b, Severity::Violation});
  }
  return report;
}

inline const std::string& gateway_of(const SubstrateGraph& g, const std::string& cloud_id) {
  for (const auto& [id, n] : g.nodes)
    if (n.cloud_id == cloud_id && n.role == NodeRole::Gateway) return n.node_id;
  throw Error(Errc::UnknownCloud, "no gateway in cloud " + cloud_id);
}

// Minimum-weight path between two nodes of the same cloud. Public clouds
// are a big switch: every pair is one logical hop of cost 1. Private
// clouds run Dijkstra over explicit links; among equal-cost paths the
// lexicographically smallest node-id sequence wins.
inline Path intra_cloud_path(const SubstrateGraph& g, const std::string& a,
                             const std::string& b) {
  const auto& na = g.node(a);
  const auto& nb = g.node(b);
  if (na.cloud_id != nb.cloud_id) throw Error(Errc::DifferentClouds, a + "/" + b);
  if (a == b) return Path{{a}, 0};
  if (g.cloud(na.cloud_id).kind == CloudKind::Public) return Path{{a, b}, 1};

  std::map<std::string, std::vector<std::pair<std::string, int>>> adj;
  for (const auto& link : g.links) {
    adj[link.a].push_back({link.b, link.weight});
    adj[link.b].push_back({link.a, link.weight});
  }
  using Entry = std::pair<long long, std::vector<std::string>>;  // (cost, path)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
  pq.push({0, {a}});
  std::set<std::string> done;
  while (!pq.empty()) {
    auto [cost, path] = pq.top();
    pq.pop();
    const std::string& cur = path.back();
    if (done.count(cur)) continue;
    done.insert(cur);
    if (cur == b) return Path{path, cost};
    auto it = adj.find(cur);
    if (it == adj.end()) continue;
    for (const auto& [next, w] : it->second) {
      if (done.count(next)) continue;
      auto np = path;
      np.push_back(next);
      pq.push({cost + w, std::move(np)});
    }
  }
  throw Error(Errc::NoPath, a + " -> " + b);
}

}  // namespace cloudmesh
