#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "cloudmesh/fabric.hpp"
#include "cloudmesh/flow.hpp"
#include "cloudmesh/mac.hpp"
#include "cloudmesh/substrate.hpp"
#include "cloudmesh/types.hpp"

namespace cloudmesh {

struct VNode {
  std::string vnode_id;
  Mac vmac = 0;
  std::optional<std::string> location_constraint;  // cloud_id or region_label
};

struct VLink {
  std::string a, b;
  int multipath = 1;
};

struct VirtualNetworkSpec {
  std::vector<VNode> vnodes;
  std::vector<VLink> vlinks;
};

// A substrate walk that may span clouds: node ids interleaved with
// tunnel hops between gateways.
struct RouteElem {
  enum class Kind { Node, Tunnel };
  Kind kind = Kind::Node;
  std::string id;

  bool operator==(const RouteElem&) const = default;
};
using WidePath = std::vector<RouteElem>;

inline std::string vlink_key(const std::string& a, const std::string& b) {
  return a < b ? a + "|" + b : b + "|" + a;
}

struct Embedding {
  std::map<std::string, std::string> vnode_map;            // vnode -> substrate node
  std::map<std::string, std::vector<WidePath>> vlink_map;  // vlink key -> k paths
};

// Per-switch forwarding hop of a concrete flow route.
struct Hop {
  std::string node;
  std::string out_port;
};
struct Route {
  std::vector<Hop> hops;
  int tunnel_count = 0;
};

struct RuleInstall {
  std::string switch_id;  // switch id == hosting substrate node id
  FlowRule rule;
};

struct SubmitResult {
  std::string vn_id;
  Embedding embedding;
  std::vector<RuleInstall> installs;  // pre-provisioned miss entries
};

struct PacketInResult {
  std::vector<RuleInstall> installs;
  Route route;            // empty when dropped
  std::string flow_id;
  bool dropped = false;
};

struct TopologyView {
  std::vector<std::string> vnode_ids;
  std::vector<std::pair<std::string, std::string>> vlinks;
};

struct LldpResponsePlan {
  TenantId tenant = 0;
  TopologyView topology;
};

// Enumerate simple paths a->b over explicit links of a private cloud,
// sorted by (cost, node sequence). Used for multipath embedding and as
// the ground the unit-test oracles are checked against too (tests carry
// their own copy).
inline std::vector<Path> enumerate_simple_paths(const SubstrateGraph& g,
                                                const std::string& a,
                                                const std::string& b,
                                                std::size_t limit = 4096) {
  std::map<std::string, std::vector<std::pair<std::string, int>>> adj;
  for (const auto& link : g.links) {
    adj[link.a].push_back({link.b, link.weight});
    adj[link.b].push_back({link.a, link.weight});
  }
  for (auto& [_, v] : adj) std::sort(v.begin(), v.end());
  std::vector<Path> out;
  std::vector<std::string> cur{a};
  std::set<std::string> seen{a};
  long long cost = 0;
  auto dfs = [&](auto&& self, const std::string& u) -> void {
    if (out.size() >= limit) return;
    if (u == b) {
      out.push_back({cur, cost});
      return;
    }
    for (const auto& [v, w] : adj[u]) {
      if (seen.count(v)) continue;
      seen.insert(v);
      cur.push_back(v);
      cost += w;
      self(self, v);
      cost -= w;
      cur.pop_back();
      seen.erase(v);
    }
  };
  dfs(dfs, a);
  std::sort(out.begin(), out.end(), [](const Path& x, const Path& y) {
    return std::tie(x.cost, x.nodes) < std::tie(y.cost, y.nodes);
  });
  return out;
}

struct SubstrateMacPair {
  Mac substrate_mac = 0;
  std::uint32_t local = 0;
};

struct HypervisorConfig {
  Tick idle_timeout = 60;
  std::optional<Tick> hard_timeout;
  int data_rule_priority = 10;
  int miss_rule_priority = 0;
};

class Hypervisor {
 public:
  using Config = HypervisorConfig;

  Hypervisor(const SubstrateGraph& graph, const FabricState& fabric,
             Config config = Config())
      : graph_(graph), fabric_(fabric), config_(config) {}

  const Config& config() const { return config_; }
  const SubstrateGraph& graph() const { return graph_; }
  const FabricState& fabric() const { return fabric_; }

  // ---- tenant lifecycle ----

  TenantId register_tenant() {
    if (!released_.empty()) {
      TenantId id = *released_.begin();
      released_.erase(released_.begin());
      tenants_[id];
      return id;
    }
    if (next_tenant_ > 0xFFFF) throw Error(Errc::TenantSpaceExhausted);
    TenantId id = static_cast<TenantId>(next_tenant_++);
    tenants_[id];
    return id;
  }

  void release_tenant(TenantId tenant) {
    auto it = tenants_.find(tenant);
    if (it == tenants_.end()) throw Error(Errc::UnknownTenant);
    for (const auto& vn : std::vector<std::string>(it->second.networks.begin(),
                                                   it->second.networks.end()))
      teardown(tenant, vn);
    tenants_.erase(it);
    released_.insert(tenant);
  }

  bool tenant_registered(TenantId tenant) const { return tenants_.count(tenant) > 0; }
  std::size_t tenant_count() const { return tenants_.size(); }

  SubstrateMacPair map_virtual_mac(TenantId tenant, Mac vmac);

  // ---- virtual networks ----

  SubmitResult submit_virtual_network(TenantId tenant, const VirtualNetworkSpec& spec);
  void teardown(TenantId tenant, const std::string& vn_id);

  TopologyView virtual_topology(TenantId tenant) const {
    auto it = tenants_.find(tenant);
    if (it == tenants_.end()) throw Error(Errc::UnknownTenant);
    TopologyView view;
    for (const auto& vn_id : it->second.networks) {
      const Network& net = networks_.at(vn_id);
      for (const auto& v : net.spec.vnodes) view.vnode_ids.push_back(v.vnode_id);
      for (const auto& l : net.spec.vlinks) view.vlinks.push_back({l.a, l.b});
    }
    return view;
  }

  LldpResponsePlan intercept_lldp(TenantId tenant) const {
    if (!tenants_.count(tenant)) throw Error(Errc::UnknownTenant);
    return LldpResponsePlan{tenant, virtual_topology(tenant)};
  }

  // ---- packet-in translation ----

  struct PacketInEvent {
    std::string switch_id;
    std::string in_port;
    Mac src_mac = 0;
    Mac dst_mac = 0;
    Tick now = 0;
  };

  PacketInResult on_packet_in(const PacketInEvent& ev);

  // Baseline controller used by the non-virtualized comparison runs:
  // routes on raw macs registered through bind_baseline_host, with zero
  // translation work.
  void bind_baseline_host(Mac mac, const std::string& vnode, const std::string& node) {
    baseline_hosts_[mac] = {vnode, node};
  }
  PacketInResult on_packet_in_baseline(const PacketInEvent& ev);

  // ---- queries used by the engine and migration ----

  std::optional<std::string> vnode_host(const std::string& vnode_id) const {
    auto it = vnode_index_.find(vnode_id);
    if (it == vnode_index_.end()) return std::nullopt;
    return networks_.at(it->second).embedding.vnode_map.at(vnode_id);
  }
  std::optional<TenantId> vnode_tenant(const std::string& vnode_id) const {
    auto it = vnode_index_.find(vnode_id);
    if (it == vnode_index_.end()) return std::nullopt;
    return networks_.at(it->second).tenant;
  }
  std::optional<std::string> vnode_network(const std::string& vnode_id) const {
    auto it = vnode_index_.find(vnode_id);
    if (it == vnode_index_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<Mac> vnode_vmac(const std::string& vnode_id) const {
    auto it = vnode_index_.find(vnode_id);
    if (it == vnode_index_.end()) return std::nullopt;
    for (const auto& v : networks_.at(it->second).spec.vnodes)
      if (v.vnode_id == vnode_id) return v.vmac;
    return std::nullopt;
  }
  std::vector<std::string> vnodes_on(const std::string& node_id) const {
    std::vector<std::string> out;
    for (const auto& [_, net] : networks_)
      for (const auto& [v, n] : net.embedding.vnode_map)
        if (n == node_id) out.push_back(v);
    std::sort(out.begin(), out.end());
    return out;
  }
  const Embedding* embedding_of(const std::string& vn_id) const {
    auto it = networks_.find(vn_id);
    return it == networks_.end() ? nullptr : &it->second.embedding;
  }
  std::vector<std::string> network_ids() const {
    std::vector<std::string> out;
    for (const auto& [id, _] : networks_) out.push_back(id);
    return out;
  }

  // Rebinds a vnode to a new substrate node (live migration); future
  // route computations use the new placement.
  void rebind_vnode(const std::string& vnode_id, const std::string& new_node) {
    for (auto& [_, net] : networks_) {
      auto it = net.embedding.vnode_map.find(vnode_id);
      if (it != net.embedding.vnode_map.end()) {
        node_used_[it->second]--;
        it->second = new_node;
        node_used_[new_node]++;
        return;
      }
    }
    throw Error(Errc::UnknownVm, vnode_id);
  }

  // Relocates a substrate node to another cloud (live migration). Cached
  // vlink paths traversing the node are invalidated and rebuilt lazily
  // against the new placement.
  void set_node_cloud(const std::string& node_id, const std::string& cloud_id) {
    auto nit = graph_.nodes.find(node_id);
    if (nit == graph_.nodes.end()) throw Error(Errc::UnknownNode, node_id);
    if (!graph_.clouds.count(cloud_id)) throw Error(Errc::UnknownCloud, cloud_id);
    nit->second.cloud_id = cloud_id;
    for (auto& [_, net] : networks_) {
      for (auto& [key, paths] : net.embedding.vlink_map) {
        bool touches = false;
        for (const auto& wp : paths)
          for (const auto& e : wp)
            if (e.kind == RouteElem::Kind::Node && e.id == node_id) touches = true;
        if (touches) paths.clear();
      }
    }
  }

  // Recomputes the substrate route for an established flow from its
  // current placement and emits the full rule set (used during
  // migration rule updates).
  PacketInResult reroute_flow(TenantId tenant, Mac src_vmac, Mac dst_vmac, Tick now);

  // Operation counters: steps_total accumulates hypervisor processing
  // work; translation_steps the virtualization-specific share.
  long long steps_total() const { return steps_total_; }
  long long translation_steps() const { return translation_steps_; }
  void reset_steps() { steps_total_ = translation_steps_ = 0; }

 private:
  struct TenantState {
    std::map<Mac, std::uint32_t> vmac_to_local;
    std::map<std::uint32_t, Mac> local_to_vmac;
    std::set<std::string> networks;
  };
  struct Network {
    std::string vn_id;
    TenantId tenant = 0;
    VirtualNetworkSpec spec;
    Embedding embedding;
  };

  std::vector<WidePath> wide_paths(const std::string& node_a,
                                   const std::string& node_b, int k) const;
  Route route_from_wide(const WidePath& wp, const std::string& dst_vnode) const;
  const Network* find_network(TenantId tenant, Mac src_vmac) const;
  PacketInResult build_flow_rules(Network& net, const std::string& src_vnode,
                                  const std::string& dst_vnode, Mac src_vmac,
                                  Mac dst_vmac, Tick now);

  void step(long long n = 1) { steps_total_ += n; }
  void tstep(long long n = 1) {
    steps_total_ += n;
    translation_steps_ += n;
  }

  SubstrateGraph graph_;
  FabricState fabric_;
  Config config_;

  std::map<TenantId, TenantState> tenants_;
  std::set<TenantId> released_;
  std::uint32_t next_tenant_ = 0;

  std::map<std::string, Network> networks_;
  std::map<std::string, std::string> vnode_index_;  // vnode -> vn_id
  std::map<std::string, int> node_used_;  // capacity accounting
  std::uint64_t next_vn_ = 0;
  std::int64_t next_rule_id_ = 1;

  struct BaselineHost {
    std::string vnode;
    std::string node;
  };
  std::map<Mac, BaselineHost> baseline_hosts_;

  long long steps_total_ = 0;
  long long translation_steps_ = 0;

 public:
  std::int64_t next_rule_id() { return next_rule_id_++; }
};

inline SubstrateMacPair Hypervisor::map_virtual_mac(TenantId tenant, Mac vmac) {
  auto it = tenants_.find(tenant);
  if (it == tenants_.end()) throw Error(Errc::UnknownTenant);
  auto& ts = it->second;
  auto found = ts.vmac_to_local.find(vmac);
  if (found != ts.vmac_to_local.end())
    return {encode_mac(tenant, found->second), found->second};
  if (ts.vmac_to_local.size() == 0x100000000ULL) throw Error(Errc::LocalSpaceExhausted);
  auto local = static_cast<std::uint32_t>(ts.vmac_to_local.size());
  ts.vmac_to_local[vmac] = local;
  ts.local_to_vmac[local] = vmac;
  return {encode_mac(tenant, local), local};
}

inline std::vector<WidePath> Hypervisor::wide_paths(const std::string& node_a,
                                                    const std::string& node_b,
                                                    int k) const {
  const auto& cloud_a = graph_.node(node_a).cloud_id;
  const auto& cloud_b = graph_.node(node_b).cloud_id;
  std::vector<WidePath> out;

  auto intra_alternatives = [&](const std::string& x, const std::string& y,
                                int want) {
    std::vector<std::vector<std::string>> alts;
    if (x == y) {
      alts.push_back({x});
      return alts;
    }
    if (graph_.cloud(graph_.node(x).cloud_id).kind == CloudKind::Public) {
      alts.push_back({x, y});
      return alts;
    }
    auto paths = enumerate_simple_paths(graph_, x, y);
    if (paths.empty()) throw Error(Errc::NoPath, x + " -> " + y);
    // Prefer interior-disjoint alternatives; fall back to overlap.
    std::set<std::string> used_interior;
    for (const auto& p : paths) {
      if (static_cast<int>(alts.size()) >= want) break;
      bool disjoint = true;
      for (std::size_t i = 1; i + 1 < p.nodes.size(); ++i)
        if (used_interior.count(p.nodes[i])) disjoint = false;
      if (!disjoint) continue;
      for (std::size_t i = 1; i + 1 < p.nodes.size(); ++i)
        used_interior.insert(p.nodes[i]);
      alts.push_back(p.nodes);
    }
    for (const auto& p : paths) {
      if (static_cast<int>(alts.size()) >= want) break;
      if (std::find_if(alts.begin(), alts.end(), [&](const auto& a) {
            return a == p.nodes;
          }) == alts.end())
        alts.push_back(p.nodes);
    }
    return alts;
  };

  if (cloud_a == cloud_b) {
    for (const auto& alt : intra_alternatives(node_a, node_b, k)) {
      WidePath wp;
      for (const auto& n : alt) wp.push_back({RouteElem::Kind::Node, n});
      out.push_back(std::move(wp));
    }
  } else {
    const auto& gw_a = gateway_of(graph_, cloud_a);
    const auto& gw_b = gateway_of(graph_, cloud_b);
    auto tunnels = fabric_path(fabric_, cloud_a, cloud_b);
    auto head_alts = intra_alternatives(node_a, gw_a, k);
    auto tail_alts = intra_alternatives(gw_b, node_b, k);
    for (int i = 0; i < k; ++i) {
      const auto& head = head_alts[std::min<std::size_t>(i, head_alts.size() - 1)];
      const auto& tail = tail_alts[std::min<std::size_t>(i, tail_alts.size() - 1)];
      WidePath wp;
      for (const auto& n : head) wp.push_back({RouteElem::Kind::Node, n});
      std::string cur_cloud = cloud_a;
      for (const auto& t : tunnels) {
        wp.push_back({RouteElem::Kind::Tunnel, t.tunnel_id});
        cur_cloud = t.cloud_a == cur_cloud ? t.cloud_b : t.cloud_a;
        wp.push_back({RouteElem::Kind::Node, gateway_of(graph_, cur_cloud)});
      }
      for (std::size_t j = 1; j < tail.size(); ++j)
        wp.push_back({RouteElem::Kind::Node, tail[j]});
      out.push_back(std::move(wp));
      if (static_cast<int>(out.size()) >= k) break;
    }
  }
  while (static_cast<int>(out.size()) < k) out.push_back(out.back());
  return out;
}

inline Route Hypervisor::route_from_wide(const WidePath& wp,
                                         const std::string& dst_vnode) const {
  Route route;
  for (std::size_t i = 0; i < wp.size(); ++i) {
    if (wp[i].kind != RouteElem::Kind::Node) continue;
    std::string out_port;
    if (i + 1 < wp.size()) {
      out_port = wp[i + 1].kind == RouteElem::Kind::Node
                     ? "node:" + wp[i + 1].id
                     : "tunnel:" + wp[i + 1].id;
      if (wp[i + 1].kind == RouteElem::Kind::Tunnel) route.tunnel_count++;
    } else {
      out_port = "host:" + dst_vnode;
    }
    route.hops.push_back({wp[i].id, out_port});
  }
  return route;
}

inline SubmitResult Hypervisor::submit_virtual_network(TenantId tenant,
                                                       const VirtualNetworkSpec& spec) {
  auto tit = tenants_.find(tenant);
  if (tit == tenants_.end()) throw Error(Errc::UnknownTenant);

  std::set<std::string> ids;
  std::set<Mac> macs;
  for (const auto& v : spec.vnodes) {
    if (!ids.insert(v.vnode_id).second)
      throw Error(Errc::InvalidSpec, "duplicate vnode " + v.vnode_id);
    if (vnode_index_.count(v.vnode_id))
      throw Error(Errc::InvalidSpec, "vnode id already in use: " + v.vnode_id);
    if (!macs.insert(v.vmac).second)
      throw Error(Errc::InvalidSpec, "duplicate vmac in spec");
  }
  for (const auto& l : spec.vlinks) {
    if (!ids.count(l.a) || !ids.count(l.b))
      throw Error(Errc::InvalidSpec, "vlink endpoint missing");
    if (l.multipath < 1) throw Error(Errc::InvalidSpec, "multipath < 1");
  }

  // Greedy first-fit: clouds ordered by (constraint match, remaining
  // capacity, id); nodes within a cloud lexicographically, Vm roles
  // before gateways.
  Embedding emb;
  std::map<std::string, int> used = node_used_;
  auto remaining = [&](const SubstrateNode& n) { return n.capacity - used[n.node_id]; };
  for (const auto& v : spec.vnodes) {
    struct Cand {
      int constraint_rank;
      long long neg_capacity;
      std::string cloud_id;
    };
    std::vector<Cand> clouds;
    for (const auto& [cid, cloud] : graph_.clouds) {
      bool match = !v.location_constraint || *v.location_constraint == cid ||
                   *v.location_constraint == cloud.region_label;
      if (v.location_constraint && !match) continue;
      long long cap = 0;
      for (const auto& [nid, n] : graph_.nodes)
        if (n.cloud_id == cid && remaining(n) > 0) cap += remaining(n);
      clouds.push_back({0, -cap, cid});
    }
    if (clouds.empty()) throw Error(Errc::InfeasibleConstraint, v.vnode_id);
    std::sort(clouds.begin(), clouds.end(), [](const Cand& x, const Cand& y) {
      return std::tie(x.constraint_rank, x.neg_capacity, x.cloud_id) <
             std::tie(y.constraint_rank, y.neg_capacity, y.cloud_id);
    });
    bool placed = false;
    for (const auto& cand : clouds) {
      for (int want_role = 0; want_role < 2 && !placed; ++want_role) {
        for (const auto& [nid, n] : graph_.nodes) {
          if (n.cloud_id != cand.cloud_id || remaining(n) <= 0) continue;
          bool is_vm = n.role == NodeRole::Vm || n.role == NodeRole::HardwareSwitch;
          if ((want_role == 0) != is_vm) continue;
          emb.vnode_map[v.vnode_id] = nid;
          used[nid]++;
          placed = true;
          break;
        }
      }
      if (placed) break;
    }
    if (!placed) throw Error(Errc::CapacityExceeded, v.vnode_id);
  }

  for (const auto& l : spec.vlinks)
    emb.vlink_map[vlink_key(l.a, l.b)] =
        wide_paths(emb.vnode_map.at(l.a), emb.vnode_map.at(l.b), l.multipath);

  std::string vn_id = "vn" + std::to_string(next_vn_++);
  Network net{vn_id, tenant, spec, emb};
  networks_[vn_id] = net;
  tit->second.networks.insert(vn_id);
  for (const auto& v : spec.vnodes) vnode_index_[v.vnode_id] = vn_id;
  node_used_ = used;
  for (const auto& v : spec.vnodes) map_virtual_mac(tenant, v.vmac);

  // Pre-provisioned edge state: a table-miss entry per attached vnode so
  // first packets reach the controller; data rules are reactive.
  SubmitResult result{vn_id, emb, {}};
  for (const auto& v : spec.vnodes) {
    FlowRule miss;
    miss.rule_id = next_rule_id();
    miss.priority = config_.miss_rule_priority;
    miss.match.in_port = "host:" + v.vnode_id;
    miss.actions = {Action::to_controller()};
    miss.owner_vn = vn_id;
    result.installs.push_back({emb.vnode_map.at(v.vnode_id), std::move(miss)});
  }
  return result;
}

inline void Hypervisor::teardown(TenantId tenant, const std::string& vn_id) {
  auto it = networks_.find(vn_id);
  if (it == networks_.end() || it->second.tenant != tenant)
    throw Error(Errc::UnknownNetwork, vn_id);
  for (const auto& [vnode, node] : it->second.embedding.vnode_map) {
    node_used_[node]--;
    vnode_index_.erase(vnode);
  }
  tenants_.at(tenant).networks.erase(vn_id);
  networks_.erase(it);
}

inline auto Hypervisor::find_network(TenantId tenant, Mac src_vmac) const
    -> const Network* {
  auto tit = tenants_.find(tenant);
  if (tit == tenants_.end()) return nullptr;
  for (const auto& vn : tit->second.networks) {
    const Network& net = networks_.at(vn);
    for (const auto& v : net.spec.vnodes)
      if (v.vmac == src_vmac) return &net;
  }
  return nullptr;
}

inline PacketInResult Hypervisor::build_flow_rules(Network& net,
                                                   const std::string& src_vnode,
                                                   const std::string& dst_vnode,
                                                   Mac src_vmac, Mac dst_vmac,
                                                   Tick now) {
  // Virtual route: BFS by hop count over the tenant's vlinks,
  // lexicographic tie-break.
  std::map<std::string, std::vector<std::string>> vadj;
  for (const auto& l : net.spec.vlinks) {
    vadj[l.a].push_back(l.b);
    vadj[l.b].push_back(l.a);
  }
  for (auto& [_, v] : vadj) std::sort(v.begin(), v.end());
  std::map<std::string, std::string> prev;
  std::vector<std::string> frontier{src_vnode};
  prev[src_vnode] = "";
  while (!frontier.empty() && !prev.count(dst_vnode)) {
    std::vector<std::string> next;
    for (const auto& u : frontier) {
      for (const auto& v : vadj[u]) {
        if (prev.count(v)) continue;
        prev[v] = u;
        next.push_back(v);
      }
    }
    frontier = std::move(next);
  }
  step();  // virtual route lookup
  if (!prev.count(dst_vnode)) {
    // No virtual route: enforce isolation in the data plane with an
    // ingress drop rule.
    PacketInResult result;
    result.dropped = true;
    FlowRule drop;
    drop.rule_id = next_rule_id();
    drop.priority = config_.data_rule_priority;
    drop.match = {"host:" + src_vnode, src_vmac, dst_vmac};
    drop.actions = {Action::drop()};
    drop.idle_timeout = config_.idle_timeout;
    drop.install_tick = now;
    drop.idle_deadline = now + config_.idle_timeout;
    drop.owner_vn = net.vn_id;
    result.installs.push_back({net.embedding.vnode_map.at(src_vnode), std::move(drop)});
    return result;
  }
  std::vector<std::string> vroute;
  for (std::string cur = dst_vnode; !cur.empty(); cur = prev[cur])
    vroute.push_back(cur);
  std::reverse(vroute.begin(), vroute.end());

  auto src_pair = map_virtual_mac(net.tenant, src_vmac);
  auto dst_pair = map_virtual_mac(net.tenant, dst_vmac);
  tstep(2);  // vmac -> substrate mac mapping
  std::size_t alt =
      (static_cast<std::size_t>(src_pair.local) * 1000003u + dst_pair.local);

  // Concatenate mapped vlink paths along the virtual route.
  WidePath full;
  for (std::size_t i = 0; i + 1 < vroute.size(); ++i) {
    auto& alts = net.embedding.vlink_map.at(vlink_key(vroute[i], vroute[i + 1]));
    if (alts.empty()) {
      // invalidated by a placement change; rebuild lazily
      const VLink* vl = nullptr;
      for (const auto& l : net.spec.vlinks)
        if (vlink_key(l.a, l.b) == vlink_key(vroute[i], vroute[i + 1])) vl = &l;
      alts = wide_paths(net.embedding.vnode_map.at(vroute[i]),
                        net.embedding.vnode_map.at(vroute[i + 1]),
                        vl ? vl->multipath : 1);
    }
    const WidePath& wp = alts[alt % alts.size()];
    // vlink_map paths are stored from the lexicographically smaller
    // endpoint; reverse when walking the other way.
    WidePath seg = wp;
    const std::string& from_node = net.embedding.vnode_map.at(vroute[i]);
    if (seg.front().id != from_node) std::reverse(seg.begin(), seg.end());
    std::size_t start = full.empty() ? 0 : 1;
    for (std::size_t j = start; j < seg.size(); ++j) full.push_back(seg[j]);
    step();
  }

  Route route = route_from_wide(full, dst_vnode);

  PacketInResult result;
  result.flow_id = "t" + std::to_string(net.tenant) + ":" + mac_to_string(src_vmac) +
                   ">" + mac_to_string(dst_vmac);
  Mac s_sub = src_pair.substrate_mac, d_sub = dst_pair.substrate_mac;
  bool single = route.hops.size() == 1;
  for (std::size_t i = 0; i < route.hops.size(); ++i) {
    FlowRule rule;
    rule.rule_id = next_rule_id();
    rule.priority = config_.data_rule_priority;
    rule.idle_timeout = config_.idle_timeout;
    rule.hard_timeout = config_.hard_timeout;
    rule.install_tick = now;
    rule.idle_deadline = now + config_.idle_timeout;
    if (config_.hard_timeout) rule.hard_deadline = now + *config_.hard_timeout;
    rule.owner_vn = net.vn_id;
    rule.owner_flow = result.flow_id;
    if (i == 0) {
      rule.match = {"host:" + src_vnode, src_vmac, dst_vmac};
      if (single) {
        rule.actions = {Action::forward(route.hops[i].out_port)};
      } else {
        rule.actions = {Action::rewrite_src(s_sub), Action::rewrite_dst(d_sub),
                        Action::forward(route.hops[i].out_port)};
      }
    } else if (i + 1 == route.hops.size()) {
      rule.match = {std::nullopt, s_sub, d_sub};
      rule.actions = {Action::rewrite_src(src_vmac), Action::rewrite_dst(dst_vmac),
                      Action::forward(route.hops[i].out_port)};
    } else {
      rule.match = {std::nullopt, s_sub, d_sub};
      rule.actions = {Action::forward(route.hops[i].out_port)};
    }
    tstep();  // rule translation/emission
    result.installs.push_back({route.hops[i].node, std::move(rule)});
  }
  result.route = std::move(route);
  return result;
}

inline PacketInResult Hypervisor::on_packet_in(const PacketInEvent& ev) {
  step();  // event intake
  if (ev.in_port.rfind("host:", 0) == 0) {
    std::string vnode = ev.in_port.substr(5);
    auto tenant = vnode_tenant(vnode);
    tstep();  // ingress attribution
    if (!tenant) throw Error(Errc::UnknownTenant, vnode);
    auto vn = vnode_network(vnode);
    Network* net = vn ? &networks_.at(*vn) : nullptr;
    tstep();  // network lookup
    if (!net) throw Error(Errc::UnknownTenant, vnode);
    // Destination must be a vnode of the same network.
    const VNode* dst = nullptr;
    for (const auto& v : net->spec.vnodes)
      if (v.vmac == ev.dst_mac) dst = &v;
    tstep();  // destination resolution
    if (!dst) {
      // Not in this tenant's network: isolate with a drop rule.
      PacketInResult result;
      result.dropped = true;
      FlowRule drop;
      drop.rule_id = next_rule_id();
      drop.priority = config_.data_rule_priority;
      drop.match = {ev.in_port, ev.src_mac, ev.dst_mac};
      drop.actions = {Action::drop()};
      drop.idle_timeout = config_.idle_timeout;
      drop.install_tick = ev.now;
      drop.idle_deadline = ev.now + config_.idle_timeout;
      drop.owner_vn = net->vn_id;
      result.installs.push_back({ev.switch_id, std::move(drop)});
      return result;
    }
    return build_flow_rules(*net, vnode, dst->vnode_id, ev.src_mac, ev.dst_mac, ev.now);
  }

  // Core miss: recover tenant and flow from the substrate tag.
  auto [tenant, dst_local] = decode_mac(ev.dst_mac);
  auto [tenant2, src_local] = decode_mac(ev.src_mac);
  tstep();  // tag decode
  auto tit = tenants_.find(tenant);
  if (tit == tenants_.end() || tenant != tenant2)
    throw Error(Errc::UnknownTenant, mac_to_string(ev.dst_mac));
  auto sv = tit->second.local_to_vmac.find(src_local);
  auto dv = tit->second.local_to_vmac.find(dst_local);
  if (sv == tit->second.local_to_vmac.end() || dv == tit->second.local_to_vmac.end())
    throw Error(Errc::UnknownTenant, mac_to_string(ev.dst_mac));
  return reroute_flow(tenant, sv->second, dv->second, ev.now);
}

inline PacketInResult Hypervisor::reroute_flow(TenantId tenant, Mac src_vmac,
                                               Mac dst_vmac, Tick now) {
  const Network* net = find_network(tenant, src_vmac);
  if (!net) throw Error(Errc::UnknownTenant);
  const VNode* src = nullptr;
  const VNode* dst = nullptr;
  for (const auto& v : net->spec.vnodes) {
    if (v.vmac == src_vmac) src = &v;
    if (v.vmac == dst_vmac) dst = &v;
  }
  if (!src || !dst) throw Error(Errc::NoVirtualRoute);
  // Placement may have changed (migration): recompute vlink paths that
  // no longer start/end at the mapped nodes.
  Network& mut = networks_.at(net->vn_id);
  for (const auto& l : mut.spec.vlinks) {
    const std::string& na = mut.embedding.vnode_map.at(l.a);
    const std::string& nb = mut.embedding.vnode_map.at(l.b);
    auto& paths = mut.embedding.vlink_map.at(vlink_key(l.a, l.b));
    bool stale = paths.empty();
    if (!stale) {
      const auto& p = paths.front();
      const std::string& head = p.front().id;
      const std::string& tail = p.back().id;
      stale = !((head == na && tail == nb) || (head == nb && tail == na));
    }
    if (stale) paths = wide_paths(na, nb, l.multipath);
  }
  return build_flow_rules(mut, src->vnode_id, dst->vnode_id, src_vmac, dst_vmac, now);
}

inline PacketInResult Hypervisor::on_packet_in_baseline(const PacketInEvent& ev) {
  step();  // event intake
  auto sit = baseline_hosts_.find(ev.src_mac);
  auto dit = baseline_hosts_.find(ev.dst_mac);
  step();  // host lookup
  if (sit == baseline_hosts_.end() || dit == baseline_hosts_.end())
    throw Error(Errc::UnknownEndpoint, mac_to_string(ev.dst_mac));
  auto wps = wide_paths(sit->second.node, dit->second.node, 1);
  step();  // route compute
  Route route = route_from_wide(wps.front(), dit->second.vnode);
  PacketInResult result;
  result.flow_id = "raw:" + mac_to_string(ev.src_mac) + ">" + mac_to_string(ev.dst_mac);
  for (const auto& hop : route.hops) {
    FlowRule rule;
    rule.rule_id = next_rule_id();
    rule.priority = config_.data_rule_priority;
    rule.match = {std::nullopt, ev.src_mac, ev.dst_mac};
    rule.actions = {Action::forward(hop.out_port)};
    rule.idle_timeout = config_.idle_timeout;
    rule.install_tick = ev.now;
    rule.idle_deadline = ev.now + config_.idle_timeout;
    rule.owner_flow = result.flow_id;
    step();  // rule emission
    result.installs.push_back({hop.node, std::move(rule)});
  }
  result.route = std::move(route);
  return result;
}

}  // namespace cloudmesh
