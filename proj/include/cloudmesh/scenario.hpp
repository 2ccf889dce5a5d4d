#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "cloudmesh/fabric.hpp"
#include "cloudmesh/hypervisor.hpp"
#include "cloudmesh/mac.hpp"
#include "cloudmesh/sim.hpp"
#include "cloudmesh/substrate.hpp"
#include "cloudmesh/types.hpp"

namespace cloudmesh {

struct ScenarioTraffic {
  std::string kind;  // "ping" | "stream" | "packet"
  std::string src, dst;
  long long count = 1;
  Tick interval = 1;
  Tick start = 0;
  long long size = 100;
  long long rate = 0;  // bytes per tick, streams only
  Tick duration = 0;
};

struct ScenarioVn {
  std::string tenant;
  VirtualNetworkSpec spec;
};

struct Scenario {
  SubstrateGraph graph;
  TopologyKind fabric_kind = TopologyKind::Mst;
  CostModel cost;
  SimConstants constants;
  HypervisorConfig hv_config;
  std::vector<std::string> tenants;
  std::vector<ScenarioVn> vns;
  std::vector<ScenarioTraffic> traffic;
};

namespace detail {

inline void expect_keys(const nlohmann::json& j,
                        std::initializer_list<const char*> allowed,
                        const std::string& where) {
  if (!j.is_object())
    throw Error(Errc::MalformedScenario, where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
          return it.key() == k;
        }) == allowed.end())
      throw Error(Errc::MalformedScenario, where + ": unknown key '" + it.key() + "'");
  }
}

}  // namespace detail

inline Scenario load_scenario(const nlohmann::json& j) {
  using detail::expect_keys;
  try {
    expect_keys(j,
                {"clouds", "nodes", "links", "inter_cloud_weights", "fabric",
                 "constants", "tenants", "virtual_networks", "traffic"},
                "scenario");
    Scenario sc;

    // inter-cloud weights are gathered first so add_cloud can see them
    std::map<std::string, std::map<std::string, int>> weights;
    if (j.contains("inter_cloud_weights")) {
      for (const auto& jw : j.at("inter_cloud_weights")) {
        expect_keys(jw, {"a", "b", "weight"}, "inter_cloud_weights");
        std::string a = jw.at("a"), b = jw.at("b");
        weights[a][b] = jw.at("weight");
        weights[b][a] = jw.at("weight");
      }
    }
    for (const auto& jc : j.at("clouds")) {
      expect_keys(jc, {"cloud_id", "kind", "region_label"}, "clouds");
      CloudDescriptor cloud;
      cloud.cloud_id = jc.at("cloud_id");
      std::string kind = jc.at("kind");
      if (kind == "public")
        cloud.kind = CloudKind::Public;
      else if (kind == "private")
        cloud.kind = CloudKind::Private;
      else
        throw Error(Errc::MalformedScenario, "cloud kind '" + kind + "'");
      if (jc.contains("region_label")) cloud.region_label = jc["region_label"];
      std::map<std::string, int> w;
      auto wit = weights.find(cloud.cloud_id);
      if (wit != weights.end())
        for (const auto& [peer, wt] : wit->second)
          if (sc.graph.clouds.count(peer)) w[peer] = wt;
      sc.graph = add_cloud(std::move(sc.graph), cloud, w);
    }
    for (const auto& jn : j.at("nodes")) {
      expect_keys(jn, {"node_id", "cloud_id", "role", "capacity"}, "nodes");
      SubstrateNode node;
      node.node_id = jn.at("node_id");
      node.cloud_id = jn.at("cloud_id");
      std::string role = jn.at("role");
      if (role == "vm")
        node.role = NodeRole::Vm;
      else if (role == "gateway")
        node.role = NodeRole::Gateway;
      else if (role == "hardware_switch")
        node.role = NodeRole::HardwareSwitch;
      else
        throw Error(Errc::MalformedScenario, "node role '" + role + "'");
      if (jn.contains("capacity")) node.capacity = jn["capacity"];
      sc.graph = add_node(std::move(sc.graph), node);
    }
    if (j.contains("links")) {
      for (const auto& jl : j.at("links")) {
        expect_keys(jl, {"a", "b", "weight", "bandwidth"}, "links");
        SubstrateLink link;
        link.a = jl.at("a");
        link.b = jl.at("b");
        if (jl.contains("weight")) link.weight = jl["weight"];
        if (jl.contains("bandwidth")) link.bandwidth = jl["bandwidth"];
        sc.graph = add_link(std::move(sc.graph), link);
      }
    }
    if (j.contains("fabric")) {
      const auto& jf = j.at("fabric");
      expect_keys(jf, {"topology", "cost_fixed", "cost_per_weight"}, "fabric");
      if (jf.contains("topology")) {
        std::string topo = jf["topology"];
        if (topo == "mst")
          sc.fabric_kind = TopologyKind::Mst;
        else if (topo == "mesh")
          sc.fabric_kind = TopologyKind::FullMesh;
        else
          throw Error(Errc::MalformedScenario, "fabric topology '" + topo + "'");
      }
      if (jf.contains("cost_fixed")) sc.cost.c_fixed = jf["cost_fixed"];
      if (jf.contains("cost_per_weight")) sc.cost.c_per_weight = jf["cost_per_weight"];
    }
    if (j.contains("constants")) {
      const auto& jk = j.at("constants");
      expect_keys(jk,
                  {"hop_latency", "tunnel_latency", "control_latency",
                   "tunnel_encap_overhead", "default_bandwidth", "tunnel_bandwidth",
                   "tick_limit", "buffer_limit", "virtualized", "idle_timeout",
                   "hard_timeout"},
                  "constants");
      auto& c = sc.constants;
      if (jk.contains("hop_latency")) c.hop_latency = jk["hop_latency"];
      if (jk.contains("tunnel_latency")) c.tunnel_latency = jk["tunnel_latency"];
      if (jk.contains("control_latency")) c.control_latency = jk["control_latency"];
      if (jk.contains("tunnel_encap_overhead"))
        c.tunnel_encap_overhead = jk["tunnel_encap_overhead"];
      if (jk.contains("default_bandwidth")) c.default_bandwidth = jk["default_bandwidth"];
      if (jk.contains("tunnel_bandwidth")) c.tunnel_bandwidth = jk["tunnel_bandwidth"];
      if (jk.contains("tick_limit")) c.tick_limit = jk["tick_limit"];
      if (jk.contains("buffer_limit")) c.buffer_limit = jk["buffer_limit"];
      if (jk.contains("virtualized")) c.virtualized = jk["virtualized"];
      if (jk.contains("idle_timeout")) sc.hv_config.idle_timeout = jk["idle_timeout"].get<Tick>();
      if (jk.contains("hard_timeout")) sc.hv_config.hard_timeout = jk["hard_timeout"].get<Tick>();
    }
    if (j.contains("tenants")) {
      for (const auto& jt : j.at("tenants")) {
        expect_keys(jt, {"name"}, "tenants");
        sc.tenants.push_back(jt.at("name"));
      }
    }
    if (j.contains("virtual_networks")) {
      for (const auto& jv : j.at("virtual_networks")) {
        expect_keys(jv, {"tenant", "vnodes", "vlinks"}, "virtual_networks");
        ScenarioVn vn;
        vn.tenant = jv.at("tenant");
        for (const auto& jn : jv.at("vnodes")) {
          expect_keys(jn, {"vnode_id", "vmac", "location_constraint"}, "vnodes");
          VNode v;
          v.vnode_id = jn.at("vnode_id");
          v.vmac = mac_from_string(jn.at("vmac"));
          if (jn.contains("location_constraint"))
            v.location_constraint = jn["location_constraint"];
          vn.spec.vnodes.push_back(std::move(v));
        }
        if (jv.contains("vlinks")) {
          for (const auto& jl : jv.at("vlinks")) {
            expect_keys(jl, {"a", "b", "multipath"}, "vlinks");
            VLink l;
            l.a = jl.at("a");
            l.b = jl.at("b");
            if (jl.contains("multipath")) l.multipath = jl["multipath"];
            vn.spec.vlinks.push_back(std::move(l));
          }
        }
        sc.vns.push_back(std::move(vn));
      }
    }
    if (j.contains("traffic")) {
      for (const auto& jt : j.at("traffic")) {
        expect_keys(jt,
                    {"kind", "src", "dst", "count", "interval", "start", "size",
                     "rate", "duration"},
                    "traffic");
        ScenarioTraffic t;
        t.kind = jt.at("kind");
        if (t.kind != "ping" && t.kind != "stream" && t.kind != "packet")
          throw Error(Errc::MalformedScenario, "traffic kind '" + t.kind + "'");
        t.src = jt.at("src");
        t.dst = jt.at("dst");
        if (jt.contains("count")) t.count = jt["count"];
        if (jt.contains("interval")) t.interval = jt["interval"];
        if (jt.contains("start")) t.start = jt["start"];
        if (jt.contains("size")) t.size = jt["size"];
        if (jt.contains("rate")) t.rate = jt["rate"];
        if (jt.contains("duration")) t.duration = jt["duration"];
        sc.traffic.push_back(std::move(t));
      }
    }
    return sc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedScenario, e.what());
  }
}

inline Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::MalformedScenario, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedScenario, e.what());
  }
  return load_scenario(j);
}

struct ScenarioRuntime {
  Engine engine;
  std::map<std::string, TenantId> tenants;
  std::map<std::string, std::vector<std::string>> networks;  // tenant -> vn ids
};

// Builds the full runtime for a scenario: fabric establishment, tenant
// registration, network submission and traffic generator scheduling.
inline ScenarioRuntime build_runtime(const Scenario& sc, std::uint64_t seed) {
  auto report = validate(sc.graph);
  if (!report.ok()) {
    std::string what = "invalid substrate";
    for (const auto& f : report.findings)
      if (f.severity == Severity::Violation) what += "; " + f.kind + " " + f.subject;
    throw Error(Errc::MalformedScenario, what);
  }
  FabricState fabric = establish(build_plan(sc.graph, sc.fabric_kind), sc.cost);
  ScenarioRuntime rt{Engine(sc.graph, fabric, sc.constants, seed, sc.hv_config), {}, {}};
  auto& hv = rt.engine.hypervisor();
  for (const auto& name : sc.tenants) rt.tenants[name] = hv.register_tenant();
  for (const auto& vn : sc.vns) {
    auto tit = rt.tenants.find(vn.tenant);
    if (tit == rt.tenants.end())
      throw Error(Errc::MalformedScenario, "unknown tenant '" + vn.tenant + "'");
    auto result = hv.submit_virtual_network(tit->second, vn.spec);
    rt.networks[vn.tenant].push_back(result.vn_id);
    if (sc.constants.virtualized) {
      rt.engine.apply_submit(result);
    } else {
      for (const auto& v : vn.spec.vnodes)
        rt.engine.add_baseline_host(v.vnode_id, result.embedding.vnode_map.at(v.vnode_id),
                                    v.vmac);
    }
  }
  for (const auto& t : sc.traffic) {
    if (t.kind == "ping")
      rt.engine.schedule_ping(t.src, t.dst, static_cast<int>(t.count), t.interval,
                              t.start, t.size);
    else if (t.kind == "stream")
      rt.engine.schedule_stream(t.src, t.dst, t.rate, t.duration, t.start, t.size);
    else
      rt.engine.schedule_packet(t.start, t.src, t.dst, t.size);
  }
  return rt;
}

}  // namespace cloudmesh
