#pragma once

#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "cloudmesh/fabric.hpp"
#include "cloudmesh/fit.hpp"
#include "cloudmesh/hypervisor.hpp"
#include "cloudmesh/sim.hpp"
#include "cloudmesh/snapshot.hpp"
#include "cloudmesh/substrate.hpp"

namespace cloudmesh {

inline std::string padded_id(const char* prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%03d", prefix, i);
  return buf;
}

// n public clouds, pairwise inter-cloud weight 1 unless a weight map is
// passed, each with one gateway and vms_per_cloud VM nodes.
inline SubstrateGraph build_cloud_set(int n, int vms_per_cloud = 2, int capacity = 4,
                                      const std::map<CloudPair, int>* weights = nullptr) {
  SubstrateGraph g;
  for (int i = 0; i < n; ++i) {
    std::string cid = padded_id("c", i);
    std::map<std::string, int> w;
    if (weights) {
      for (const auto& [pair, wt] : *weights) {
        if (pair.first == cid && g.clouds.count(pair.second)) w[pair.second] = wt;
        if (pair.second == cid && g.clouds.count(pair.first)) w[pair.first] = wt;
      }
    }
    g = add_cloud(std::move(g), {cid, CloudKind::Public, ""}, w);
    g = add_node(std::move(g), {cid + "-gw", cid, NodeRole::Gateway, 0});
    for (int v = 0; v < vms_per_cloud; ++v)
      g = add_node(std::move(g),
                   {cid + "-vm" + std::to_string(v), cid, NodeRole::Vm, capacity});
  }
  return g;
}

// ---- tunnel fabric setup scaling ----

struct SetupRow {
  int clouds = 0;
  long long tunnels = 0;
  long long total_weight = 0;
  long long setup_cost = 0;
};

inline std::vector<SetupRow> run_setup_bench(int n_lo, int n_hi, TopologyKind kind,
                                             CostModel cost) {
  std::vector<SetupRow> rows;
  for (int n = n_lo; n <= n_hi; ++n) {
    SubstrateGraph g = build_cloud_set(n, 0);
    FabricState st = establish(build_plan(g, kind), cost);
    rows.push_back({n, static_cast<long long>(st.plan.tunnels.size()),
                    st.plan.total_weight, st.setup_cost});
  }
  return rows;
}

// ---- control-plane translation overhead ----

struct ControlRow {
  int networks = 0;
  long long requests = 0;
  long long steps_total = 0;
  long long translation_steps = 0;
  double mean_steps = 0.0;
  double mean_translation = 0.0;
};

// Identical two-endpoint networks, one per tenant, each pair packed onto
// one substrate node; requests replay packet-ins round-robin so the
// per-request hypervisor work can be compared across scales.
inline ControlRow run_control_bench(int networks, int requests, bool virtualized) {
  SubstrateGraph g;
  g = add_cloud(std::move(g), {"c0", CloudKind::Public, ""});
  g = add_node(std::move(g), {"c0-gw", "c0", NodeRole::Gateway, 0});
  for (int i = 0; i < networks; ++i)
    g = add_node(std::move(g), {padded_id("h", i), "c0", NodeRole::Vm, 2});
  FabricState fabric = establish(build_plan(g, TopologyKind::Mst), CostModel{});
  Hypervisor hv(g, fabric);

  struct Pair {
    std::string a, b;
    Mac ma, mb;
    std::string node;
  };
  std::vector<Pair> pairs;
  for (int i = 0; i < networks; ++i) {
    TenantId tenant = hv.register_tenant();
    VirtualNetworkSpec spec;
    Mac ma = 0x0A0000000000ULL + static_cast<Mac>(i) * 2;
    Mac mb = ma + 1;
    std::string a = padded_id("h", i) + "a", b = padded_id("h", i) + "b";
    spec.vnodes = {{a, ma, std::nullopt}, {b, mb, std::nullopt}};
    spec.vlinks = {{a, b, 1}};
    auto result = hv.submit_virtual_network(tenant, spec);
    if (!virtualized) {
      hv.bind_baseline_host(ma, a, result.embedding.vnode_map.at(a));
      hv.bind_baseline_host(mb, b, result.embedding.vnode_map.at(b));
    }
    pairs.push_back({a, b, ma, mb, result.embedding.vnode_map.at(a)});
  }

  hv.reset_steps();
  for (int r = 0; r < requests; ++r) {
    const Pair& p = pairs[r % pairs.size()];
    bool fwd = (r / pairs.size()) % 2 == 0;
    Hypervisor::PacketInEvent ev;
    ev.switch_id = p.node;
    ev.in_port = "host:" + (fwd ? p.a : p.b);
    ev.src_mac = fwd ? p.ma : p.mb;
    ev.dst_mac = fwd ? p.mb : p.ma;
    ev.now = r;
    if (virtualized)
      hv.on_packet_in(ev);
    else
      hv.on_packet_in_baseline(ev);
  }
  ControlRow row;
  row.networks = networks;
  row.requests = requests;
  row.steps_total = hv.steps_total();
  row.translation_steps = hv.translation_steps();
  row.mean_steps = static_cast<double>(row.steps_total) / requests;
  row.mean_translation = static_cast<double>(row.translation_steps) / requests;
  return row;
}

// ---- data-plane latency overhead ----

struct DataRow {
  int tunnels_on_path = 0;
  Tick raw_latency = 0;
  Tick virt_latency = 0;
  Tick diff = 0;
  Tick expected_diff = 0;
};

namespace detail {

// Three clouds in a chain (the shortcut edge is expensive, so the MST
// keeps the chain): flows with 0, 1 and 2 tunnels on their path.
inline SubstrateGraph data_bench_graph() {
  SubstrateGraph g;
  g = add_cloud(std::move(g), {"c0", CloudKind::Public, ""});
  g = add_cloud(std::move(g), {"c1", CloudKind::Public, ""}, {{"c0", 1}});
  g = add_cloud(std::move(g), {"c2", CloudKind::Public, ""}, {{"c0", 10}, {"c1", 1}});
  for (const std::string cid : {"c0", "c1", "c2"}) {
    g = add_node(std::move(g), {cid + "-gw", cid, NodeRole::Gateway, 0});
    g = add_node(std::move(g), {cid + "-vm0", cid, NodeRole::Vm, 1});
    g = add_node(std::move(g), {cid + "-vm1", cid, NodeRole::Vm, 1});
  }
  return g;
}

inline Tick steady_latency(const std::string& src_cloud, const std::string& dst_cloud,
                           bool virtualized, const SimConstants& base) {
  SubstrateGraph g = data_bench_graph();
  FabricState fabric = establish(build_plan(g, TopologyKind::Mst), CostModel{});
  SimConstants c = base;
  c.virtualized = virtualized;
  Engine engine(g, fabric, c, 0);
  auto& hv = engine.hypervisor();
  TenantId tenant = hv.register_tenant();
  VirtualNetworkSpec spec;
  spec.vnodes = {{"u", 0x0A0000000001ULL, src_cloud},
                 {"v", 0x0A0000000002ULL, dst_cloud}};
  spec.vlinks = {{"u", "v", 1}};
  auto result = hv.submit_virtual_network(tenant, spec);
  if (virtualized) {
    engine.apply_submit(result);
  } else {
    engine.add_baseline_host("u", result.embedding.vnode_map.at("u"), 0x0A0000000001ULL);
    engine.add_baseline_host("v", result.embedding.vnode_map.at("v"), 0x0A0000000002ULL);
  }
  for (int i = 0; i < 5; ++i) engine.schedule_packet(i * 500, "u", "v");
  Metrics m = engine.run();
  Tick best = -1;
  for (Tick lat : m.per_packet_latency)
    if (best < 0 || lat < best) best = lat;
  return best;
}

}  // namespace detail

inline std::vector<DataRow> run_data_bench(const SimConstants& base = SimConstants()) {
  struct Case {
    std::string src, dst;
    int tunnels;
  };
  std::vector<Case> cases = {{"c0", "c0", 0}, {"c0", "c1", 1}, {"c0", "c2", 2}};
  std::vector<DataRow> rows;
  for (const auto& cs : cases) {
    DataRow row;
    row.tunnels_on_path = cs.tunnels;
    row.raw_latency = detail::steady_latency(cs.src, cs.dst, false, base);
    row.virt_latency = detail::steady_latency(cs.src, cs.dst, true, base);
    row.diff = row.virt_latency - row.raw_latency;
    row.expected_diff = base.tunnel_encap_overhead * cs.tunnels;
    rows.push_back(row);
  }
  return rows;
}

// ---- isolation fuzzing ----

struct FuzzResult {
  Metrics metrics;
  std::vector<std::string> substrate_node_ids;
  long long legit_packets = 0;
  long long cross_packets = 0;
  int tenants = 0;
};

// Several tenants spread across three clouds; a mix of in-network
// traffic and packets aimed at other tenants' addresses.
inline FuzzResult run_isolation_fuzz(std::uint64_t seed, int tenants = 4,
                                     int packets = 2500) {
  SubstrateGraph g = build_cloud_set(3, 4, 4);
  FabricState fabric = establish(build_plan(g, TopologyKind::Mst), CostModel{});
  SimConstants c;
  Engine engine(g, fabric, c, seed);
  auto& hv = engine.hypervisor();

  struct TenantNet {
    std::vector<std::string> vnodes;
    std::vector<Mac> vmacs;
  };
  std::vector<TenantNet> nets;
  const char* clouds[3] = {"c000", "c001", "c002"};
  for (int t = 0; t < tenants; ++t) {
    TenantId tenant = hv.register_tenant();
    VirtualNetworkSpec spec;
    TenantNet net;
    for (int k = 0; k < 4; ++k) {
      std::string id = "f" + std::to_string(t) + "n" + std::to_string(k);
      Mac vmac = 0x020000000000ULL + static_cast<Mac>(t) * 256 + k;
      std::optional<std::string> where;
      if (k < 3) where = clouds[k];
      spec.vnodes.push_back({id, vmac, where});
      net.vnodes.push_back(id);
      net.vmacs.push_back(vmac);
    }
    for (int k = 0; k + 1 < 4; ++k)
      spec.vlinks.push_back({net.vnodes[k], net.vnodes[k + 1], 1});
    engine.apply_submit(hv.submit_virtual_network(tenant, spec));
    nets.push_back(std::move(net));
  }

  std::mt19937_64 rng(seed);
  FuzzResult out;
  out.tenants = tenants;
  for (int i = 0; i < packets; ++i) {
    Tick at = static_cast<Tick>(rng() % 20000);
    int t = static_cast<int>(rng() % tenants);
    int s = static_cast<int>(rng() % 4);
    if (rng() % 10 < 3) {
      // aimed at another tenant's address
      int u = (t + 1 + static_cast<int>(rng() % (tenants - 1))) % tenants;
      engine.schedule_raw_packet(at, nets[t].vnodes[s], nets[u].vmacs[rng() % 4]);
      out.cross_packets++;
    } else {
      int d = static_cast<int>(rng() % 4);
      if (d == s) d = (d + 1) % 4;
      engine.schedule_packet(at, nets[t].vnodes[s], nets[t].vnodes[d]);
      out.legit_packets++;
    }
  }
  for (int t = 0; t < tenants; ++t)
    engine.schedule_lldp(static_cast<TenantId>(t), 100 + 50 * t);

  out.metrics = engine.run();
  for (const auto& [id, _] : g.nodes) out.substrate_node_ids.push_back(id);
  return out;
}

// ---- migration demo ----

struct MigrateDemoResult {
  Metrics metrics;
  MigrationReport report;
  MigrationPlan plan;
  std::string pre_fingerprint;
  std::string post_fingerprint;
  std::string vm_node;
};

// One tenant with endpoints in two clouds; the host of "v" is migrated
// to a third cloud mid-run. With fault injection the barrier replies
// never arrive and the migration must roll back.
inline MigrateDemoResult run_migrate_demo(std::uint64_t seed, bool with_traffic,
                                          bool fault, Tick start = 500) {
  SubstrateGraph g;
  g = add_cloud(std::move(g), {"c0", CloudKind::Public, ""});
  g = add_cloud(std::move(g), {"c1", CloudKind::Public, ""}, {{"c0", 1}});
  g = add_cloud(std::move(g), {"c2", CloudKind::Public, ""}, {{"c0", 1}, {"c1", 1}});
  for (const std::string cid : {"c0", "c1", "c2"}) {
    g = add_node(std::move(g), {cid + "-gw", cid, NodeRole::Gateway, 0});
    g = add_node(std::move(g), {cid + "-vm0", cid, NodeRole::Vm, 1});
    g = add_node(std::move(g), {cid + "-vm1", cid, NodeRole::Vm, 1});
  }
  FabricState fabric = establish(build_plan(g, TopologyKind::Mst), CostModel{});
  SimConstants c;
  Engine engine(g, fabric, c, seed);
  auto& hv = engine.hypervisor();
  TenantId tenant = hv.register_tenant();
  VirtualNetworkSpec spec;
  spec.vnodes = {{"u", 0x0A0000000001ULL, std::string("c0")},
                 {"v", 0x0A0000000002ULL, std::string("c1")}};
  spec.vlinks = {{"u", "v", 1}};
  engine.apply_submit(hv.submit_virtual_network(tenant, spec));

  MigrateDemoResult out;
  out.vm_node = *hv.vnode_host("v");
  if (with_traffic) {
    int count = fault ? 13 : 60;  // fault runs go quiet before the attempt
    engine.schedule_ping("u", "v", count, 25, 0);
  }
  engine.schedule_migration(out.vm_node, "c2", start);
  if (fault) engine.inject_barrier_fault();
  out.metrics = engine.run();
  out.report = engine.migration_report();
  out.plan = engine.migration_plan();
  out.pre_fingerprint = engine.migration_start_fingerprint();
  out.post_fingerprint = engine.state_fingerprint();
  return out;
}

// ---- snapshot round-trip checking ----

struct SnapshotCheckResult {
  int trials = 0;
  int canonical_mismatches = 0;
  int replay_mismatches = 0;
  int shift_mismatches = 0;
  bool ok() const {
    return canonical_mismatches == 0 && replay_mismatches == 0 &&
           shift_mismatches == 0;
  }
};

// Fuzzes switch states, round-trips them through the canonical JSON
// form and checks (a) the canonical text is a fixed point, (b) deadlines
// shift exactly with the restore tick and (c) a probe trace replayed
// against original and restored switches matches rule for rule.
inline SnapshotCheckResult run_snapshot_check(std::uint64_t seed, int trials = 500) {
  std::mt19937_64 rng(seed);
  SnapshotCheckResult res;
  res.trials = trials;
  for (int trial = 0; trial < trials; ++trial) {
    Tick t0 = static_cast<Tick>(rng() % 1000);
    Switch sw;
    sw.switch_id = "s" + std::to_string(trial);
    sw.host_node = "n" + std::to_string(rng() % 8);
    sw.config = {{"datapath", sw.host_node}, {"mode", rng() % 2 ? "edge" : "core"}};
    int nq = static_cast<int>(rng() % 3);
    for (int q = 0; q < nq; ++q)
      sw.queues.push_back({"q" + std::to_string(q),
                           static_cast<long long>(rng() % 10000),
                           static_cast<long long>(rng() % 64)});
    int nrules = 1 + static_cast<int>(rng() % 12);
    for (int r = 0; r < nrules; ++r) {
      FlowRule rule;
      rule.rule_id = r + 1;
      rule.priority = static_cast<int>(rng() % 5);
      if (rng() % 2) rule.match.in_port = "p" + std::to_string(rng() % 4);
      if (rng() % 2) rule.match.src_mac = rng() % 6;
      if (rng() % 2) rule.match.dst_mac = rng() % 6;
      int nact = 1 + static_cast<int>(rng() % 2);
      for (int a = 0; a < nact; ++a) {
        switch (rng() % 5) {
          case 0: rule.actions.push_back(Action::forward("out" + std::to_string(rng() % 4))); break;
          case 1: rule.actions.push_back(Action::rewrite_src(rng() % 100)); break;
          case 2: rule.actions.push_back(Action::rewrite_dst(rng() % 100)); break;
          case 3: rule.actions.push_back(Action::to_controller()); break;
          default: rule.actions.push_back(Action::drop()); break;
        }
      }
      rule.packets = rng() % 100000;
      rule.bytes = rule.packets * (64 + rng() % 1400);
      rule.install_tick = t0 - static_cast<Tick>(rng() % 100);
      if (rng() % 2) {
        rule.idle_timeout = 1 + static_cast<Tick>(rng() % 100);
        rule.idle_deadline = t0 + 1 + static_cast<Tick>(rng() % *rule.idle_timeout);
      }
      if (rng() % 3 == 0) {
        rule.hard_timeout = 1 + static_cast<Tick>(rng() % 300);
        rule.hard_deadline = t0 + 1 + static_cast<Tick>(rng() % *rule.hard_timeout);
      }
      if (rng() % 2) rule.owner_vn = "vn" + std::to_string(rng() % 4);
      if (rng() % 2) rule.owner_flow = "flow" + std::to_string(rng() % 4);
      sw.rules.push_back(std::move(rule));
    }

    SwitchSnapshot snap = snapshot_switch(sw, t0);
    std::string s1 = snapshot_to_canonical_string(snap);
    SwitchSnapshot snap2 = snapshot_from_json(nlohmann::json::parse(s1));
    std::string s2 = snapshot_to_canonical_string(snap2);
    if (s1 != s2) res.canonical_mismatches++;

    Tick t1 = t0 + 1 + static_cast<Tick>(rng() % 5000);
    Switch restored = restore_switch(snap2, t1);
    for (std::size_t i = 0; i < snap2.rules.size(); ++i) {
      const auto& sr = snap2.rules[i];
      const auto& rr = restored.rules[i];
      bool ok = true;
      if (sr.idle_remaining)
        ok = ok && rr.idle_deadline && *rr.idle_deadline == t1 + *sr.idle_remaining;
      else
        ok = ok && !rr.idle_deadline;
      if (sr.hard_remaining)
        ok = ok && rr.hard_deadline && *rr.hard_deadline == t1 + *sr.hard_remaining;
      else
        ok = ok && !rr.hard_deadline;
      if (!ok) res.shift_mismatches++;
    }

    // replay the same probe trace at both time bases
    Switch orig = restore_switch(snap, t0);
    std::vector<Tick> offsets;
    Tick dt = 0;
    for (int k = 0; k < 30; ++k) {
      dt += static_cast<Tick>(rng() % 12);
      offsets.push_back(dt);
    }
    for (Tick off : offsets) {
      std::string port = "p" + std::to_string(rng() % 4);
      Mac src = rng() % 6, dst = rng() % 6;
      FlowRule* a = orig.lookup(port, src, dst, t0 + off);
      FlowRule* b = restored.lookup(port, src, dst, t1 + off);
      if ((a == nullptr) != (b == nullptr) || (a && a->rule_id != b->rule_id)) {
        res.replay_mismatches++;
      } else if (a) {
        orig.touch(*a, 100, t0 + off);
        restored.touch(*b, 100, t1 + off);
      }
    }
  }
  return res;
}

}  // namespace cloudmesh
