// Acceptance checks for the virtualization stack. Each numbered check
// prints one pass/fail line; the process exits nonzero if any fail.

#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "cloudmesh/bench.hpp"
#include "cloudmesh/fit.hpp"
#include "cloudmesh/hypervisor.hpp"
#include "cloudmesh/sim.hpp"
#include "helpers.hpp"

using namespace cloudmesh;

namespace {

bool g_ok = true;
std::vector<std::string> g_notes;

void expect(bool cond, const std::string& what) {
  if (!cond) {
    g_ok = false;
    g_notes.push_back(what);
  }
}

struct SmallRig {
  Engine engine;
  TenantId tenant;
};

SmallRig small_rig() {
  SubstrateGraph g = cmtest::add_public_cloud(SubstrateGraph{}, "c0", 2, 1);
  FabricState fabric = establish(build_plan(g, TopologyKind::Mst), CostModel{});
  SmallRig rig{Engine(std::move(g), fabric, SimConstants{}, 0), 0};
  auto& hv = rig.engine.hypervisor();
  rig.tenant = hv.register_tenant();
  VirtualNetworkSpec spec;
  spec.vnodes = {{"u", 0x0A0000000001ULL, std::nullopt},
                 {"v", 0x0A0000000002ULL, std::nullopt}};
  spec.vlinks = {{"u", "v", 1}};
  rig.engine.apply_submit(hv.submit_virtual_network(rig.tenant, spec));
  return rig;
}

// ---- the individual checks ----

void check_tunnel_counts() {
  CostModel cost{5, 1};
  auto mst = run_setup_bench(2, 32, TopologyKind::Mst, cost);
  auto mesh = run_setup_bench(2, 32, TopologyKind::FullMesh, cost);
  for (const auto& row : mst)
    expect(row.tunnels == row.clouds - 1,
           "mst tunnels at n=" + std::to_string(row.clouds));
  for (const auto& row : mesh)
    expect(row.tunnels == static_cast<long long>(row.clouds) * (row.clouds - 1) / 2,
           "mesh tunnels at n=" + std::to_string(row.clouds));
}

void check_setup_scaling() {
  CostModel cost{5, 1};
  std::vector<double> xs, mst_y, mesh_y;
  for (const auto& row : run_setup_bench(2, 32, TopologyKind::Mst, cost)) {
    xs.push_back(row.clouds);
    mst_y.push_back(static_cast<double>(row.setup_cost));
  }
  for (const auto& row : run_setup_bench(2, 32, TopologyKind::FullMesh, cost))
    mesh_y.push_back(static_cast<double>(row.setup_cost));
  expect(polyfit(xs, mst_y, 1).r_squared >= 0.999, "mst linear fit");
  expect(polyfit(xs, mesh_y, 2).r_squared >= 0.999, "mesh quadratic fit");
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (xs[i] >= 3)
      expect(mesh_y[i] > mst_y[i], "mesh cost above mst at n=" + std::to_string((int)xs[i]));
}

void check_mst_optimality() {
  std::mt19937_64 rng(2029);
  for (int trial = 0; trial < 100; ++trial) {
    int n = 4 + static_cast<int>(rng() % 4);  // 4..7 clouds
    std::vector<std::string> ids;
    for (int i = 0; i < n; ++i) ids.push_back("c" + std::to_string(i));
    SubstrateGraph g;
    std::map<CloudPair, int> weights;
    for (int i = 0; i < n; ++i) {
      std::map<std::string, int> w;
      for (int j = 0; j < i; ++j) {
        int wt = 1 + static_cast<int>(rng() % 20);
        w[ids[j]] = wt;
        weights[make_cloud_pair(ids[i], ids[j])] = wt;
      }
      g = add_cloud(std::move(g), {ids[i], CloudKind::Public, ""}, w);
    }
    long long got = build_mst(g).total_weight;
    long long want = cmtest::prufer_min_spanning_weight(n, weights, ids);
    expect(got == want, "mst weight trial " + std::to_string(trial));
    if (got != want) return;
  }
}

void check_tenant_space() {
  SubstrateGraph g = cmtest::add_public_cloud(SubstrateGraph{}, "c0", 1);
  FabricState fabric = establish(build_plan(g, TopologyKind::Mst), CostModel{});
  Hypervisor hv(g, fabric);
  for (int i = 0; i < 65536; ++i) {
    TenantId id = hv.register_tenant();
    if (i == 0 || i == 65535)
      expect(id == static_cast<TenantId>(i), "tenant id sequence");
  }
  bool threw = false;
  try {
    hv.register_tenant();
  } catch (const Error& e) {
    threw = e.code() == Errc::TenantSpaceExhausted;
  }
  expect(threw, "65537th tenant must be rejected");
  expect(65536 / 4094 >= 10, "tenant space versus vlan space");
}

void check_isolation_fuzz() {
  long long total_packets = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto res = run_isolation_fuzz(seed, 4, 2500);
    total_packets += res.metrics.packets_injected;
    expect(res.tenants >= 3, "tenant count");
    expect(res.metrics.cross_tenant_deliveries == 0,
           "cross-tenant delivery at seed " + std::to_string(seed));
    expect(res.metrics.misdeliveries == 0, "misdelivery at seed " + std::to_string(seed));
    expect(res.metrics.packets_delivered > 0, "fuzz traffic flowed");
    for (const auto& resp : res.metrics.lldp_responses)
      for (const auto& node : res.substrate_node_ids)
        expect(resp.find(node) == std::string::npos,
               "substrate id in topology response: " + node);
  }
  expect(total_packets >= 10000, "fuzz volume");
}

void check_reactive_flow_setup() {
  {
    auto rig = small_rig();
    rig.engine.schedule_packet(0, "u", "v");
    rig.engine.schedule_packet(10, "u", "v");
    rig.engine.schedule_packet(20, "u", "v");
    Metrics m = rig.engine.run();
    std::string flow =
        make_flow_id(rig.tenant, 0x0A0000000001ULL, 0x0A0000000002ULL, true);
    expect(m.packet_ins_per_flow.at(flow) == 1, "one packet-in before expiry");
  }
  {
    auto rig = small_rig();
    rig.engine.schedule_packet(0, "u", "v");
    rig.engine.schedule_packet(10, "u", "v");
    rig.engine.schedule_packet(300, "u", "v");  // after the idle timeout
    Metrics m = rig.engine.run();
    std::string flow =
        make_flow_id(rig.tenant, 0x0A0000000001ULL, 0x0A0000000002ULL, true);
    expect(m.packet_ins_per_flow.at(flow) == 2, "one more packet-in after expiry");
    expect(m.packets_delivered == 3, "all packets delivered");
  }
}

void check_control_overhead() {
  ControlRow small = run_control_bench(10, 4000, true);
  ControlRow large = run_control_bench(1000, 4000, true);
  expect(small.mean_steps > 0, "steps measured");
  expect(large.mean_steps <= small.mean_steps * 1.1 &&
             large.mean_steps >= small.mean_steps * 0.9,
         "mean steps at 1000 networks within 10% of 10 networks");
  ControlRow base = run_control_bench(10, 4000, false);
  expect(base.translation_steps == 0, "baseline translation steps");
}

void check_data_overhead() {
  for (const auto& row : run_data_bench()) {
    expect(row.diff == row.expected_diff,
           "latency delta at " + std::to_string(row.tunnels_on_path) + " tunnels");
    if (row.tunnels_on_path == 0)
      expect(row.diff == 0, "intra-cloud overhead must be zero");
  }
}

void check_snapshots() {
  auto res = run_snapshot_check(31, 500);
  expect(res.trials == 500, "snapshot trials");
  expect(res.canonical_mismatches == 0, "canonical round trips");
  expect(res.shift_mismatches == 0, "deadline shifts");
  expect(res.replay_mismatches == 0, "trace replays");
}

void check_migration() {
  auto live = run_migrate_demo(3, true, false);
  expect(live.report.completed, "migration completed");
  expect(live.report.packets_lost == 0, "no loss during migration");
  expect(live.report.ordering_violations == 0, "no reordering during migration");
  expect(live.report.stale_rule_inconsistencies == 0, "no stale rules");
  expect(live.metrics.ping_rtt.size() == 60, "service stayed up");

  auto aborted = run_migrate_demo(4, true, true);
  expect(aborted.report.aborted, "barrier timeout aborts");
  expect(aborted.post_fingerprint == aborted.pre_fingerprint,
         "rollback restores the pre-migration state");
}

void check_determinism() {
  auto a = run_isolation_fuzz(77, 4, 1500);
  auto b = run_isolation_fuzz(77, 4, 1500);
  expect(a.metrics.to_json().dump() == b.metrics.to_json().dump(),
         "fuzz metrics byte-identical per seed");
  auto m1 = run_migrate_demo(9, true, false);
  auto m2 = run_migrate_demo(9, true, false);
  expect(m1.metrics.to_json().dump() == m2.metrics.to_json().dump(),
         "migration run byte-identical per seed");
  expect(m1.post_fingerprint == m2.post_fingerprint, "state fingerprints match");
}

struct Check {
  const char* name;
  std::function<void()> fn;
};

}  // namespace

int main() {
  std::vector<Check> checks = {
      {"tunnel counts (mst n-1, mesh n(n-1)/2, n=2..32)", check_tunnel_counts},
      {"setup cost scaling (linear vs quadratic, R^2 >= 0.999)", check_setup_scaling},
      {"mst equals exhaustive spanning-tree optimum (100 weightings)", check_mst_optimality},
      {"tenant space (65536 then reject, >=10x vlan space)", check_tenant_space},
      {"isolation fuzz (>=10^4 packets, >=3 tenants, 5 seeds)", check_isolation_fuzz},
      {"reactive setup (1 packet-in per flow, 1 more after idle expiry)", check_reactive_flow_setup},
      {"control overhead flat in network count, baseline untranslated", check_control_overhead},
      {"data overhead = encap x tunnels on path, 0 intra-cloud", check_data_overhead},
      {"snapshot round trips, deadline shifts, trace replays (500)", check_snapshots},
      {"migration: no loss/reorder/stale rules, rollback restores", check_migration},
      {"determinism: byte-identical outputs per seed", check_determinism},
  };

  bool all_ok = true;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    g_ok = true;
    g_notes.clear();
    try {
      checks[i].fn();
    } catch (const std::exception& e) {
      g_ok = false;
      g_notes.push_back(std::string("exception: ") + e.what());
    }
    std::printf("[%2zu] %s %s\n", i + 1, g_ok ? "PASS" : "FAIL", checks[i].name);
    for (const auto& note : g_notes) std::printf("     - %s\n", note.c_str());
    all_ok = all_ok && g_ok;
  }
  std::printf("%s\n", all_ok ? "ALL CHECKS PASSED" : "CHECKS FAILED");
  return all_ok ? 0 : 1;
}
