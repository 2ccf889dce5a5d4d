#include "doctest.h"

#include <random>

#include "cloudmesh/bench.hpp"
#include "cloudmesh/sim.hpp"
#include "helpers.hpp"

using namespace cloudmesh;

namespace {

const std::vector<MigrationStep> kPhaseOrder = {
    MigrationStep::Clone,          MigrationStep::DualReplica,
    MigrationStep::SerializeUpdates, MigrationStep::MoveVm,
    MigrationStep::Cutover,        MigrationStep::Decommission,
};

// Tree distance computed by a DFS of our own, independent of fabric_path.
int tree_distance(const std::vector<Tunnel>& tunnels, const std::string& a,
                  const std::string& b) {
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& t : tunnels) {
    adj[t.cloud_a].push_back(t.cloud_b);
    adj[t.cloud_b].push_back(t.cloud_a);
  }
  std::map<std::string, int> dist{{a, 0}};
  std::vector<std::string> frontier{a};
  while (!frontier.empty()) {
    std::vector<std::string> next;
    for (const auto& u : frontier)
      for (const auto& v : adj[u])
        if (!dist.count(v)) {
          dist[v] = dist[u] + 1;
          next.push_back(v);
        }
    frontier = std::move(next);
  }
  return dist.count(b) ? dist.at(b) : -1;
}

}  // namespace

TEST_CASE("zero-flow migration walks every phase in order") {
  auto res = run_migrate_demo(1, false, false);
  CHECK(res.report.completed);
  CHECK_FALSE(res.report.aborted);
  CHECK(res.plan.switch_order == std::vector<std::string>{res.vm_node});
  REQUIRE(res.report.phases.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(res.report.phases[i].switch_id == res.vm_node);
    CHECK(res.report.phases[i].step == kPhaseOrder[i]);
    if (i > 0) CHECK(res.report.phases[i].begin >= res.report.phases[i - 1].begin);
  }
  CHECK(res.report.packets_redirected == 0);
  CHECK(res.report.packets_lost == 0);
}

TEST_CASE("live migration loses nothing and keeps flows in order") {
  auto res = run_migrate_demo(3, true, false);
  CHECK(res.report.completed);
  CHECK(res.report.packets_lost == 0);
  CHECK(res.report.ordering_violations == 0);
  CHECK(res.report.stale_rule_inconsistencies == 0);
  CHECK(res.report.packets_redirected > 0);  // the freeze actually engaged
  CHECK(res.metrics.packets_lost == 0);
  CHECK(res.metrics.per_flow_order_violations == 0);
  CHECK(res.metrics.ping_rtt.size() == 60);
  // switches along the flow path were all processed
  CHECK(res.plan.switch_order.size() > 1);
  for (std::size_t i = 0; i + 1 < res.plan.switch_order.size(); ++i)
    CHECK(res.plan.switch_order[i] < res.plan.switch_order[i + 1]);
  // per-switch spans appear in phase order
  std::map<std::string, std::size_t> seen;
  for (const auto& span : res.report.phases) {
    CHECK(span.step == kPhaseOrder[seen[span.switch_id] % 6]);
    seen[span.switch_id]++;
  }
  for (const auto& sid : res.plan.switch_order) CHECK(seen[sid] == 6);
}

TEST_CASE("migration changes the vm placement and keeps service up") {
  auto res = run_migrate_demo(5, true, false);
  // post-state fingerprint reflects the move
  auto pre = nlohmann::json::parse(res.pre_fingerprint);
  auto post = nlohmann::json::parse(res.post_fingerprint);
  CHECK(pre["node_clouds"][res.vm_node] == "c1");
  CHECK(post["node_clouds"][res.vm_node] == "c2");
}

TEST_CASE("barrier timeout rolls back to the pre-migration state") {
  auto res = run_migrate_demo(4, true, true);
  CHECK(res.report.aborted);
  CHECK_FALSE(res.report.completed);
  CHECK(res.report.abort_reason.find("BarrierTimeout") != std::string::npos);
  CHECK(res.report.packets_lost == 0);
  CHECK(res.post_fingerprint == res.pre_fingerprint);
}

TEST_CASE("temporary tunnel exactly when clouds are not adjacent") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 3 + static_cast<int>(rng() % 4);
    std::map<CloudPair, int> weights;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        weights[make_cloud_pair(padded_id("c", i), padded_id("c", j))] =
            1 + static_cast<int>(rng() % 9);
    SubstrateGraph g = build_cloud_set(n, 1, 2, &weights);
    FabricState fabric = establish(build_plan(g, TopologyKind::Mst), CostModel{});
    Engine engine(g, fabric, SimConstants{}, 0);
    auto& hv = engine.hypervisor();
    TenantId tenant = hv.register_tenant();
    std::string src_cloud = padded_id("c", static_cast<int>(rng() % n));
    VirtualNetworkSpec spec;
    spec.vnodes = {{"m", 0x0A0000000001ULL, src_cloud}};
    engine.apply_submit(hv.submit_virtual_network(tenant, spec));
    std::string vm = *hv.vnode_host("m");
    std::string target = padded_id("c", static_cast<int>(rng() % n));
    if (target == src_cloud) continue;

    MigrationPlan plan = engine.plan_migration(vm, target);
    int dist = tree_distance(fabric.plan.tunnels, src_cloud, target);
    REQUIRE(dist >= 1);
    CHECK(plan.needs_temp_tunnel == (dist > 1));
    CHECK(static_cast<int>(plan.bridge_tunnels.size()) ==
          dist + (plan.needs_temp_tunnel ? 1 : 0));
    if (plan.needs_temp_tunnel) {
      const Tunnel& temp = plan.bridge_tunnels.back();
      CHECK(temp.tunnel_id.rfind("temp:", 0) == 0);
      auto [a, b] = make_cloud_pair(src_cloud, target);
      CHECK(temp.cloud_a == a);
      CHECK(temp.cloud_b == b);
    }
  }
}

TEST_CASE("migration planning rejects bad arguments") {
  SubstrateGraph g = build_cloud_set(2, 1, 2);
  FabricState fabric = establish(build_plan(g, TopologyKind::Mst), CostModel{});
  Engine engine(g, fabric, SimConstants{}, 0);
  CHECK_THROWS_WITH_AS(engine.plan_migration("nope", "c001"),
                       doctest::Contains("UnknownVm"), Error);
  CHECK_THROWS_WITH_AS(engine.plan_migration("c000-vm0", "nope"),
                       doctest::Contains("UnknownCloud"), Error);
  CHECK_THROWS_WITH_AS(engine.plan_migration("c000-vm0", "c000"),
                       doctest::Contains("SameCloud"), Error);
  MigrationPlan plan = engine.plan_migration("c000-vm0", "c001");
  engine.start_migration(plan, 10);
  CHECK_THROWS_WITH_AS(engine.plan_migration("c000-vm0", "c001"),
                       doctest::Contains("MigrationInProgress"), Error);
  CHECK_THROWS_WITH_AS(engine.start_migration(plan, 20),
                       doctest::Contains("MigrationInProgress"), Error);
}

TEST_CASE("suppressed timers resume with their remaining time intact") {
  auto build = [](std::optional<Tick> probe) {
    SubstrateGraph g = cmtest::add_public_cloud(SubstrateGraph{}, "c0", 2, 2);
    g = cmtest::add_public_cloud(std::move(g), "c1", 2, 2, "", {{"c0", 1}});
    FabricState fabric = establish(build_plan(g, TopologyKind::Mst), CostModel{});
    Engine engine(g, fabric, SimConstants{}, 0);
    auto& hv = engine.hypervisor();
    TenantId tenant = hv.register_tenant();
    VirtualNetworkSpec spec;
    spec.vnodes = {{"u", 0x0A0000000001ULL, std::string("c0")},
                   {"v", 0x0A0000000002ULL, std::string("c0")}};
    spec.vlinks = {{"u", "v", 1}};
    engine.apply_submit(hv.submit_virtual_network(tenant, spec));
    std::string vm = *hv.vnode_host("u");
    REQUIRE(*hv.vnode_host("v") == vm);  // co-located, single-switch route

    // hand-installed data rule whose deadline would pass mid-migration
    FlowRule rule;
    rule.rule_id = 9999;
    rule.priority = 10;
    rule.match = {"host:u", Mac(0x0A0000000001ULL), Mac(0x0A0000000002ULL)};
    rule.actions = {Action::forward("host:v")};
    rule.idle_timeout = 60;
    rule.install_tick = 0;
    rule.idle_deadline = 60;
    engine.switch_ref(vm).install(rule);

    engine.schedule_migration(vm, "c1", 40);
    if (probe) engine.schedule_packet(*probe, "u", "v");
    Metrics m = engine.run();
    const auto& report = engine.migration_report();
    REQUIRE(report.completed);
    Tick decommission = 0;
    for (const auto& span : report.phases)
      if (span.step == MigrationStep::Decommission) decommission = span.begin;
    return std::tuple(m, decommission);
  };

  auto [m0, decommission] = build(std::nullopt);
  CHECK(decommission > 40);
  // 20 ticks remained at the clone (suppressed at tick 40, deadline 60),
  // so after resuming the rule lives until decommission + 20 exactly
  Tick resumed_deadline = decommission + 20;
  auto [m1, d1] = build(resumed_deadline - 1);
  CHECK(d1 == decommission);
  CHECK(m1.packet_in_count == 0);  // matched the resumed rule
  CHECK(m1.packets_delivered == 1);
  auto [m2, d2] = build(resumed_deadline);
  CHECK(d2 == decommission);
  CHECK(m2.packet_in_count == 1);  // rule gone, miss goes to the controller
  CHECK(m2.packets_delivered == 1);
}
