// Command-line front end: runs the benchmark sweeps, the migration and
// snapshot demos, the isolation fuzzer and the acceptance report, and
// emits CSV/JSON artifacts. Outputs are deterministic for a fixed seed.

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cloudmesh/bench.hpp"
#include "cloudmesh/fit.hpp"
#include "cloudmesh/scenario.hpp"
#include "cloudmesh/sim.hpp"

using namespace cloudmesh;

namespace {

struct CommonOpts {
  std::string scenario_path;
  std::string out_path;
  std::uint64_t seed = 1;
  std::string fabric;  // "", "mst" or "mesh"
  long long cost_fixed = -1;
  long long cost_per_weight = -1;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--scenario", opts.scenario_path,
                  "Scenario file supplying base fabric/cost/constants");
  cmd->add_option("--seed", opts.seed, "Random seed");
  cmd->add_option("--out", opts.out_path, "Output path (default stdout)");
  cmd->add_option("--fabric", opts.fabric, "Tunnel fabric: mst or mesh")
      ->check(CLI::IsMember({"mst", "mesh"}));
  cmd->add_option("--tunnel-cost-fixed", opts.cost_fixed,
                  "Fixed setup cost per tunnel");
  cmd->add_option("--tunnel-cost-per-weight", opts.cost_per_weight,
                  "Setup cost per unit of tunnel weight");
}

// Resolved base configuration: scenario values first, explicit flags on
// top, CLOUDMESH_TICK_LIMIT last.
struct BaseConfig {
  TopologyKind fabric_kind = TopologyKind::Mst;
  bool fabric_explicit = false;
  CostModel cost;
  SimConstants constants;
};

BaseConfig resolve_config(const CommonOpts& opts) {
  BaseConfig cfg;
  if (!opts.scenario_path.empty()) {
    Scenario sc = load_scenario_file(opts.scenario_path);
    cfg.fabric_kind = sc.fabric_kind;
    cfg.cost = sc.cost;
    cfg.constants = sc.constants;
  }
  if (!opts.fabric.empty()) {
    cfg.fabric_kind = opts.fabric == "mesh" ? TopologyKind::FullMesh : TopologyKind::Mst;
    cfg.fabric_explicit = true;
  }
  if (opts.cost_fixed >= 0) cfg.cost.c_fixed = opts.cost_fixed;
  if (opts.cost_per_weight >= 0) cfg.cost.c_per_weight = opts.cost_per_weight;
  if (const char* env = std::getenv("CLOUDMESH_TICK_LIMIT"))
    cfg.constants.tick_limit = std::strtoll(env, nullptr, 10);
  return cfg;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::fputs(text.c_str(), stdout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

nlohmann::json fabric_to_json(const FabricState& st) {
  nlohmann::json j;
  j["topology"] = st.plan.topology_kind == TopologyKind::Mst ? "mst" : "mesh";
  j["total_weight"] = st.plan.total_weight;
  j["setup_cost"] = st.setup_cost;
  j["established_count"] = st.established_count;
  j["tunnels"] = nlohmann::json::array();
  for (const auto& t : st.plan.tunnels)
    j["tunnels"].push_back({{"tunnel_id", t.tunnel_id},
                            {"cloud_a", t.cloud_a},
                            {"cloud_b", t.cloud_b},
                            {"weight", t.weight}});
  return j;
}

nlohmann::json report_to_json(const MigrationReport& r) {
  nlohmann::json j;
  j["completed"] = r.completed;
  j["aborted"] = r.aborted;
  j["abort_reason"] = r.abort_reason;
  j["begin_tick"] = r.begin_tick;
  j["end_tick"] = r.end_tick;
  j["packets_redirected"] = r.packets_redirected;
  j["packets_lost"] = r.packets_lost;
  j["ordering_violations"] = r.ordering_violations;
  j["stale_rule_inconsistencies"] = r.stale_rule_inconsistencies;
  j["phases"] = nlohmann::json::array();
  for (const auto& p : r.phases)
    j["phases"].push_back({{"switch_id", p.switch_id},
                           {"step", migration_step_name(p.step)},
                           {"begin", p.begin},
                           {"end", p.end}});
  return j;
}

nlohmann::json plan_to_json(const MigrationPlan& p) {
  nlohmann::json j;
  j["vm_id"] = p.vm_id;
  j["source_cloud"] = p.source_cloud;
  j["target_cloud"] = p.target_cloud;
  j["switch_order"] = p.switch_order;
  j["needs_temp_tunnel"] = p.needs_temp_tunnel;
  j["bridge_tunnels"] = nlohmann::json::array();
  for (const auto& t : p.bridge_tunnels) j["bridge_tunnels"].push_back(t.tunnel_id);
  return j;
}

// ---- setup-bench ----

int cmd_setup_bench(const CommonOpts& opts, int lo, int hi,
                    const std::string& dump_fabric) {
  if (lo < 2 || hi < lo) throw Error(Errc::InvalidSpec, "cloud range must be 2..n");
  BaseConfig cfg = resolve_config(opts);
  std::vector<TopologyKind> kinds;
  if (cfg.fabric_explicit)
    kinds = {cfg.fabric_kind};
  else
    kinds = {TopologyKind::Mst, TopologyKind::FullMesh};

  std::ostringstream csv;
  csv << "n_clouds,fabric_kind,tunnel_count,setup_cost\n";
  std::ostringstream fits;
  fits << "series,fit_degree,r_squared,coeff0,coeff1,coeff2\n";
  for (TopologyKind kind : kinds) {
    std::string name = kind == TopologyKind::Mst ? "mst" : "mesh";
    std::vector<double> xs, ys;
    for (const auto& row : run_setup_bench(lo, hi, kind, cfg.cost)) {
      csv << row.clouds << "," << name << "," << row.tunnels << ","
          << row.setup_cost << "\n";
      xs.push_back(row.clouds);
      ys.push_back(static_cast<double>(row.setup_cost));
    }
    int degree = kind == TopologyKind::Mst ? 1 : 2;
    if (xs.size() > static_cast<std::size_t>(degree)) {
      PolyFit fit = polyfit(xs, ys, degree);
      fits << name << "," << degree << "," << fmt(fit.r_squared);
      for (int d = 0; d <= 2; ++d)
        fits << "," << (d < static_cast<int>(fit.coeffs.size()) ? fmt(fit.coeffs[d]) : "");
      fits << "\n";
    }
  }
  write_output(opts.out_path, csv.str() + "\n" + fits.str());

  if (!dump_fabric.empty()) {
    SubstrateGraph g = build_cloud_set(hi, 0);
    FabricState st = establish(build_plan(g, kinds.front()), cfg.cost);
    write_output(dump_fabric, fabric_to_json(st).dump(2) + "\n");
  }
  return 0;
}

// ---- control-bench ----

int cmd_control_bench(const CommonOpts& opts, int reps) {
  if (reps < 1) throw Error(Errc::InvalidSpec, "repetitions must be >= 1");
  if (!opts.scenario_path.empty()) resolve_config(opts);  // validate only
  int requests = reps * 1000;
  std::vector<int> sweep = {10, 20, 50, 100, 200, 500, 1000};

  std::ostringstream csv;
  csv << "n_virtual_networks,n_requests,mean_steps_baseline,mean_steps_virtualized,delta\n";
  std::vector<double> deltas;
  for (int n : sweep) {
    ControlRow base = run_control_bench(n, requests, false);
    ControlRow virt = run_control_bench(n, requests, true);
    double delta = virt.mean_steps - base.mean_steps;
    deltas.push_back(delta);
    csv << n << "," << requests << "," << fmt(base.mean_steps) << ","
        << fmt(virt.mean_steps) << "," << fmt(delta) << "\n";
  }
  bool stable = true;
  for (double d : deltas)
    if (d > deltas.front() * 1.1 || d < deltas.front() * 0.9) stable = false;
  csv << "\ndelta_stable," << (stable ? "true" : "false") << "\n";
  write_output(opts.out_path, csv.str());
  if (!stable) {
    std::fprintf(stderr, "translation overhead drifted across the sweep\n");
    return 2;
  }
  return 0;
}

// ---- data-bench ----

// Steady-state stream throughput across the single bottleneck tunnel of
// the three-cloud chain. All packets are injected up front, so delivery
// spacing in the tail is exactly packet_size / tunnel_bandwidth.
double stream_throughput(bool virtualized, SimConstants base, long long bandwidth) {
  SubstrateGraph g = detail::data_bench_graph();
  FabricState fabric = establish(build_plan(g, TopologyKind::Mst), CostModel{});
  base.virtualized = virtualized;
  base.tunnel_bandwidth = bandwidth;
  Engine engine(g, fabric, base, 0);
  auto& hv = engine.hypervisor();
  TenantId tenant = hv.register_tenant();
  VirtualNetworkSpec spec;
  spec.vnodes = {{"u", 0x0A0000000001ULL, std::string("c0")},
                 {"v", 0x0A0000000002ULL, std::string("c1")}};
  spec.vlinks = {{"u", "v", 1}};
  auto result = hv.submit_virtual_network(tenant, spec);
  if (virtualized) {
    engine.apply_submit(result);
  } else {
    engine.add_baseline_host("u", result.embedding.vnode_map.at("u"), 0x0A0000000001ULL);
    engine.add_baseline_host("v", result.embedding.vnode_map.at("v"), 0x0A0000000002ULL);
  }
  const long long psize = 1000;
  for (int i = 0; i < 40; ++i) engine.schedule_packet(0, "u", "v", psize);
  Metrics m = engine.run();
  const auto& lat = m.per_packet_latency;
  if (lat.size() < 2) return 0.0;
  Tick spacing = lat[lat.size() - 1] - lat[lat.size() - 2];
  return spacing > 0 ? static_cast<double>(psize) / spacing : 0.0;
}

int cmd_data_bench(const CommonOpts& opts, long long stream_bandwidth) {
  BaseConfig cfg = resolve_config(opts);
  std::ostringstream csv;
  csv << "measure,tunnels_on_path,raw,virtualized,diff,expected\n";
  for (const auto& row : run_data_bench(cfg.constants))
    csv << "ping_latency," << row.tunnels_on_path << "," << row.raw_latency << ","
        << row.virt_latency << "," << row.diff << "," << row.expected_diff << "\n";
  double raw_tp = stream_throughput(false, cfg.constants, stream_bandwidth);
  double virt_tp = stream_throughput(true, cfg.constants, stream_bandwidth);
  csv << "stream_throughput,1," << fmt(raw_tp) << "," << fmt(virt_tp) << ","
      << fmt(virt_tp - raw_tp) << "," << stream_bandwidth << "\n";
  write_output(opts.out_path, csv.str());
  return 0;
}

// ---- migrate-demo ----

int cmd_migrate_demo(const CommonOpts& opts, bool fault, bool no_traffic, Tick start,
                     const std::string& csv_path) {
  if (start < 0) throw Error(Errc::InvalidSpec, "start tick must be >= 0");
  if (!opts.scenario_path.empty()) resolve_config(opts);  // validate only
  auto res = run_migrate_demo(opts.seed, !no_traffic, fault, start);
  nlohmann::json j;
  j["report"] = report_to_json(res.report);
  j["plan"] = plan_to_json(res.plan);
  j["metrics"] = res.metrics.to_json();
  j["vm_node"] = res.vm_node;
  j["rolled_back_cleanly"] =
      !res.report.aborted || res.post_fingerprint == res.pre_fingerprint;
  write_output(opts.out_path, j.dump(2) + "\n");
  if (!csv_path.empty()) {
    std::ostringstream csv;
    csv << "switch_id,phase,begin,end\n";
    for (const auto& p : res.report.phases)
      csv << p.switch_id << "," << migration_step_name(p.step) << "," << p.begin
          << "," << p.end << "\n";
    write_output(csv_path, csv.str());
  }
  return 0;
}

// ---- snapshot-check ----

int cmd_snapshot_check(const CommonOpts& opts, int trials) {
  if (trials < 1) throw Error(Errc::InvalidSpec, "trials must be >= 1");
  auto res = run_snapshot_check(opts.seed, trials);
  nlohmann::json j;
  j["trials"] = res.trials;
  j["canonical_mismatches"] = res.canonical_mismatches;
  j["shift_mismatches"] = res.shift_mismatches;
  j["replay_mismatches"] = res.replay_mismatches;
  j["ok"] = res.ok();
  write_output(opts.out_path, j.dump(2) + "\n");
  return res.ok() ? 0 : 1;
}

// ---- isolation-fuzz ----

int cmd_isolation_fuzz(const CommonOpts& opts, int tenants, int packets) {
  if (tenants < 3) throw Error(Errc::InvalidSpec, "need at least 3 tenants");
  if (packets < 1) throw Error(Errc::InvalidSpec, "need at least 1 packet");
  auto res = run_isolation_fuzz(opts.seed, tenants, packets);
  long long leaks = 0;
  for (const auto& resp : res.metrics.lldp_responses)
    for (const auto& node : res.substrate_node_ids)
      if (resp.find(node) != std::string::npos) leaks++;
  nlohmann::json j;
  j["tenants"] = res.tenants;
  j["legit_packets"] = res.legit_packets;
  j["cross_tenant_packets_sent"] = res.cross_packets;
  j["topology_leaks"] = leaks;
  j["metrics"] = res.metrics.to_json();
  write_output(opts.out_path, j.dump(2) + "\n");
  bool ok = res.metrics.cross_tenant_deliveries == 0 &&
            res.metrics.misdeliveries == 0 && leaks == 0;
  return ok ? 0 : 1;
}

// ---- report (acceptance suite) ----

// Exhaustive minimum spanning weight over all edge subsets; n <= 6 keeps
// this instant and independent of the production Kruskal.
long long exhaustive_min_spanning(int n, const std::vector<std::array<int, 3>>& edges) {
  int m = static_cast<int>(edges.size());
  long long best = -1;
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    if (__builtin_popcount(mask) != n - 1) continue;
    std::vector<int> parent(n);
    for (int i = 0; i < n; ++i) parent[i] = i;
    std::function<int(int)> find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    long long weight = 0;
    int joined = 0;
    for (int e = 0; e < m; ++e) {
      if (!(mask & (1u << e))) continue;
      weight += edges[e][2];
      int a = find(edges[e][0]), b = find(edges[e][1]);
      if (a != b) {
        parent[a] = b;
        joined++;
      }
    }
    if (joined == n - 1 && (best < 0 || weight < best)) best = weight;
  }
  return best;
}

struct Criterion {
  std::string name;
  bool pass = true;
  std::string detail;
};

int cmd_report(const CommonOpts& opts) {
  std::vector<Criterion> out;
  auto check = [&](const std::string& name, const std::function<std::string()>& fn) {
    Criterion c;
    c.name = name;
    try {
      c.detail = fn();
    } catch (const std::exception& e) {
      c.pass = false;
      c.detail = std::string("exception: ") + e.what();
    }
    if (c.detail.rfind("FAIL", 0) == 0) c.pass = false;
    out.push_back(std::move(c));
  };

  check("tunnel counts: mst n-1, mesh n(n-1)/2 for n=2..32", [] {
    CostModel cost{5, 1};
    for (const auto& row : run_setup_bench(2, 32, TopologyKind::Mst, cost))
      if (row.tunnels != row.clouds - 1) return std::string("FAIL at n=" + std::to_string(row.clouds));
    for (const auto& row : run_setup_bench(2, 32, TopologyKind::FullMesh, cost))
      if (row.tunnels != static_cast<long long>(row.clouds) * (row.clouds - 1) / 2)
        return std::string("FAIL at n=" + std::to_string(row.clouds));
    return std::string("exact for both fabrics");
  });

  check("setup cost: linear (mst) and quadratic (mesh) fits, R^2 >= 0.999", [] {
    CostModel cost{5, 1};
    std::vector<double> xs, mst_y, mesh_y;
    for (const auto& row : run_setup_bench(2, 32, TopologyKind::Mst, cost)) {
      xs.push_back(row.clouds);
      mst_y.push_back(static_cast<double>(row.setup_cost));
    }
    for (const auto& row : run_setup_bench(2, 32, TopologyKind::FullMesh, cost))
      mesh_y.push_back(static_cast<double>(row.setup_cost));
    PolyFit lf = polyfit(xs, mst_y, 1);
    PolyFit qf = polyfit(xs, mesh_y, 2);
    if (lf.r_squared < 0.999) return std::string("FAIL mst R^2 " + fmt(lf.r_squared));
    if (qf.r_squared < 0.999 || qf.coeffs[2] <= 0)
      return std::string("FAIL mesh fit");
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (xs[i] >= 3 && mesh_y[i] <= mst_y[i]) return std::string("FAIL mesh <= mst");
    return "mst R^2 " + fmt(lf.r_squared) + ", mesh R^2 " + fmt(qf.r_squared);
  });

  check("mst equals the exhaustive spanning-tree optimum", [&] {
    std::mt19937_64 rng(opts.seed + 1000);
    for (int trial = 0; trial < 40; ++trial) {
      int n = 4 + static_cast<int>(rng() % 3);  // 4..6 clouds
      std::vector<std::string> ids;
      for (int i = 0; i < n; ++i) ids.push_back("c" + std::to_string(i));
      SubstrateGraph g;
      std::vector<std::array<int, 3>> edges;
      for (int i = 0; i < n; ++i) {
        std::map<std::string, int> w;
        for (int j = 0; j < i; ++j) {
          int wt = 1 + static_cast<int>(rng() % 20);
          w[ids[j]] = wt;
          edges.push_back({i, j, wt});
        }
        g = add_cloud(std::move(g), {ids[i], CloudKind::Public, ""}, w);
      }
      long long got = build_mst(g).total_weight;
      long long want = exhaustive_min_spanning(n, edges);
      if (got != want) return std::string("FAIL trial " + std::to_string(trial));
    }
    return std::string("40 random weightings, exact");
  });

  check("tenant space: 65536 admitted then rejected, >= 10x vlan space", [] {
    SubstrateGraph g;
    g = add_cloud(std::move(g), {"c0", CloudKind::Public, ""});
    g = add_node(std::move(g), {"c0-gw", "c0", NodeRole::Gateway, 0});
    FabricState fabric = establish(build_plan(g, TopologyKind::Mst), CostModel{});
    Hypervisor hv(g, fabric);
    for (int i = 0; i < 65536; ++i) hv.register_tenant();
    try {
      hv.register_tenant();
      return std::string("FAIL: 65537th tenant admitted");
    } catch (const Error& e) {
      if (e.code() != Errc::TenantSpaceExhausted) return std::string("FAIL: wrong error");
    }
    if (65536 / 4094 < 10) return std::string("FAIL: ratio");
    return std::string("65536 tenants, ratio 16x vlan space");
  });

  check("isolation fuzz: 0 cross-tenant deliveries over 5 seeds, clean topology", [&] {
    long long total = 0;
    for (std::uint64_t s = opts.seed; s < opts.seed + 5; ++s) {
      auto res = run_isolation_fuzz(s, 4, 2500);
      total += res.metrics.packets_injected;
      if (res.metrics.cross_tenant_deliveries != 0 || res.metrics.misdeliveries != 0)
        return std::string("FAIL at seed " + std::to_string(s));
      for (const auto& resp : res.metrics.lldp_responses)
        for (const auto& node : res.substrate_node_ids)
          if (resp.find(node) != std::string::npos)
            return std::string("FAIL: substrate id leaked");
    }
    if (total < 10000) return std::string("FAIL: volume " + std::to_string(total));
    return std::to_string(total) + " packets, zero crossings";
  });

  check("reactive setup: 1 packet-in per flow, 1 more after idle expiry", [] {
    auto run_with = [](std::vector<Tick> at) {
      SubstrateGraph g;
      g = add_cloud(std::move(g), {"c0", CloudKind::Public, ""});
      g = add_node(std::move(g), {"c0-gw", "c0", NodeRole::Gateway, 0});
      g = add_node(std::move(g), {"c0-vm0", "c0", NodeRole::Vm, 2});
      FabricState fabric = establish(build_plan(g, TopologyKind::Mst), CostModel{});
      Engine engine(g, fabric, SimConstants{}, 0);
      auto& hv = engine.hypervisor();
      TenantId tenant = hv.register_tenant();
      VirtualNetworkSpec spec;
      spec.vnodes = {{"u", 0x0A0000000001ULL, std::nullopt},
                     {"v", 0x0A0000000002ULL, std::nullopt}};
      spec.vlinks = {{"u", "v", 1}};
      engine.apply_submit(hv.submit_virtual_network(tenant, spec));
      for (Tick t : at) engine.schedule_packet(t, "u", "v");
      Metrics m = engine.run();
      return m.packet_ins_per_flow.at(
          make_flow_id(tenant, 0x0A0000000001ULL, 0x0A0000000002ULL, true));
    };
    if (run_with({0, 10, 20}) != 1) return std::string("FAIL: before expiry");
    if (run_with({0, 10, 300}) != 2) return std::string("FAIL: after expiry");
    return std::string("exact");
  });

  check("control overhead flat in network count, baseline untranslated", [] {
    ControlRow small = run_control_bench(10, 4000, true);
    ControlRow large = run_control_bench(1000, 4000, true);
    if (large.mean_steps > small.mean_steps * 1.1 ||
        large.mean_steps < small.mean_steps * 0.9)
      return std::string("FAIL: " + fmt(small.mean_steps) + " vs " + fmt(large.mean_steps));
    if (run_control_bench(10, 4000, false).translation_steps != 0)
      return std::string("FAIL: baseline translated");
    return fmt(small.mean_steps) + " vs " + fmt(large.mean_steps) + " steps/request";
  });

  check("data overhead = encap x tunnels on path, 0 intra-cloud", [] {
    for (const auto& row : run_data_bench())
      if (row.diff != row.expected_diff ||
          (row.tunnels_on_path == 0 && row.diff != 0))
        return std::string("FAIL at " + std::to_string(row.tunnels_on_path) + " tunnels");
    return std::string("closed form matches measurement");
  });

  check("snapshot fidelity over 500 fuzzed switches", [&] {
    auto res = run_snapshot_check(opts.seed + 30, 500);
    if (!res.ok())
      return std::string("FAIL: " + std::to_string(res.canonical_mismatches) + "/" +
                         std::to_string(res.shift_mismatches) + "/" +
                         std::to_string(res.replay_mismatches));
    return std::string("500 round trips, replays and shifts exact");
  });

  check("migration: lossless and in order; barrier fault rolls back", [&] {
    auto live = run_migrate_demo(opts.seed + 2, true, false);
    if (!live.report.completed || live.report.packets_lost != 0 ||
        live.report.ordering_violations != 0 ||
        live.report.stale_rule_inconsistencies != 0 ||
        live.metrics.ping_rtt.size() != 60)
      return std::string("FAIL: live run");
    auto aborted = run_migrate_demo(opts.seed + 3, true, true);
    if (!aborted.report.aborted || aborted.post_fingerprint != aborted.pre_fingerprint)
      return std::string("FAIL: rollback");
    return std::string("0 lost, 0 reordered, rollback state-equal");
  });

  check("determinism: byte-identical outputs per seed", [&] {
    auto a = run_isolation_fuzz(opts.seed + 76, 4, 1500);
    auto b = run_isolation_fuzz(opts.seed + 76, 4, 1500);
    if (a.metrics.to_json().dump() != b.metrics.to_json().dump())
      return std::string("FAIL: fuzz");
    auto m1 = run_migrate_demo(opts.seed + 8, true, false);
    auto m2 = run_migrate_demo(opts.seed + 8, true, false);
    if (m1.metrics.to_json().dump() != m2.metrics.to_json().dump() ||
        m1.post_fingerprint != m2.post_fingerprint)
      return std::string("FAIL: migration");
    return std::string("repeat runs identical");
  });

  bool all = true;
  nlohmann::json j;
  j["criteria"] = nlohmann::json::array();
  for (const auto& c : out) {
    j["criteria"].push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    all = all && c.pass;
  }
  j["all_pass"] = all;
  write_output(opts.out_path, j.dump(2) + "\n");
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-cloud network virtualization benchmarks"};
  app.require_subcommand(1);

  CommonOpts opts;
  int lo = 2, hi = 32, reps = 4, trials = 500, tenants = 4, packets = 2500;
  long long stream_bandwidth = 500;
  bool fault = false, no_traffic = false;
  Tick start = 500;
  std::string dump_fabric, csv_path;

  auto* setup = app.add_subcommand("setup-bench", "Tunnel fabric setup cost sweep");
  add_common(setup, opts);
  setup->add_option("--min-clouds", lo, "Smallest cloud count");
  setup->add_option("--max-clouds", hi, "Largest cloud count");
  setup->add_option("--dump-fabric", dump_fabric,
                    "Write the largest fabric as JSON to this path");

  auto* control = app.add_subcommand("control-bench", "Per-request translation cost sweep");
  add_common(control, opts);
  control->add_option("--reps", reps, "Requests per point = reps x 1000");

  auto* data = app.add_subcommand("data-bench", "Latency and throughput overhead");
  add_common(data, opts);
  data->add_option("--stream-bandwidth", stream_bandwidth,
                   "Bottleneck tunnel bandwidth for the stream row (bytes/tick)");

  auto* migrate = app.add_subcommand("migrate-demo", "Live migration under traffic");
  add_common(migrate, opts);
  migrate->add_flag("--fault", fault, "Drop barrier replies to force a rollback");
  migrate->add_flag("--no-traffic", no_traffic, "Migrate with the network quiet");
  migrate->add_option("--start", start, "Migration start tick");
  migrate->add_option("--csv", csv_path, "Also write the phase timeline as CSV");

  auto* snap = app.add_subcommand("snapshot-check", "Switch snapshot round-trip fuzzing");
  add_common(snap, opts);
  snap->add_option("--trials", trials, "Fuzzed switches to round-trip");

  auto* fuzz = app.add_subcommand("isolation-fuzz", "Cross-tenant traffic fuzzing");
  add_common(fuzz, opts);
  fuzz->add_option("--tenants", tenants, "Tenant count (>= 3)");
  fuzz->add_option("--packets", packets, "Packets to inject");

  auto* report = app.add_subcommand("report", "Run the acceptance suite");
  add_common(report, opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (setup->parsed()) return cmd_setup_bench(opts, lo, hi, dump_fabric);
    if (control->parsed()) return cmd_control_bench(opts, reps);
    if (data->parsed()) return cmd_data_bench(opts, stream_bandwidth);
    if (migrate->parsed()) return cmd_migrate_demo(opts, fault, no_traffic, start, csv_path);
    if (snap->parsed()) return cmd_snapshot_check(opts, trials);
    if (fuzz->parsed()) return cmd_isolation_fuzz(opts, tenants, packets);
    if (report->parsed()) return cmd_report(opts);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
