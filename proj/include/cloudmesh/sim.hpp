#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "cloudmesh/fabric.hpp"
#include "cloudmesh/flow.hpp"
#include "cloudmesh/hypervisor.hpp"
#include "cloudmesh/migration.hpp"
#include "cloudmesh/snapshot.hpp"
#include "cloudmesh/substrate.hpp"
#include "cloudmesh/types.hpp"

namespace cloudmesh {

// All wall-clock quantities are integer ticks. Defaults keep inter-cloud
// latency well above intra-cloud latency.
struct SimConstants {
  Tick hop_latency = 1;            // per intra-cloud hop, times link weight
  Tick tunnel_latency = 50;        // per tunnel traversal, times tunnel weight
  Tick control_latency = 5;        // one-way switch <-> controller (RTT 10)
  Tick tunnel_encap_overhead = 2;  // per packet per tunnel, virtualized only
  long long default_bandwidth = 1'000'000;  // bytes/tick, implicit links
  long long tunnel_bandwidth = 1'000'000;   // bytes/tick per tunnel
  long long tick_limit = 10'000'000;
  int buffer_limit = -1;  // per-(switch,flow) miss buffer; -1 = unbounded
  bool virtualized = true;
  int redirect_priority = 1000;
  Tick barrier_timeout = 1000;
  CostModel tunnel_cost;  // temp tunnel setup accounting
};

struct Metrics {
  long long packets_injected = 0;
  long long packets_delivered = 0;
  long long packets_lost = 0;
  long long packets_dropped_policy = 0;
  long long packet_in_count = 0;
  long long rules_installed = 0;
  long long cross_tenant_deliveries = 0;
  long long misdeliveries = 0;
  long long per_flow_order_violations = 0;
  long long controller_processing_steps = 0;
  long long translation_steps = 0;
  long long tunnel_traversals = 0;
  long long delivered_bytes = 0;
  long long conservation_violations = 0;
  long long setup_cost = 0;
  Tick last_tick = 0;
  std::vector<Tick> per_packet_latency;
  std::vector<Tick> ping_rtt;
  std::map<std::string, long long> packet_ins_per_flow;
  std::map<std::string, long long> delivered_bytes_per_flow;
  std::vector<std::string> lldp_responses;  // serialized response plans
  std::uint64_t trace_hash = 1469598103934665603ULL;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["packets_injected"] = packets_injected;
    j["packets_delivered"] = packets_delivered;
    j["packets_lost"] = packets_lost;
    j["packets_dropped_policy"] = packets_dropped_policy;
    j["packet_in_count"] = packet_in_count;
    j["rules_installed"] = rules_installed;
    j["cross_tenant_deliveries"] = cross_tenant_deliveries;
    j["misdeliveries"] = misdeliveries;
    j["per_flow_order_violations"] = per_flow_order_violations;
    j["controller_processing_steps"] = controller_processing_steps;
    j["translation_steps"] = translation_steps;
    j["tunnel_traversals"] = tunnel_traversals;
    j["delivered_bytes"] = delivered_bytes;
    j["conservation_violations"] = conservation_violations;
    j["setup_cost"] = setup_cost;
    j["last_tick"] = last_tick;
    j["per_packet_latency"] = per_packet_latency;
    j["ping_rtt"] = ping_rtt;
    j["packet_ins_per_flow"] = packet_ins_per_flow;
    j["delivered_bytes_per_flow"] = delivered_bytes_per_flow;
    j["trace_hash"] = trace_hash;
    return j;
  }
};

struct Packet {
  Mac src = 0, dst = 0;            // current header macs
  Mac orig_src = 0, orig_dst = 0;  // as injected (virtual addressing)
  TenantId origin_tenant = 0;
  std::string src_vnode, dst_vnode;
  std::string flow_id;
  long long seq_no = 0;
  long long size = 100;
  Tick inject_tick = 0;
  bool ping_request = false;
  bool ping_reply = false;
  Tick ping_origin = 0;
};

inline std::string make_flow_id(TenantId tenant, Mac src, Mac dst, bool virtualized) {
  std::string prefix = virtualized ? "t" + std::to_string(tenant) : "raw";
  return prefix + ":" + mac_to_string(src) + ">" + mac_to_string(dst);
}

class Engine {
 public:
  enum class EventKind {
    PacketArrive,
    PacketIn,
    FlowMod,
    BarrierRequest,
    BarrierReply,
    LldpProbe,
    TimerExpiry,
    TunnelUp,
    VmRebind,
    Reinject,
    Unfreeze,
    BarrierTimeout,
    MigrationPhase,
    StartMigration,
  };

  Engine(SubstrateGraph graph, FabricState fabric, SimConstants constants,
         std::uint64_t seed = 0, Hypervisor::Config hv_config = Hypervisor::Config())
      : constants_(constants), seed_(seed),
        hv_(std::move(graph), std::move(fabric), hv_config) {
    metrics_.setup_cost = hv_.fabric().setup_cost;
    mix_hash(seed);
    for (const auto& [id, node] : hv_.graph().nodes)
      switches_[id] = Switch{id, id, {}, {{"datapath", id}}, {{"q0", 0, 0}}};
  }

  Hypervisor& hypervisor() { return hv_; }
  const SimConstants& constants() const { return constants_; }
  Switch& switch_ref(const std::string& id) {
    auto it = switches_.find(id);
    if (it == switches_.end()) throw Error(Errc::UnknownSwitch, id);
    return it->second;
  }
  bool has_switch(const std::string& id) const { return switches_.count(id) > 0; }

  // Registers the pre-provisioned rules and host bindings of a
  // submitted virtual network.
  void apply_submit(const SubmitResult& result) {
    for (const auto& ins : result.installs) {
      switches_[ins.switch_id].install(ins.rule);
      metrics_.rules_installed++;
    }
    for (const auto& [vnode, node] : result.embedding.vnode_map)
      bindings_[vnode].insert(node);
  }

  void add_baseline_host(const std::string& vnode, const std::string& node, Mac mac) {
    hv_.bind_baseline_host(mac, vnode, node);
    bindings_[vnode].insert(node);
    baseline_macs_[vnode] = mac;
    FlowRule miss;
    miss.rule_id = hv_.next_rule_id();
    miss.priority = 0;
    miss.match.in_port = "host:" + vnode;
    miss.actions = {Action::to_controller()};
    switches_[node].install(miss);
  }

  // ---- traffic generators ----

  void schedule_ping(const std::string& src_vnode, const std::string& dst_vnode,
                     int count, Tick interval, Tick start = 0, long long size = 100) {
    auto [src_mac, dst_mac, tenant] = resolve_pair(src_vnode, dst_vnode);
    for (int i = 0; i < count; ++i) {
      Packet p = make_packet(tenant, src_vnode, dst_vnode, src_mac, dst_mac, size);
      p.ping_request = true;
      schedule_injection(start + static_cast<Tick>(i) * interval, src_vnode, p);
    }
  }

  void schedule_stream(const std::string& src_vnode, const std::string& dst_vnode,
                       long long bytes_per_tick, Tick duration, Tick start = 0,
                       long long packet_size = 1000) {
    auto [src_mac, dst_mac, tenant] = resolve_pair(src_vnode, dst_vnode);
    long long credit = 0;
    for (Tick t = 0; t < duration; ++t) {
      credit += bytes_per_tick;
      while (credit >= packet_size) {
        credit -= packet_size;
        Packet p =
            make_packet(tenant, src_vnode, dst_vnode, src_mac, dst_mac, packet_size);
        schedule_injection(start + t, src_vnode, p);
      }
    }
  }

  void schedule_packet(Tick at, const std::string& src_vnode,
                       const std::string& dst_vnode, long long size = 100) {
    auto [src_mac, dst_mac, tenant] = resolve_pair(src_vnode, dst_vnode);
    schedule_injection(at, src_vnode,
                       make_packet(tenant, src_vnode, dst_vnode, src_mac, dst_mac, size));
  }

  // Raw packet with explicit macs (isolation fuzzing: src vnode sends to
  // an arbitrary destination mac, possibly another tenant's).
  void schedule_raw_packet(Tick at, const std::string& src_vnode, Mac dst_mac,
                           long long size = 100) {
    auto tenant = hv_.vnode_tenant(src_vnode);
    if (!tenant) throw Error(Errc::UnknownEndpoint, src_vnode);
    auto src_mac = hv_.vnode_vmac(src_vnode);
    Packet p = make_packet(*tenant, src_vnode, "", *src_mac, dst_mac, 100);
    p.size = size;
    schedule_injection(at, src_vnode, p);
  }

  void schedule_lldp(TenantId tenant, Tick at) {
    Event ev = base_event(EventKind::LldpProbe, at);
    ev.tenant = tenant;
    push(std::move(ev));
  }

  // ---- migration ----

  MigrationPlan plan_migration(const std::string& vm_id,
                               const std::string& target_cloud) const;
  void start_migration(const MigrationPlan& plan, Tick at);
  // Plans and starts the migration when the tick is reached, so the plan
  // sees the flow state of the running simulation.
  void schedule_migration(const std::string& vm_id, const std::string& target_cloud,
                          Tick at) {
    Event ev = base_event(EventKind::StartMigration, at);
    ev.node = vm_id;
    ev.key = target_cloud;
    push(std::move(ev));
  }
  const MigrationPlan& migration_plan() const {
    if (!last_plan_) throw Error(Errc::UnknownVm, "no migration planned");
    return *last_plan_;
  }
  // Fingerprint captured just before the most recent migration began.
  const std::string& migration_start_fingerprint() const { return start_fp_; }
  const MigrationReport& migration_report() const {
    if (!mig_report_) throw Error(Errc::UnknownVm, "no migration executed");
    return *mig_report_;
  }
  MigrationStatus migration_status() const {
    MigrationStatus st;
    if (mig_) {
      st.active = true;
      st.phase = mig_->phase;
      for (const auto& [id, _] : frozen_) st.frozen_flows.insert(id);
      for (const auto& [sw, stash] : suppressed_)
        for (const auto& [rid, _] : stash) st.suppressed_timers.insert(rid);
    }
    return st;
  }
  // Test hook: replicas stop acknowledging barriers.
  void inject_barrier_fault() { barrier_fault_ = true; }

  // Structural fingerprint of data-plane + placement state, independent
  // of counters and deadlines; used by rollback equality checks.
  std::string state_fingerprint() const;

  Metrics run();

 private:
  struct Event {
    Tick tick = 0;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::PacketArrive;
    // payload (by kind)
    Packet packet;
    std::string node;        // arrival node / switch
    std::string in_port;
    std::string from_cloud;  // cloud the packet was sent from
    std::string key;         // pending key / flow id / switch id
    RuleInstall install;
    TenantId tenant = 0;
    MigrationStep step = MigrationStep::Clone;
    std::string replica;
    bool has_packet = false;
  };
  struct EventOrder {
    bool operator()(const Event& a, const Event& b) const {
      return std::tie(a.tick, a.seq) > std::tie(b.tick, b.seq);
    }
  };

  struct FlowInfo {
    std::string flow_id;
    TenantId tenant = 0;
    Mac src_vmac = 0, dst_vmac = 0;
    std::string src_vnode, dst_vnode;
    std::string ingress_switch;
    Tick route_latency = 0;  // data-plane latency of the installed route
  };

  struct FrozenFlow {
    std::string flow_id;
    std::string ingress_switch;
    std::deque<Packet> queue;
    int barriers_pending = 0;
    Tick freeze_tick = 0;
    Tick drain_until = 0;
    std::int64_t redirect_rule_id = 0;
    bool unfreeze_scheduled = false;
  };

  using SuppressStash =
      std::map<std::int64_t, std::pair<std::optional<Tick>, std::optional<Tick>>>;

  struct LinkState {
    Tick cursor = 0;
    long long remaining = 0;
  };

  struct MigrationExec {
    MigrationPlan plan;
    MigrationReport report;
    std::size_t idx = 0;
    MigrationStep phase = MigrationStep::Clone;
    Tick phase_begin = 0;
    bool serialize_dispatched = false;
    std::map<std::string, std::map<std::int64_t, std::uint64_t>> clone_packet_base;
    std::map<std::string, std::map<std::int64_t, std::uint64_t>> clone_byte_base;
    Tick max_affected_latency = 0;
    // rollback state
    std::map<std::string, Switch> saved_switches;
    Hypervisor saved_hv;
    std::map<std::string, std::set<std::string>> saved_bindings;
    std::map<std::string, FlowInfo> saved_flows;
    long long lost_before = 0;
    long long order_before = 0;
    long long redirected = 0;

    MigrationExec(MigrationPlan p, Hypervisor hv_copy)
        : plan(std::move(p)), saved_hv(std::move(hv_copy)) {}
  };

  // ---- helpers ----

  void mix_hash(std::uint64_t v) {
    metrics_.trace_hash ^= v;
    metrics_.trace_hash *= 1099511628211ULL;
  }
  void mix_hash(const std::string& s) {
    for (unsigned char c : s) mix_hash(static_cast<std::uint64_t>(c));
  }

  Event base_event(EventKind kind, Tick at) {
    Event ev;
    ev.tick = at;
    ev.seq = next_seq_++;
    ev.kind = kind;
    return ev;
  }
  void push(Event ev) { queue_.push(std::move(ev)); }

  std::tuple<Mac, Mac, TenantId> resolve_pair(const std::string& src_vnode,
                                              const std::string& dst_vnode) {
    if (!constants_.virtualized) {
      auto s = baseline_macs_.find(src_vnode);
      auto d = baseline_macs_.find(dst_vnode);
      if (s == baseline_macs_.end() || d == baseline_macs_.end())
        throw Error(Errc::UnknownEndpoint, src_vnode + "/" + dst_vnode);
      return {s->second, d->second, 0};
    }
    auto tenant = hv_.vnode_tenant(src_vnode);
    auto src = hv_.vnode_vmac(src_vnode);
    auto dst = hv_.vnode_vmac(dst_vnode);
    if (!tenant || !src || !dst)
      throw Error(Errc::UnknownEndpoint, src_vnode + "/" + dst_vnode);
    return {*src, *dst, *tenant};
  }

  Packet make_packet(TenantId tenant, const std::string& src_vnode,
                     const std::string& dst_vnode, Mac src_mac, Mac dst_mac,
                     long long size) {
    Packet p;
    p.src = p.orig_src = src_mac;
    p.dst = p.orig_dst = dst_mac;
    p.origin_tenant = tenant;
    p.src_vnode = src_vnode;
    p.dst_vnode = dst_vnode;
    p.size = size;
    p.flow_id = make_flow_id(tenant, src_mac, dst_mac, constants_.virtualized);
    return p;
  }

  void schedule_injection(Tick at, const std::string& src_vnode, Packet p) {
    auto host = primary_host(src_vnode);
    if (!host) throw Error(Errc::UnknownEndpoint, src_vnode);
    p.seq_no = next_flow_seq_[p.flow_id]++;
    p.inject_tick = at;
    Event ev = base_event(EventKind::PacketArrive, at);
    ev.packet = std::move(p);
    ev.has_packet = true;
    ev.node = *host;
    ev.in_port = "host:" + src_vnode;
    in_flight_++;
    metrics_.packets_injected++;
    push(std::move(ev));
  }

  std::optional<std::string> primary_host(const std::string& vnode) const {
    if (!constants_.virtualized) {
      auto it = bindings_.find(vnode);
      if (it == bindings_.end() || it->second.empty()) return std::nullopt;
      return *it->second.begin();
    }
    return hv_.vnode_host(vnode);
  }

  // Chooses between base switch and dual replica at a node.
  std::string resolve_switch(const std::string& node, const std::string& from_cloud) {
    auto it = dual_.find(node);
    if (it == dual_.end()) return node;
    if (from_cloud.empty())
      return cutover_.count(node) ? it->second : node;
    if (mig_ && from_cloud == mig_->plan.target_cloud) return it->second;
    return node;
  }
  static std::string base_of(const std::string& switch_id) {
    auto pos = switch_id.find("~r");
    return pos == std::string::npos ? switch_id : switch_id.substr(0, pos);
  }

  const std::string& node_cloud(const std::string& node) const {
    return hv_.graph().node(node).cloud_id;
  }

  Tick link_latency(const std::string& from, const std::string& to,
                    long long* bandwidth_out) const {
    const auto& cloud = hv_.graph().cloud(node_cloud(from));
    if (cloud.kind == CloudKind::Public) {
      if (bandwidth_out) *bandwidth_out = constants_.default_bandwidth;
      return constants_.hop_latency;
    }
    for (const auto& link : hv_.graph().links) {
      if ((link.a == from && link.b == to) || (link.b == from && link.a == to)) {
        if (bandwidth_out) *bandwidth_out = link.bandwidth;
        return constants_.hop_latency * link.weight;
      }
    }
    if (bandwidth_out) *bandwidth_out = constants_.default_bandwidth;
    return constants_.hop_latency;
  }

  const Tunnel* find_tunnel(const std::string& id) const {
    for (const auto& t : hv_.fabric().plan.tunnels)
      if (t.tunnel_id == id) return &t;
    return nullptr;
  }

  Tick tunnel_latency(const Tunnel& t) const {
    Tick lat = constants_.tunnel_latency * t.weight;
    if (constants_.virtualized) lat += constants_.tunnel_encap_overhead;
    return lat;
  }

  // Serializes transmission through a shared byte budget per tick.
  Tick transmit(const std::string& key, long long bandwidth, long long size, Tick now) {
    auto& st = links_[key];
    if (now > st.cursor) {
      st.cursor = now;
      st.remaining = bandwidth;
    } else if (st.remaining <= 0 && st.cursor == 0 && now == 0) {
      st.remaining = bandwidth;
    }
    if (st.remaining <= 0) {
      st.cursor++;
      st.remaining = bandwidth;
    }
    long long left = size;
    while (left > 0) {
      long long take = std::min(left, st.remaining);
      left -= take;
      st.remaining -= take;
      if (left > 0) {
        st.cursor++;
        st.remaining = bandwidth;
      }
    }
    return st.cursor;
  }

  Tick route_latency(const Route& route) const {
    Tick total = 0;
    for (const auto& hop : route.hops) {
      if (hop.out_port.rfind("node:", 0) == 0)
        total += link_latency(hop.node, hop.out_port.substr(5), nullptr);
      else if (hop.out_port.rfind("tunnel:", 0) == 0) {
        const Tunnel* t = find_tunnel(hop.out_port.substr(7));
        if (t) total += tunnel_latency(*t);
      }
    }
    return total;
  }

  void lose_packet(const Packet&) {
    metrics_.packets_lost++;
  }

  void account_match(Switch& sw, FlowRule& rule, long long size, Tick now) {
    rule.packets++;
    rule.bytes += size;
    auto sit = suppressed_.find(sw.switch_id);
    if (sit != suppressed_.end()) {
      if (rule.idle_timeout) sit->second[rule.rule_id].first = *rule.idle_timeout;
    } else if (rule.idle_timeout) {
      rule.idle_deadline = now + *rule.idle_timeout;
    }
  }

  void suppress_timers(Switch& sw, Tick now) {
    sw.remove_expired(now);
    auto& stash = suppressed_[sw.switch_id];
    for (auto& r : sw.rules) {
      std::optional<Tick> idle_rem, hard_rem;
      if (r.idle_deadline) idle_rem = *r.idle_deadline - now;
      if (r.hard_deadline) hard_rem = *r.hard_deadline - now;
      if (idle_rem || hard_rem) stash[r.rule_id] = {idle_rem, hard_rem};
      r.idle_deadline.reset();
      r.hard_deadline.reset();
    }
  }

  void resume_timers(Switch& sw, Tick now) {
    auto it = suppressed_.find(sw.switch_id);
    if (it == suppressed_.end()) return;
    for (auto& r : sw.rules) {
      auto sit = it->second.find(r.rule_id);
      if (sit == it->second.end()) continue;
      if (sit->second.first) r.idle_deadline = now + *sit->second.first;
      if (sit->second.second) r.hard_deadline = now + *sit->second.second;
    }
    suppressed_.erase(it);
  }

  // ---- core event processing (definitions below) ----

  void process(Event& ev);
  void on_packet_arrive(Event& ev);
  void forward_packet(Switch& sw, Packet packet, const std::string& in_port, Tick now);
  void to_controller(Switch& sw, Packet packet, const std::string& in_port, Tick now);
  void on_packet_in(Event& ev);
  void on_reinject(Event& ev);
  void on_flow_mod(Event& ev);
  void deliver(Switch& sw, Packet& packet, const std::string& vnode, Tick now);
  void send_out(Switch& sw, Packet packet, const std::string& out_port, Tick now);
  void audit_conservation();
  void check_dual_consistency(const Switch& sw, const FlowRule& rule);

  void on_migration_phase(Event& ev);
  void begin_phase(MigrationStep step, Tick at, Tick delay = 1);
  void serialize_updates(Tick now);
  void freeze_and_update_flow(const FlowInfo& flow, Tick now);
  void on_barrier_reply(Event& ev);
  void on_unfreeze(Event& ev);
  void maybe_advance_after_serialize(Tick now);
  void finish_switch(Tick now);
  void rollback(const std::string& reason, Tick now);
  void finalize_migration(Tick now);

  // ---- state ----

  SimConstants constants_;
  std::uint64_t seed_ = 0;
  Hypervisor hv_;
  Metrics metrics_;

  std::map<std::string, Switch> switches_;
  std::map<std::string, std::set<std::string>> bindings_;  // vnode -> host nodes
  std::map<std::string, Mac> baseline_macs_;
  std::map<std::string, LinkState> links_;
  std::priority_queue<Event, std::vector<Event>, EventOrder> queue_;
  std::uint64_t next_seq_ = 0;
  long long in_flight_ = 0;

  std::map<std::string, std::deque<Packet>> pending_;  // miss buffers
  std::map<std::string, std::pair<std::string, std::string>> pending_ctx_;  // key -> (switch, in_port)
  std::map<std::string, long long> next_flow_seq_;
  std::map<std::string, long long> last_delivered_seq_;
  std::map<std::string, FlowInfo> flows_;

  // migration state
  std::optional<MigrationExec> mig_;
  std::optional<MigrationReport> mig_report_;
  std::map<std::string, std::string> dual_;  // base node -> replica switch id
  std::set<std::string> cutover_;
  std::map<std::string, SuppressStash> suppressed_;
  std::map<std::string, FrozenFlow> frozen_;
  bool barrier_fault_ = false;
  std::string start_fp_;
  std::optional<MigrationPlan> last_plan_;

  Tick last_audit_ = -1;
  bool ran_ = false;
};

// ---------------------------------------------------------------------------

inline Metrics Engine::run() {
  if (ran_) throw Error(Errc::InvalidSpec, "engine already ran");
  ran_ = true;
  while (!queue_.empty()) {
    Event ev = queue_.top();
    queue_.pop();
    if (ev.tick > constants_.tick_limit)
      throw Error(Errc::TickLimitExceeded, std::to_string(ev.tick));
    metrics_.last_tick = ev.tick;
    mix_hash(static_cast<std::uint64_t>(ev.tick));
    mix_hash(static_cast<std::uint64_t>(ev.kind));
    process(ev);
    if (ev.tick / 1000 != last_audit_) {
      last_audit_ = ev.tick / 1000;
      audit_conservation();
    }
  }
  audit_conservation();
  if (mig_ && mig_->report.completed == false && mig_->report.aborted == false) {
    // migration never finished (no more events): surface in report
    mig_->report.abort_reason = "incomplete";
    mig_report_ = mig_->report;
  }
  metrics_.controller_processing_steps = hv_.steps_total();
  metrics_.translation_steps = hv_.translation_steps();
  return metrics_;
}

inline void Engine::audit_conservation() {
  long long buffered = 0;
  for (const auto& [_, q] : pending_) buffered += static_cast<long long>(q.size());
  for (const auto& [_, f] : frozen_) buffered += static_cast<long long>(f.queue.size());
  long long accounted =
      metrics_.packets_delivered + metrics_.packets_lost + buffered + in_flight_;
  if (accounted != metrics_.packets_injected) metrics_.conservation_violations++;
}

inline void Engine::process(Event& ev) {
  switch (ev.kind) {
    case EventKind::PacketArrive:
      on_packet_arrive(ev);
      break;
    case EventKind::Reinject:
      on_reinject(ev);
      break;
    case EventKind::PacketIn:
      on_packet_in(ev);
      break;
    case EventKind::FlowMod:
      on_flow_mod(ev);
      break;
    case EventKind::LldpProbe: {
      auto plan = hv_.intercept_lldp(ev.tenant);
      nlohmann::json j;
      j["tenant"] = plan.tenant;
      j["vnodes"] = plan.topology.vnode_ids;
      nlohmann::json links = nlohmann::json::array();
      for (const auto& [a, b] : plan.topology.vlinks) links.push_back({a, b});
      j["vlinks"] = links;
      metrics_.lldp_responses.push_back(j.dump());
      break;
    }
    case EventKind::TunnelUp:
      // tunnel already registered with the fabric at schedule time
      break;
    case EventKind::BarrierRequest: {
      if (!barrier_fault_) {
        Event reply = base_event(EventKind::BarrierReply, ev.tick + constants_.control_latency);
        reply.key = ev.key;
        reply.replica = ev.replica;
        push(std::move(reply));
      }
      break;
    }
    case EventKind::BarrierReply:
      on_barrier_reply(ev);
      break;
    case EventKind::BarrierTimeout: {
      auto it = frozen_.find(ev.key);
      if (mig_ && it != frozen_.end() && it->second.barriers_pending > 0)
        rollback("BarrierTimeout: " + ev.key, ev.tick);
      break;
    }
    case EventKind::Unfreeze:
      on_unfreeze(ev);
      break;
    case EventKind::MigrationPhase:
      on_migration_phase(ev);
      break;
    case EventKind::StartMigration: {
      start_fp_ = state_fingerprint();
      MigrationPlan plan = plan_migration(ev.node, ev.key);
      last_plan_ = plan;
      start_migration(plan, ev.tick);
      break;
    }
    case EventKind::TimerExpiry:
    case EventKind::VmRebind:
      break;
  }
}

inline void Engine::on_packet_arrive(Event& ev) {
  in_flight_--;
  std::string sw_id = resolve_switch(ev.node, ev.from_cloud);
  auto it = switches_.find(sw_id);
  if (it == switches_.end()) {
    lose_packet(ev.packet);
    return;
  }
  mix_hash(ev.packet.flow_id);
  mix_hash(static_cast<std::uint64_t>(ev.packet.seq_no));
  forward_packet(it->second, ev.packet, ev.in_port, ev.tick);
}

inline void Engine::forward_packet(Switch& sw, Packet packet, const std::string& in_port,
                                   Tick now) {
  bool suppressed = suppressed_.count(sw.switch_id) > 0;
  FlowRule* rule = sw.lookup(in_port, packet.src, packet.dst, now, suppressed);
  if (rule == nullptr) {
    to_controller(sw, std::move(packet), in_port, now);
    return;
  }
  check_dual_consistency(sw, *rule);
  account_match(sw, *rule, packet.size, now);
  for (const auto& action : rule->actions) {
    switch (action.kind) {
      case Action::Kind::RewriteSrc:
        packet.src = action.mac;
        break;
      case Action::Kind::RewriteDst:
        packet.dst = action.mac;
        break;
      case Action::Kind::SendToController:
        to_controller(sw, std::move(packet), in_port, now);
        return;
      case Action::Kind::Drop:
        metrics_.packets_dropped_policy++;
        lose_packet(packet);
        return;
      case Action::Kind::Forward:
        send_out(sw, std::move(packet), action.port, now);
        return;
    }
  }
  // action list without a terminal decision: drop
  lose_packet(packet);
}

inline void Engine::check_dual_consistency(const Switch& sw, const FlowRule& rule) {
  if (!mig_ || rule.owner_flow.empty()) return;
  std::string base = base_of(sw.switch_id);
  auto dit = dual_.find(base);
  if (dit == dual_.end()) return;
  if (frozen_.count(rule.owner_flow)) return;  // redirected flows are safe
  const Switch& twin =
      sw.switch_id == base ? switches_.at(dit->second) : switches_.at(base);
  for (const auto& tr : twin.rules) {
    if (tr.priority == rule.priority && tr.match == rule.match) {
      if (tr.rule_id != rule.rule_id) mig_->report.stale_rule_inconsistencies++;
      return;
    }
  }
  mig_->report.stale_rule_inconsistencies++;  // twin lacks the rule entirely
}

inline void Engine::to_controller(Switch& sw, Packet packet, const std::string& in_port,
                                  Tick now) {
  auto fit = frozen_.find(packet.flow_id);
  if (fit != frozen_.end()) {
    fit->second.queue.push_back(std::move(packet));
    if (mig_) mig_->report.packets_redirected++;
    return;
  }
  std::string key = base_of(sw.switch_id) + "|" + packet.flow_id;
  auto pit = pending_.find(key);
  if (pit != pending_.end()) {
    if (constants_.buffer_limit >= 0 &&
        static_cast<int>(pit->second.size()) >= constants_.buffer_limit) {
      lose_packet(packet);
      return;
    }
    pit->second.push_back(std::move(packet));
    return;
  }
  pending_ctx_[key] = {base_of(sw.switch_id), in_port};
  pending_[key].push_back(std::move(packet));
  Event ev = base_event(EventKind::PacketIn, now + constants_.control_latency);
  ev.key = key;
  push(std::move(ev));
}

inline void Engine::on_packet_in(Event& ev) {
  auto pit = pending_.find(ev.key);
  if (pit == pending_.end() || pit->second.empty()) return;
  const Packet& first = pit->second.front();
  auto [sw_id, in_port] = pending_ctx_.at(ev.key);
  metrics_.packet_in_count++;
  metrics_.packet_ins_per_flow[first.flow_id]++;
  mix_hash(ev.key);

  PacketInResult result;
  bool failed = false;
  try {
    Hypervisor::PacketInEvent pev{sw_id, in_port, first.src, first.dst, ev.tick};
    result = constants_.virtualized ? hv_.on_packet_in(pev) : hv_.on_packet_in_baseline(pev);
  } catch (const Error&) {
    failed = true;
  }
  if (failed) {
    for (const auto& p : pit->second) lose_packet(p);
    pending_.erase(pit);
    pending_ctx_.erase(ev.key);
    return;
  }
  Tick install_at = ev.tick + constants_.control_latency;
  for (const auto& ins : result.installs) {
    Event fm = base_event(EventKind::FlowMod, install_at);
    fm.install = ins;
    push(std::move(fm));
  }
  if (!result.route.hops.empty()) {
    FlowInfo info;
    info.flow_id = first.flow_id;
    info.tenant = first.origin_tenant;
    info.src_vmac = first.orig_src;
    info.dst_vmac = first.orig_dst;
    info.src_vnode = first.src_vnode;
    info.dst_vnode = first.dst_vnode;
    info.ingress_switch = result.route.hops.front().node;
    info.route_latency = route_latency(result.route);
    flows_[info.flow_id] = info;
  }
  // re-inject buffered packets once the rules are in place
  Event re = base_event(EventKind::Reinject, install_at);
  re.key = ev.key;
  push(std::move(re));
}

inline void Engine::on_reinject(Event& ev) {
  auto pit = pending_.find(ev.key);
  if (pit == pending_.end()) return;
  std::deque<Packet> packets = std::move(pit->second);
  auto [sw_id, in_port] = pending_ctx_.at(ev.key);
  pending_.erase(pit);
  pending_ctx_.erase(ev.key);
  std::string resolved = resolve_switch(sw_id, "");
  auto it = switches_.find(resolved);
  if (it == switches_.end()) {
    for (const auto& p : packets) lose_packet(p);
    return;
  }
  for (auto& p : packets) {
    mix_hash(p.flow_id);
    mix_hash(static_cast<std::uint64_t>(p.seq_no));
    forward_packet(it->second, std::move(p), in_port, ev.tick);
  }
}

inline void Engine::on_flow_mod(Event& ev) {
  const RuleInstall& ins = ev.install;
  auto target = switches_.find(ins.switch_id);
  if (target == switches_.end()) return;
  target->second.install(ins.rule);
  metrics_.rules_installed++;
  // keep a dual replica consistent
  auto dit = dual_.find(base_of(ins.switch_id));
  if (dit != dual_.end()) {
    Switch& base_sw = switches_.at(base_of(ins.switch_id));
    Switch& replica = switches_.at(dit->second);
    Switch& twin = ins.switch_id == base_sw.switch_id ? replica : base_sw;
    twin.install(ins.rule);
    metrics_.rules_installed++;
  }
}

inline void Engine::send_out(Switch& sw, Packet packet, const std::string& out_port,
                             Tick now) {
  if (out_port.rfind("host:", 0) == 0) {
    deliver(sw, packet, out_port.substr(5), now);
    return;
  }
  if (out_port.rfind("node:", 0) == 0) {
    std::string to = out_port.substr(5);
    if (!hv_.graph().nodes.count(to)) {
      lose_packet(packet);
      return;
    }
    long long bandwidth = constants_.default_bandwidth;
    Tick lat = link_latency(sw.host_node, to, &bandwidth);
    auto [lo, hi] = std::minmax(sw.host_node, to);
    Tick release = transmit("L:" + lo + "|" + hi, bandwidth, packet.size, now);
    Event ev = base_event(EventKind::PacketArrive, release + lat);
    ev.node = to;
    ev.in_port = "node:" + base_of(sw.switch_id);
    ev.from_cloud = node_cloud(sw.host_node);
    ev.packet = std::move(packet);
    ev.has_packet = true;
    in_flight_++;
    push(std::move(ev));
    return;
  }
  if (out_port.rfind("tunnel:", 0) == 0) {
    const Tunnel* t = find_tunnel(out_port.substr(7));
    if (!t) {
      lose_packet(packet);
      return;
    }
    const std::string& from_cloud = node_cloud(sw.host_node);
    const std::string& to_cloud = t->cloud_a == from_cloud ? t->cloud_b : t->cloud_a;
    std::string to_node;
    try {
      to_node = gateway_of(hv_.graph(), to_cloud);
    } catch (const Error&) {
      lose_packet(packet);
      return;
    }
    metrics_.tunnel_traversals++;
    Tick release = transmit("T:" + t->tunnel_id, constants_.tunnel_bandwidth,
                            packet.size, now);
    Event ev = base_event(EventKind::PacketArrive, release + tunnel_latency(*t));
    ev.node = to_node;
    ev.in_port = "tunnel:" + t->tunnel_id;
    ev.from_cloud = from_cloud;
    ev.packet = std::move(packet);
    ev.has_packet = true;
    in_flight_++;
    push(std::move(ev));
    return;
  }
  lose_packet(packet);
}

inline void Engine::deliver(Switch& sw, Packet& packet, const std::string& vnode,
                            Tick now) {
  auto bit = bindings_.find(vnode);
  bool bound = bit != bindings_.end() && bit->second.count(sw.host_node) > 0;
  if (!bound) {
    lose_packet(packet);
    return;
  }
  TenantId owner = 0;
  if (constants_.virtualized) {
    auto t = hv_.vnode_tenant(vnode);
    owner = t.value_or(0xFFFF);
  }
  if (constants_.virtualized && owner != packet.origin_tenant) {
    metrics_.cross_tenant_deliveries++;
  } else if (!packet.dst_vnode.empty() && vnode != packet.dst_vnode) {
    metrics_.misdeliveries++;
  }
  metrics_.packets_delivered++;
  metrics_.delivered_bytes += packet.size;
  metrics_.delivered_bytes_per_flow[packet.flow_id] += packet.size;
  metrics_.per_packet_latency.push_back(now - packet.inject_tick);
  auto& last = last_delivered_seq_;
  auto lit = last.find(packet.flow_id);
  if (lit != last.end() && packet.seq_no <= lit->second) {
    metrics_.per_flow_order_violations++;
    if (mig_) mig_->report.ordering_violations++;
  }
  last[packet.flow_id] = std::max(lit == last.end() ? -1 : lit->second, packet.seq_no);

  if (packet.ping_request) {
    // synthesize the echo reply from the delivered endpoint
    Packet reply;
    reply.origin_tenant = packet.origin_tenant;
    reply.src_vnode = vnode;
    reply.dst_vnode = packet.src_vnode;
    reply.src = reply.orig_src = packet.orig_dst;
    reply.dst = reply.orig_dst = packet.orig_src;
    reply.size = packet.size;
    reply.ping_reply = true;
    reply.ping_origin = packet.inject_tick;
    reply.flow_id = make_flow_id(packet.origin_tenant, reply.src, reply.dst,
                                 constants_.virtualized);
    auto host = primary_host(vnode);
    if (host) {
      reply.seq_no = next_flow_seq_[reply.flow_id]++;
      reply.inject_tick = now;
      Event ev = base_event(EventKind::PacketArrive, now);
      ev.packet = std::move(reply);
      ev.has_packet = true;
      ev.node = *host;
      ev.in_port = "host:" + vnode;
      in_flight_++;
      metrics_.packets_injected++;
      push(std::move(ev));
    }
  } else if (packet.ping_reply) {
    metrics_.ping_rtt.push_back(now - packet.ping_origin);
  }
}

// ---------------------------------------------------------------------------
// migration

inline MigrationPlan Engine::plan_migration(const std::string& vm_id,
                                            const std::string& target_cloud) const {
  if (mig_) throw Error(Errc::MigrationInProgress);
  auto nit = hv_.graph().nodes.find(vm_id);
  if (nit == hv_.graph().nodes.end() || nit->second.role == NodeRole::HardwareSwitch)
    throw Error(Errc::UnknownVm, vm_id);
  if (!hv_.graph().clouds.count(target_cloud))
    throw Error(Errc::UnknownCloud, target_cloud);
  if (nit->second.cloud_id == target_cloud) throw Error(Errc::SameCloud, target_cloud);
  // a gateway must exist in the target cloud for tunnels to terminate
  gateway_of(hv_.graph(), target_cloud);

  MigrationPlan plan;
  plan.vm_id = vm_id;
  plan.source_cloud = nit->second.cloud_id;
  plan.target_cloud = target_cloud;

  // switches holding rules for flows touching the VM
  auto vnodes = hv_.vnodes_on(vm_id);
  std::set<std::string> touched{vm_id};
  std::set<std::string> affected_flows;
  for (const auto& [fid, f] : flows_) {
    for (const auto& v : vnodes)
      if (f.src_vnode == v || f.dst_vnode == v) affected_flows.insert(fid);
  }
  for (const auto& [sid, sw] : switches_) {
    for (const auto& r : sw.rules)
      if (!r.owner_flow.empty() && affected_flows.count(r.owner_flow))
        touched.insert(base_of(sid));
  }
  plan.switch_order.assign(touched.begin(), touched.end());

  auto tunnels = fabric_path(hv_.fabric(), plan.source_cloud, target_cloud);
  plan.bridge_tunnels = tunnels;
  if (tunnels.size() > 1) {
    plan.needs_temp_tunnel = true;
    Tunnel temp = make_tunnel(hv_.graph(), plan.source_cloud, target_cloud);
    temp.tunnel_id = "temp:" + temp.tunnel_id;
    plan.bridge_tunnels.push_back(temp);
  }
  for (const auto& sid : plan.switch_order)
    for (MigrationStep s :
         {MigrationStep::Clone, MigrationStep::DualReplica,
          MigrationStep::SerializeUpdates, MigrationStep::MoveVm,
          MigrationStep::Cutover, MigrationStep::Decommission})
      plan.steps.push_back({sid, s});
  return plan;
}

inline void Engine::start_migration(const MigrationPlan& plan, Tick at) {
  if (mig_) throw Error(Errc::MigrationInProgress);
  mig_.emplace(plan, hv_);
  mig_->saved_switches = switches_;
  mig_->saved_bindings = bindings_;
  mig_->saved_flows = flows_;
  mig_->lost_before = metrics_.packets_lost;
  mig_->order_before = metrics_.per_flow_order_violations;
  mig_->report.begin_tick = at;

  // A temporary direct tunnel carries the VM state transfer when the
  // clouds are not fabric-adjacent; cloning starts once it is up.
  Tick ready = at;
  if (plan.needs_temp_tunnel) {
    const Tunnel& temp = plan.bridge_tunnels.back();
    ready = at + tunnel_setup_cost(temp, constants_.tunnel_cost);
    Event up = base_event(EventKind::TunnelUp, ready);
    up.key = temp.tunnel_id;
    push(std::move(up));
  }
  Event ph = base_event(EventKind::MigrationPhase, ready);
  ph.step = MigrationStep::Clone;
  push(std::move(ph));
}

inline void Engine::begin_phase(MigrationStep step, Tick at, Tick delay) {
  Event ev = base_event(EventKind::MigrationPhase, at + delay);
  ev.step = step;
  push(std::move(ev));
}

inline void Engine::on_migration_phase(Event& ev) {
  if (!mig_) return;
  auto& m = *mig_;
  const std::string& cur = m.plan.switch_order[m.idx];
  bool is_vm = cur == m.plan.vm_id;
  Tick now = ev.tick;

  // close the previous span
  if (!m.report.phases.empty() && m.report.phases.back().end == 0)
    m.report.phases.back().end = now;
  m.phase = ev.step;
  m.report.phases.push_back({cur, ev.step, now, 0});

  switch (ev.step) {
    case MigrationStep::Clone: {
      Switch& base_sw = switches_.at(cur);
      auto snap = snapshot_switch(base_sw, now);
      Switch replica = restore_switch(snap, now);
      replica.switch_id = cur + "~r";
      switches_[replica.switch_id] = replica;
      dual_[cur] = replica.switch_id;
      suppress_timers(switches_.at(cur), now);
      suppress_timers(switches_.at(dual_[cur]), now);
      for (const auto& r : switches_.at(cur).rules) {
        m.clone_packet_base[cur][r.rule_id] = r.packets;
        m.clone_byte_base[cur][r.rule_id] = r.bytes;
      }
      if (is_vm) {
        // migrated endpoints become reachable at the replica as well
        for (const auto& v : hv_.vnodes_on(cur)) bindings_[v].insert(cur);
      }
      begin_phase(MigrationStep::DualReplica, now);
      break;
    }
    case MigrationStep::DualReplica:
      begin_phase(MigrationStep::SerializeUpdates, now);
      break;
    case MigrationStep::SerializeUpdates:
      if (is_vm) {
        serialize_updates(now);
        maybe_advance_after_serialize(now);
      } else {
        begin_phase(MigrationStep::MoveVm, now);
      }
      break;
    case MigrationStep::MoveVm:
      if (is_vm) {
        Event rb = base_event(EventKind::VmRebind, now);
        rb.node = cur;
        push(std::move(rb));
      }
      begin_phase(MigrationStep::Cutover, now);
      break;
    case MigrationStep::Cutover: {
      cutover_.insert(cur);
      Tick drain = m.max_affected_latency + 2 * constants_.control_latency + 1;
      begin_phase(MigrationStep::Decommission, now, drain);
      break;
    }
    case MigrationStep::Decommission:
      finish_switch(now);
      break;
  }
}

inline void Engine::serialize_updates(Tick now) {
  auto& m = *mig_;
  if (m.serialize_dispatched) return;
  m.serialize_dispatched = true;
  // the VM node changes cloud before routes are recomputed
  hv_.set_node_cloud(m.plan.vm_id, m.plan.target_cloud);

  auto vnodes = hv_.vnodes_on(m.plan.vm_id);
  std::vector<FlowInfo> affected;
  for (const auto& [fid, f] : flows_) {
    for (const auto& v : vnodes)
      if (f.src_vnode == v || f.dst_vnode == v) {
        affected.push_back(f);
        break;
      }
  }
  for (const auto& f : affected)
    m.max_affected_latency = std::max(m.max_affected_latency, f.route_latency);
  for (const auto& f : affected) freeze_and_update_flow(f, now);
}

inline void Engine::freeze_and_update_flow(const FlowInfo& flow, Tick now) {
  auto& m = *mig_;
  FrozenFlow frozen;
  frozen.flow_id = flow.flow_id;
  frozen.ingress_switch = flow.ingress_switch;
  frozen.freeze_tick = now;
  frozen.drain_until = now + constants_.control_latency + flow.route_latency + 1;
  frozen.barriers_pending = 2;

  // redirect rule: this flow goes through the controller until both
  // replicas acknowledge the update barrier
  FlowRule redirect;
  redirect.rule_id = hv_.next_rule_id();
  frozen.redirect_rule_id = redirect.rule_id;
  redirect.priority = constants_.redirect_priority;
  redirect.match = {"host:" + flow.src_vnode, flow.src_vmac, flow.dst_vmac};
  redirect.actions = {Action::to_controller()};
  redirect.owner_flow = flow.flow_id;
  redirect.install_tick = now;
  Event fm = base_event(EventKind::FlowMod, now + constants_.control_latency);
  fm.install = {flow.ingress_switch, redirect};
  push(std::move(fm));

  frozen_[flow.flow_id] = frozen;

  // recompute the route against the new placement and push the updates
  PacketInResult result =
      hv_.reroute_flow(flow.tenant, flow.src_vmac, flow.dst_vmac, now);
  Tick update_at = now + 2 * constants_.control_latency;
  for (const auto& ins : result.installs) {
    Event ev = base_event(EventKind::FlowMod, update_at);
    ev.install = ins;
    push(std::move(ev));
  }
  if (!result.route.hops.empty()) {
    flows_[flow.flow_id].ingress_switch = result.route.hops.front().node;
    flows_[flow.flow_id].route_latency = route_latency(result.route);
    m.max_affected_latency =
        std::max(m.max_affected_latency, flows_[flow.flow_id].route_latency);
  }
  // barrier both replicas of the switch being migrated
  const std::string& cur = m.plan.switch_order[m.idx];
  for (const std::string& rep : {cur, dual_.at(cur)}) {
    Event br = base_event(EventKind::BarrierRequest, update_at);
    br.key = flow.flow_id;
    br.replica = rep;
    push(std::move(br));
  }
  Event timeout = base_event(EventKind::BarrierTimeout, now + constants_.barrier_timeout);
  timeout.key = flow.flow_id;
  push(std::move(timeout));
}

inline void Engine::on_barrier_reply(Event& ev) {
  auto it = frozen_.find(ev.key);
  if (it == frozen_.end()) return;
  if (--it->second.barriers_pending > 0) return;
  Event un = base_event(EventKind::Unfreeze,
                        std::max(ev.tick, it->second.drain_until));
  un.key = ev.key;
  push(std::move(un));
  it->second.unfreeze_scheduled = true;
}

inline void Engine::on_unfreeze(Event& ev) {
  auto it = frozen_.find(ev.key);
  if (it == frozen_.end()) return;
  FrozenFlow frozen = std::move(it->second);
  frozen_.erase(it);
  // remove the redirect rule from every copy of the ingress switch
  for (auto* sw : {&switches_.at(frozen.ingress_switch),
                   dual_.count(frozen.ingress_switch)
                       ? &switches_.at(dual_.at(frozen.ingress_switch))
                       : nullptr}) {
    if (sw)
      std::erase_if(sw->rules, [&](const FlowRule& r) {
        return r.rule_id == frozen.redirect_rule_id;
      });
  }
  // release queued packets, in order, at the (possibly new) ingress
  const std::string& ingress = flows_.count(frozen.flow_id)
                                   ? flows_.at(frozen.flow_id).ingress_switch
                                   : frozen.ingress_switch;
  for (auto& p : frozen.queue) {
    Event re = base_event(EventKind::PacketArrive, ev.tick);
    re.node = base_of(ingress);
    re.in_port = "host:" + p.src_vnode;
    re.packet = std::move(p);
    re.has_packet = true;
    in_flight_++;
    push(std::move(re));
  }
  if (mig_ && mig_->phase == MigrationStep::SerializeUpdates)
    maybe_advance_after_serialize(ev.tick);
}

inline void Engine::maybe_advance_after_serialize(Tick now) {
  if (!frozen_.empty()) return;
  begin_phase(MigrationStep::MoveVm, now);
}

inline void Engine::finish_switch(Tick now) {
  auto& m = *mig_;
  const std::string& cur = m.plan.switch_order[m.idx];
  std::string rep_id = dual_.at(cur);
  Switch replica = std::move(switches_.at(rep_id));
  Switch source = std::move(switches_.at(cur));
  switches_.erase(rep_id);

  // merge the source's counter deltas accrued during the dual period
  const auto& pkt_base = m.clone_packet_base[cur];
  const auto& byte_base = m.clone_byte_base[cur];
  for (auto& r : replica.rules) {
    const FlowRule* src_rule = nullptr;
    for (const auto& sr : source.rules)
      if (sr.rule_id == r.rule_id) src_rule = &sr;
    if (!src_rule) continue;
    auto pit = pkt_base.find(r.rule_id);
    auto bit = byte_base.find(r.rule_id);
    r.packets += src_rule->packets - (pit == pkt_base.end() ? 0 : pit->second);
    r.bytes += src_rule->bytes - (bit == byte_base.end() ? 0 : bit->second);
  }
  replica.switch_id = cur;
  // carry the replica's suppression stash over to the merged id
  suppressed_[cur] = suppressed_[rep_id];
  suppressed_.erase(rep_id);
  switches_[cur] = std::move(replica);
  resume_timers(switches_.at(cur), now);
  dual_.erase(cur);
  cutover_.erase(cur);

  m.report.phases.back().end = now;
  m.idx++;
  if (m.idx < m.plan.switch_order.size()) {
    begin_phase(MigrationStep::Clone, now);
    return;
  }
  finalize_migration(now);
}

inline void Engine::finalize_migration(Tick now) {
  auto& m = *mig_;
  m.report.completed = true;
  m.report.end_tick = now;
  m.report.packets_lost = metrics_.packets_lost - m.lost_before;
  m.report.ordering_violations =
      metrics_.per_flow_order_violations - m.order_before;
  mig_report_ = m.report;
  mig_.reset();
}

inline void Engine::rollback(const std::string& reason, Tick now) {
  auto& m = *mig_;
  // collect queued packets before tearing migration state down
  std::vector<std::pair<std::string, Packet>> queued;
  for (auto& [fid, f] : frozen_)
    for (auto& p : f.queue) queued.push_back({f.ingress_switch, std::move(p)});
  frozen_.clear();
  suppressed_.clear();
  dual_.clear();
  cutover_.clear();

  switches_ = m.saved_switches;
  bindings_ = m.saved_bindings;
  flows_ = m.saved_flows;
  hv_ = m.saved_hv;

  for (auto& [ingress, p] : queued) {
    Event re = base_event(EventKind::PacketArrive, now);
    re.node = base_of(ingress);
    re.in_port = "host:" + p.src_vnode;
    re.packet = std::move(p);
    re.has_packet = true;
    in_flight_++;
    push(std::move(re));
  }
  m.report.aborted = true;
  m.report.abort_reason = reason;
  m.report.end_tick = now;
  m.report.packets_lost = metrics_.packets_lost - m.lost_before;
  m.report.ordering_violations =
      metrics_.per_flow_order_violations - m.order_before;
  if (!m.report.phases.empty() && m.report.phases.back().end == 0)
    m.report.phases.back().end = now;
  mig_report_ = m.report;
  mig_.reset();
}

inline std::string Engine::state_fingerprint() const {
  nlohmann::json j;
  nlohmann::json sws;
  for (const auto& [id, sw] : switches_) {
    nlohmann::json rules = nlohmann::json::array();
    auto sorted = sw.rules;
    std::sort(sorted.begin(), sorted.end(), [](const FlowRule& a, const FlowRule& b) {
      return a.rule_id < b.rule_id;
    });
    for (const auto& r : sorted) {
      nlohmann::json jr;
      jr["priority"] = r.priority;
      if (r.match.in_port) jr["in_port"] = *r.match.in_port;
      if (r.match.src_mac) jr["src"] = *r.match.src_mac;
      if (r.match.dst_mac) jr["dst"] = *r.match.dst_mac;
      nlohmann::json acts = nlohmann::json::array();
      for (const auto& a : r.actions) acts.push_back(snapjson::action_to_json(a));
      jr["actions"] = acts;
      rules.push_back(jr);
    }
    sws[id] = rules;
  }
  j["switches"] = sws;
  nlohmann::json binds;
  for (const auto& [v, nodes] : bindings_) binds[v] = nodes;
  j["bindings"] = binds;
  nlohmann::json tunnels = nlohmann::json::array();
  for (const auto& t : hv_.fabric().plan.tunnels) tunnels.push_back(t.tunnel_id);
  j["tunnels"] = tunnels;
  nlohmann::json placements;
  for (const auto& [nid, n] : hv_.graph().nodes) placements[nid] = n.cloud_id;
  j["node_clouds"] = placements;
  return j.dump();
}

}  // namespace cloudmesh
