#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cloudmesh/mac.hpp"
#include "cloudmesh/types.hpp"

namespace cloudmesh {

// Ports are strings: "host:<vnode>" for attached endpoints,
// "node:<neighbor>" for intra-cloud links, "tunnel:<id>" on gateways.
struct MatchFields {
  std::optional<std::string> in_port;
  std::optional<Mac> src_mac;
  std::optional<Mac> dst_mac;

  bool matches(const std::string& in_port_v, Mac src, Mac dst) const {
    if (in_port && *in_port != in_port_v) return false;
    if (src_mac && *src_mac != src) return false;
    if (dst_mac && *dst_mac != dst) return false;
    return true;
  }
  bool operator==(const MatchFields&) const = default;
};

struct Action {
  enum class Kind { Forward, RewriteSrc, RewriteDst, SendToController, Drop };
  Kind kind = Kind::Drop;
  std::string port;  // Forward
  Mac mac = 0;       // RewriteSrc / RewriteDst

  bool operator==(const Action&) const = default;

  static Action forward(std::string p) { return {Kind::Forward, std::move(p), 0}; }
  static Action rewrite_src(Mac m) { return {Kind::RewriteSrc, {}, m}; }
  static Action rewrite_dst(Mac m) { return {Kind::RewriteDst, {}, m}; }
  static Action to_controller() { return {Kind::SendToController, {}, 0}; }
  static Action drop() { return {Kind::Drop, {}, 0}; }
};

struct FlowRule {
  std::int64_t rule_id = 0;
  int priority = 0;
  MatchFields match;
  std::vector<Action> actions;
  std::uint64_t packets = 0;
  std::uint64_t bytes = 0;
  std::optional<Tick> idle_timeout;
  std::optional<Tick> hard_timeout;
  Tick install_tick = 0;
  // Deadlines are absolute ticks; a rule matches at deadline-1 and is
  // gone at its deadline.
  std::optional<Tick> idle_deadline;
  std::optional<Tick> hard_deadline;
  // Attribution, not matched on: which virtual network and flow own
  // this rule. Empty for infrastructure rules (table-miss).
  std::string owner_vn;
  std::string owner_flow;

  std::optional<Tick> deadline() const {
    if (idle_deadline && hard_deadline)
      return std::min(*idle_deadline, *hard_deadline);
    return idle_deadline ? idle_deadline : hard_deadline;
  }
  bool expired_at(Tick now) const {
    auto d = deadline();
    return d && now >= *d;
  }
};

struct SwitchQueue {
  std::string queue_id;
  long long max_rate = 0;
  long long pending_depth = 0;
};

struct Switch {
  std::string switch_id;
  std::string host_node;  // substrate node hosting this switch
  std::vector<FlowRule> rules;
  std::map<std::string, std::string> config;
  std::vector<SwitchQueue> queues;

  FlowRule* find_rule(std::int64_t rule_id) {
    for (auto& r : rules)
      if (r.rule_id == rule_id) return &r;
    return nullptr;
  }

  // Install or replace: an existing rule with identical (priority, match)
  // is superseded.
  void install(FlowRule rule) {
    std::erase_if(rules, [&](const FlowRule& r) {
      return r.priority == rule.priority && r.match == rule.match;
    });
    rules.push_back(std::move(rule));
  }

  void remove_expired(Tick now) {
    std::erase_if(rules, [&](const FlowRule& r) { return r.expired_at(now); });
  }

  // Highest priority wins; ties go to the earliest install then the
  // lowest rule id. Returns nullptr on table miss.
  FlowRule* lookup(const std::string& in_port, Mac src, Mac dst, Tick now,
                   bool expiry_suppressed = false) {
    if (!expiry_suppressed) remove_expired(now);
    FlowRule* best = nullptr;
    for (auto& r : rules) {
      if (!r.match.matches(in_port, src, dst)) continue;
      if (!best ||
          std::tuple(-r.priority, r.install_tick, r.rule_id) <
              std::tuple(-best->priority, best->install_tick, best->rule_id))
        best = &r;
    }
    return best;
  }

  void touch(FlowRule& r, std::uint64_t size, Tick now) {
    r.packets += 1;
    r.bytes += size;
    if (r.idle_timeout) r.idle_deadline = now + *r.idle_timeout;
  }
};

}  // namespace cloudmesh
