#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cloudmesh/flow.hpp"
#include "cloudmesh/types.hpp"

namespace cloudmesh {

// Rule as captured in a snapshot: timeouts are stored as remaining time
// relative to the capture tick so a restore can shift deadlines.
struct SnapshotRule {
  FlowRule rule;  // deadlines cleared; remaining values below
  std::optional<Tick> idle_remaining;
  std::optional<Tick> hard_remaining;
};

struct SwitchSnapshot {
  std::string switch_id;
  std::string host_node;
  Tick capture_tick = 0;
  std::vector<SnapshotRule> rules;  // canonical order
  std::map<std::string, std::string> config;
  std::vector<SwitchQueue> queues;
};

inline void canonical_sort(std::vector<SnapshotRule>& rules) {
  std::sort(rules.begin(), rules.end(), [](const SnapshotRule& x, const SnapshotRule& y) {
    return std::tuple(-x.rule.priority, x.rule.install_tick, x.rule.rule_id) <
           std::tuple(-y.rule.priority, y.rule.install_tick, y.rule.rule_id);
  });
}

// Captures every installed rule with exact counters and remaining
// timeouts; the switch itself is not perturbed (beyond purging rules
// already past their deadline, which lookup would drop anyway).
inline SwitchSnapshot snapshot_switch(const Switch& sw, Tick now) {
  SwitchSnapshot snap;
  snap.switch_id = sw.switch_id;
  snap.host_node = sw.host_node;
  snap.capture_tick = now;
  snap.config = sw.config;
  snap.queues = sw.queues;
  for (const auto& r : sw.rules) {
    if (r.expired_at(now)) continue;
    SnapshotRule sr;
    sr.rule = r;
    if (r.idle_deadline) sr.idle_remaining = *r.idle_deadline - now;
    if (r.hard_deadline) sr.hard_remaining = *r.hard_deadline - now;
    sr.rule.idle_deadline.reset();
    sr.rule.hard_deadline.reset();
    snap.rules.push_back(std::move(sr));
  }
  canonical_sort(snap.rules);
  return snap;
}

inline Switch restore_switch(const SwitchSnapshot& snap, Tick now) {
  for (const auto& sr : snap.rules) {
    if ((sr.idle_remaining && *sr.idle_remaining < 0) ||
        (sr.hard_remaining && *sr.hard_remaining < 0))
      throw Error(Errc::MalformedSnapshot, "negative remaining timeout");
  }
  Switch sw;
  sw.switch_id = snap.switch_id;
  sw.host_node = snap.host_node;
  sw.config = snap.config;
  sw.queues = snap.queues;
  for (const auto& sr : snap.rules) {
    FlowRule r = sr.rule;
    if (sr.idle_remaining) r.idle_deadline = now + *sr.idle_remaining;
    if (sr.hard_remaining) r.hard_deadline = now + *sr.hard_remaining;
    sw.rules.push_back(std::move(r));
  }
  return sw;
}

// ---- canonical JSON form (sorted keys via nlohmann object ordering) ----

namespace snapjson {

using nlohmann::json;

inline json action_to_json(const Action& a) {
  json j;
  switch (a.kind) {
    case Action::Kind::Forward:
      j["kind"] = "forward";
      j["port"] = a.port;
      break;
    case Action::Kind::RewriteSrc:
      j["kind"] = "rewrite_src";
      j["mac"] = a.mac;
      break;
    case Action::Kind::RewriteDst:
      j["kind"] = "rewrite_dst";
      j["mac"] = a.mac;
      break;
    case Action::Kind::SendToController:
      j["kind"] = "to_controller";
      break;
    case Action::Kind::Drop:
      j["kind"] = "drop";
      break;
  }
  return j;
}

inline Action action_from_json(const json& j) {
  const std::string kind = j.at("kind");
  if (kind == "forward") return Action::forward(j.at("port"));
  if (kind == "rewrite_src") return Action::rewrite_src(j.at("mac"));
  if (kind == "rewrite_dst") return Action::rewrite_dst(j.at("mac"));
  if (kind == "to_controller") return Action::to_controller();
  if (kind == "drop") return Action::drop();
  throw Error(Errc::MalformedSnapshot, "unknown action kind " + kind);
}

}  // namespace snapjson

inline nlohmann::json to_json(const SwitchSnapshot& snap) {
  using nlohmann::json;
  json j;
  j["switch_id"] = snap.switch_id;
  j["host_node"] = snap.host_node;
  j["capture_tick"] = snap.capture_tick;
  j["config"] = snap.config;
  json queues = json::array();
  for (const auto& q : snap.queues)
    queues.push_back({{"queue_id", q.queue_id},
                      {"max_rate", q.max_rate},
                      {"pending_depth", q.pending_depth}});
  j["queues"] = queues;
  json rules = json::array();
  for (const auto& sr : snap.rules) {
    const FlowRule& r = sr.rule;
    json jr;
    jr["rule_id"] = r.rule_id;
    jr["priority"] = r.priority;
    json match;
    if (r.match.in_port) match["in_port"] = *r.match.in_port;
    if (r.match.src_mac) match["src_mac"] = *r.match.src_mac;
    if (r.match.dst_mac) match["dst_mac"] = *r.match.dst_mac;
    jr["match"] = match;
    json actions = json::array();
    for (const auto& a : r.actions) actions.push_back(snapjson::action_to_json(a));
    jr["actions"] = actions;
    jr["packets"] = r.packets;
    jr["bytes"] = r.bytes;
    if (r.idle_timeout) jr["idle_timeout"] = *r.idle_timeout;
    if (r.hard_timeout) jr["hard_timeout"] = *r.hard_timeout;
    jr["install_tick"] = r.install_tick;
    if (sr.idle_remaining) jr["idle_remaining"] = *sr.idle_remaining;
    if (sr.hard_remaining) jr["hard_remaining"] = *sr.hard_remaining;
    if (!r.owner_vn.empty()) jr["owner_vn"] = r.owner_vn;
    if (!r.owner_flow.empty()) jr["owner_flow"] = r.owner_flow;
    rules.push_back(jr);
  }
  j["rules"] = rules;
  return j;
}

inline SwitchSnapshot snapshot_from_json(const nlohmann::json& j) {
  try {
    SwitchSnapshot snap;
    snap.switch_id = j.at("switch_id");
    snap.host_node = j.at("host_node");
    snap.capture_tick = j.at("capture_tick");
    snap.config = j.at("config").get<std::map<std::string, std::string>>();
    for (const auto& jq : j.at("queues"))
      snap.queues.push_back(
          {jq.at("queue_id"), jq.at("max_rate"), jq.at("pending_depth")});
    for (const auto& jr : j.at("rules")) {
      SnapshotRule sr;
      FlowRule& r = sr.rule;
      r.rule_id = jr.at("rule_id");
      r.priority = jr.at("priority");
      const auto& match = jr.at("match");
      if (match.contains("in_port")) r.match.in_port = match["in_port"];
      if (match.contains("src_mac")) r.match.src_mac = match["src_mac"].get<Mac>();
      if (match.contains("dst_mac")) r.match.dst_mac = match["dst_mac"].get<Mac>();
      for (const auto& ja : jr.at("actions"))
        r.actions.push_back(snapjson::action_from_json(ja));
      r.packets = jr.at("packets");
      r.bytes = jr.at("bytes");
      if (jr.contains("idle_timeout")) r.idle_timeout = jr["idle_timeout"].get<Tick>();
      if (jr.contains("hard_timeout")) r.hard_timeout = jr["hard_timeout"].get<Tick>();
      r.install_tick = jr.at("install_tick");
      if (jr.contains("idle_remaining"))
        sr.idle_remaining = jr["idle_remaining"].get<Tick>();
      if (jr.contains("hard_remaining"))
        sr.hard_remaining = jr["hard_remaining"].get<Tick>();
      if (jr.contains("owner_vn")) r.owner_vn = jr["owner_vn"];
      if (jr.contains("owner_flow")) r.owner_flow = jr["owner_flow"];
      snap.rules.push_back(std::move(sr));
    }
    canonical_sort(snap.rules);
    return snap;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::MalformedSnapshot, e.what());
  }
}

inline std::string snapshot_to_canonical_string(const SwitchSnapshot& snap) {
  return to_json(snap).dump(2);
}

}  // namespace cloudmesh
