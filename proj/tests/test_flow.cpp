#include "doctest.h"

#include "cloudmesh/flow.hpp"

using namespace cloudmesh;

namespace {

FlowRule make_rule(std::int64_t id, int priority, std::optional<Mac> dst,
                   Tick install = 0) {
  FlowRule r;
  r.rule_id = id;
  r.priority = priority;
  r.match.dst_mac = dst;
  r.actions = {Action::forward("node:x")};
  r.install_tick = install;
  return r;
}

}  // namespace

TEST_CASE("highest priority rule wins") {
  Switch sw{"s1", "n1"};
  auto low = make_rule(1, 5, 0xAA);
  low.actions = {Action::drop()};
  sw.install(low);
  sw.install(make_rule(2, 10, 0xAA));
  auto* r = sw.lookup("any", 0x1, 0xAA, 0);
  REQUIRE(r != nullptr);
  CHECK(r->rule_id == 2);
}

TEST_CASE("priority ties go to earliest install then lowest id") {
  Switch sw{"s1", "n1"};
  sw.install(make_rule(5, 10, std::nullopt, 20));
  sw.install(make_rule(3, 10, 0xAA, 10));
  auto* r = sw.lookup("any", 0, 0xAA, 30);
  REQUIRE(r);
  CHECK(r->rule_id == 3);

  Switch sw2{"s2", "n2"};
  sw2.install(make_rule(9, 10, 0xAA, 10));
  sw2.install(make_rule(4, 10, std::nullopt, 10));
  auto* r2 = sw2.lookup("any", 0, 0xAA, 30);
  REQUIRE(r2);
  CHECK(r2->rule_id == 4);
}

TEST_CASE("no match is a miss, not an error") {
  Switch sw{"s1", "n1"};
  sw.install(make_rule(1, 10, 0xBB));
  CHECK(sw.lookup("any", 0, 0xAA, 0) == nullptr);
}

TEST_CASE("wildcards and in_port matching") {
  Switch sw{"s1", "n1"};
  FlowRule r = make_rule(1, 10, std::nullopt);
  r.match.in_port = "host:a";
  r.match.src_mac = 0x11;
  sw.install(r);
  CHECK(sw.lookup("host:a", 0x11, 0x999, 0) != nullptr);
  CHECK(sw.lookup("host:b", 0x11, 0x999, 0) == nullptr);
  CHECK(sw.lookup("host:a", 0x12, 0x999, 0) == nullptr);
}

TEST_CASE("idle deadline refreshes on match") {
  Switch sw{"s1", "n1"};
  FlowRule r = make_rule(1, 10, 0xAA);
  r.idle_timeout = 60;
  r.idle_deadline = 100;
  sw.install(r);
  auto* hit = sw.lookup("any", 0, 0xAA, 50);
  REQUIRE(hit);
  sw.touch(*hit, 100, 50);
  CHECK(*hit->idle_deadline == 110);
  CHECK(hit->packets == 1);
  CHECK(hit->bytes == 100);
}

TEST_CASE("a rule matches at deadline-1 and is gone at its deadline") {
  Switch sw{"s1", "n1"};
  FlowRule r = make_rule(1, 10, 0xAA);
  r.idle_timeout = 60;
  r.idle_deadline = 100;
  sw.install(r);
  CHECK(sw.lookup("any", 0, 0xAA, 99) != nullptr);
  Switch sw2 = sw;
  CHECK(sw2.lookup("any", 0, 0xAA, 100) == nullptr);
  CHECK(sw2.rules.empty());
}

TEST_CASE("hard deadline caps the idle deadline") {
  FlowRule r = make_rule(1, 10, 0xAA);
  r.idle_deadline = 500;
  r.hard_deadline = 200;
  CHECK(*r.deadline() == 200);
  CHECK(r.expired_at(200));
  CHECK_FALSE(r.expired_at(199));
}

TEST_CASE("install replaces an identical (priority, match) rule") {
  Switch sw{"s1", "n1"};
  sw.install(make_rule(1, 10, 0xAA));
  sw.install(make_rule(2, 10, 0xAA));
  CHECK(sw.rules.size() == 1);
  CHECK(sw.rules[0].rule_id == 2);
}
