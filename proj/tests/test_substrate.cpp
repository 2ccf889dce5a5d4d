#include "doctest.h"

#include <random>

#include "cloudmesh/substrate.hpp"
#include "helpers.hpp"

using namespace cloudmesh;
using namespace cmtest;

TEST_CASE("add_cloud base cases") {
  SubstrateGraph g;
  g = add_cloud(g, {"aws-eu", CloudKind::Public, "eu"});
  CHECK(g.clouds.size() == 1);
  CHECK(g.nodes.empty());

  auto g2 = add_cloud(g, {"B", CloudKind::Public, ""}, {{"aws-eu", 7}});
  CHECK(g2.inter_cloud_weight("aws-eu", "B") == 7);

  CHECK_THROWS_WITH_AS(add_cloud(g2, {"B", CloudKind::Public, ""}),
                       doctest::Contains("DuplicateCloudId"), Error);
}

TEST_CASE("add_cloud defaults missing pair weights to 1") {
  SubstrateGraph g;
  g = add_cloud(g, {"a", CloudKind::Public, ""});
  g = add_cloud(g, {"b", CloudKind::Public, ""});
  g = add_cloud(g, {"c", CloudKind::Public, ""}, {{"a", 9}});
  CHECK(g.inter_cloud_weight("a", "b") == 1);
  CHECK(g.inter_cloud_weight("a", "c") == 9);
  CHECK(g.inter_cloud_weight("b", "c") == 1);
  // total over all pairs
  CHECK(g.inter_cloud_weights.size() == 3);
}

TEST_CASE("add_node role constraints") {
  SubstrateGraph g;
  g = add_cloud(g, {"pub", CloudKind::Public, ""});
  g = add_cloud(g, {"priv", CloudKind::Private, "on-prem"});
  g = add_node(g, {"vm1", "pub", NodeRole::Vm, 2});
  CHECK(g.nodes.count("vm1") == 1);
  CHECK_THROWS_AS(add_node(g, {"hw", "pub", NodeRole::HardwareSwitch, 0}), Error);
  CHECK_NOTHROW(add_node(g, {"hw", "priv", NodeRole::HardwareSwitch, 0}));
  CHECK_THROWS_WITH_AS(add_node(g, {"x", "nope", NodeRole::Vm, 1}),
                       doctest::Contains("UnknownCloud"), Error);
  // second gateway accepted at add time, flagged by validate
  g = add_node(g, {"gw1", "pub", NodeRole::Gateway, 0});
  CHECK_NOTHROW(add_node(g, {"gw2", "pub", NodeRole::Gateway, 0}));
}

TEST_CASE("validate gateway and link rules") {
  SubstrateGraph g = add_public_cloud({}, "a", 2);
  g = add_public_cloud(g, "b", 1);
  CHECK(validate(g).ok());

  SubstrateGraph no_gw;
  no_gw = add_cloud(no_gw, {"x", CloudKind::Public, ""});
  auto report = validate(no_gw);
  CHECK_FALSE(report.ok());
  CHECK(report.has("MissingGateway"));

  auto crossed = add_link(g, {"a-vm0", "b-vm0", 1, 10});
  CHECK(validate(crossed).has("CrossCloudLink"));

  auto extra = add_node(g, {"a-gw2", "a", NodeRole::Gateway, 0});
  CHECK(validate(extra).has("ExtraGateway"));

  auto dangling = add_link(g, {"a-vm0", "ghost", 1, 10});
  CHECK(validate(dangling).has("DanglingLinkEndpoint"));
}

TEST_CASE("gateway with hosting capacity is informational only") {
  SubstrateGraph g = add_public_cloud({}, "a", 1);
  g = add_node(g, {"b-gw", "a", NodeRole::Vm, 0});  // noise
  SubstrateGraph g2;
  g2 = add_cloud(g2, {"c", CloudKind::Public, ""});
  g2 = add_node(g2, {"c-gw", "c", NodeRole::Gateway, 2});
  auto report = validate(g2);
  CHECK(report.ok());
  CHECK(report.has("GatewayHostsTenantVms"));
}

TEST_CASE("intra_cloud_path public cloud is one hop of cost 1") {
  SubstrateGraph g = add_public_cloud({}, "big", 40);
  auto p = intra_cloud_path(g, "big-vm3", "big-vm27");
  CHECK(p.cost == 1);
  CHECK(p.nodes == std::vector<std::string>{"big-vm3", "big-vm27"});
  // size independence
  auto p2 = intra_cloud_path(g, "big-vm0", "big-vm39");
  CHECK(p2.cost == 1);
}

TEST_CASE("intra_cloud_path private line") {
  SubstrateGraph g;
  g = add_cloud(g, {"p", CloudKind::Private, ""});
  g = add_node(g, {"A", "p", NodeRole::Vm, 1});
  g = add_node(g, {"B", "p", NodeRole::Vm, 1});
  g = add_node(g, {"C", "p", NodeRole::Vm, 1});
  g = add_link(g, {"A", "B", 2, 10});
  g = add_link(g, {"B", "C", 3, 10});
  auto p = intra_cloud_path(g, "A", "C");
  CHECK(p.nodes == std::vector<std::string>{"A", "B", "C"});
  CHECK(p.cost == 5);
}

TEST_CASE("intra_cloud_path errors") {
  SubstrateGraph g = add_public_cloud({}, "a", 1);
  g = add_public_cloud(g, "b", 1);
  CHECK_THROWS_WITH_AS(intra_cloud_path(g, "a-vm0", "b-vm0"),
                       doctest::Contains("DifferentClouds"), Error);

  SubstrateGraph priv;
  priv = add_cloud(priv, {"p", CloudKind::Private, ""});
  priv = add_node(priv, {"A", "p", NodeRole::Vm, 1});
  priv = add_node(priv, {"B", "p", NodeRole::Vm, 1});
  CHECK_THROWS_WITH_AS(intra_cloud_path(priv, "A", "B"),
                       doctest::Contains("NoPath"), Error);
}

TEST_CASE("equal-cost tie breaks to the lexicographically smaller sequence") {
  // Two cost-2 routes A->Z: via M and via N; M < N wins.
  SubstrateGraph g;
  g = add_cloud(g, {"p", CloudKind::Private, ""});
  for (const char* n : {"A", "M", "N", "Z"})
    g = add_node(g, {n, "p", NodeRole::Vm, 1});
  g = add_link(g, {"A", "M", 1, 10});
  g = add_link(g, {"M", "Z", 1, 10});
  g = add_link(g, {"A", "N", 1, 10});
  g = add_link(g, {"N", "Z", 1, 10});
  auto p = intra_cloud_path(g, "A", "Z");
  CHECK(p.nodes == std::vector<std::string>{"A", "M", "Z"});
}

TEST_CASE("private paths match brute-force oracle on random graphs") {
  std::mt19937 rng(20240817);
  int checked = 0;
  for (int trial = 0; trial < 220; ++trial) {
    int n = 2 + static_cast<int>(rng() % 7);  // <= 8 nodes
    SubstrateGraph g;
    g = add_cloud(g, {"p", CloudKind::Private, ""});
    std::vector<std::string> names;
    for (int i = 0; i < n; ++i) {
      names.push_back("n" + std::to_string(i));
      g = add_node(g, {names.back(), "p", NodeRole::Vm, 1});
    }
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (rng() % 100 < 55)
          g = add_link(g, {names[i], names[j], 1 + static_cast<int>(rng() % 9), 10});
    std::string a = names[rng() % n], b = names[rng() % n];
    if (a == b) continue;
    auto expected = brute_force_shortest(g, a, b);
    if (!expected) {
      CHECK_THROWS_AS(intra_cloud_path(g, a, b), Error);
      continue;
    }
    auto got = intra_cloud_path(g, a, b);
    CHECK(got.cost == expected->cost);
    CHECK(got.nodes == expected->nodes);
    checked++;
  }
  CHECK(checked >= 120);
}

TEST_CASE("operations do not mutate previously returned graphs") {
  SubstrateGraph g0 = add_public_cloud({}, "a", 1);
  auto before = validate(g0).findings.size();
  auto g1 = add_cloud(g0, {"b", CloudKind::Public, ""});
  auto g2 = add_node(g1, {"loose", "b", NodeRole::Vm, 1});
  (void)g2;
  CHECK(g0.clouds.size() == 1);
  CHECK(g1.nodes.count("loose") == 0);
  CHECK(validate(g0).findings.size() == before);
}
