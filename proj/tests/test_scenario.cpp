#include "doctest.h"

#include <cstdio>
#include <fstream>

#include "cloudmesh/scenario.hpp"

using namespace cloudmesh;

namespace {

nlohmann::json sample_json() {
  return nlohmann::json::parse(R"({
    "clouds": [
      {"cloud_id": "east", "kind": "public", "region_label": "us-east"},
      {"cloud_id": "west", "kind": "public"},
      {"cloud_id": "dc", "kind": "private"}
    ],
    "inter_cloud_weights": [
      {"a": "east", "b": "west", "weight": 2},
      {"a": "east", "b": "dc", "weight": 1},
      {"a": "west", "b": "dc", "weight": 3}
    ],
    "nodes": [
      {"node_id": "east-gw", "cloud_id": "east", "role": "gateway", "capacity": 0},
      {"node_id": "east-a", "cloud_id": "east", "role": "vm", "capacity": 2},
      {"node_id": "west-gw", "cloud_id": "west", "role": "gateway", "capacity": 0},
      {"node_id": "west-a", "cloud_id": "west", "role": "vm", "capacity": 2},
      {"node_id": "dc-gw", "cloud_id": "dc", "role": "gateway", "capacity": 0},
      {"node_id": "dc-s1", "cloud_id": "dc", "role": "hardware_switch", "capacity": 2}
    ],
    "links": [
      {"a": "dc-gw", "b": "dc-s1", "weight": 1, "bandwidth": 100000}
    ],
    "fabric": {"topology": "mst", "cost_fixed": 5, "cost_per_weight": 1},
    "constants": {"tunnel_latency": 50, "tunnel_encap_overhead": 2, "idle_timeout": 60},
    "tenants": [{"name": "acme"}],
    "virtual_networks": [
      {
        "tenant": "acme",
        "vnodes": [
          {"vnode_id": "web", "vmac": "0a:00:00:00:00:01", "location_constraint": "east"},
          {"vnode_id": "db", "vmac": "0a:00:00:00:00:02", "location_constraint": "west"}
        ],
        "vlinks": [{"a": "web", "b": "db"}]
      }
    ],
    "traffic": [
      {"kind": "ping", "src": "web", "dst": "db", "count": 3, "interval": 200}
    ]
  })");
}

}  // namespace

TEST_CASE("a full scenario loads and runs") {
  Scenario sc = load_scenario(sample_json());
  CHECK(sc.graph.clouds.size() == 3);
  CHECK(sc.graph.nodes.size() == 6);
  CHECK(sc.graph.cloud("dc").kind == CloudKind::Private);
  CHECK(sc.graph.inter_cloud_weight("east", "west") == 2);
  CHECK(sc.graph.links.size() == 1);
  CHECK(sc.fabric_kind == TopologyKind::Mst);
  CHECK(sc.constants.tunnel_latency == 50);
  CHECK(sc.hv_config.idle_timeout == 60);
  REQUIRE(sc.vns.size() == 1);
  CHECK(sc.vns[0].spec.vnodes[0].vmac == 0x0A0000000001ULL);

  ScenarioRuntime rt = build_runtime(sc, 1);
  Metrics m = rt.engine.run();
  CHECK(m.ping_rtt.size() == 3);
  CHECK(m.packets_lost == 0);
  CHECK(m.cross_tenant_deliveries == 0);
}

TEST_CASE("unknown keys are rejected wherever they appear") {
  auto top = sample_json();
  top["surprise"] = 1;
  CHECK_THROWS_WITH_AS(load_scenario(top), doctest::Contains("MalformedScenario"),
                       Error);

  auto nested = sample_json();
  nested["clouds"][0]["color"] = "blue";
  CHECK_THROWS_WITH_AS(load_scenario(nested), doctest::Contains("unknown key"),
                       Error);

  auto traffic = sample_json();
  traffic["traffic"][0]["jitter"] = 5;
  CHECK_THROWS_AS(load_scenario(traffic), Error);
}

TEST_CASE("malformed values are reported as scenario errors") {
  auto bad_kind = sample_json();
  bad_kind["clouds"][0]["kind"] = "hybrid";
  CHECK_THROWS_AS(load_scenario(bad_kind), Error);

  auto bad_role = sample_json();
  bad_role["nodes"][0]["role"] = "router";
  CHECK_THROWS_AS(load_scenario(bad_role), Error);

  auto bad_mac = sample_json();
  bad_mac["virtual_networks"][0]["vnodes"][0]["vmac"] = "zz:zz";
  CHECK_THROWS_AS(load_scenario(bad_mac), Error);

  auto missing = sample_json();
  missing["nodes"][0].erase("node_id");
  CHECK_THROWS_WITH_AS(load_scenario(missing), doctest::Contains("MalformedScenario"),
                       Error);
}

TEST_CASE("invalid substrates fail at runtime construction") {
  auto j = sample_json();
  j["nodes"].erase(0);  // east loses its gateway
  Scenario sc = load_scenario(j);
  CHECK_THROWS_WITH_AS(build_runtime(sc, 1), doctest::Contains("MissingGateway"),
                       Error);
}

TEST_CASE("scenario files load from disk") {
  std::string path = "scenario_test_tmp.json";
  {
    std::ofstream out(path);
    out << sample_json().dump(2);
  }
  Scenario sc = load_scenario_file(path);
  CHECK(sc.tenants == std::vector<std::string>{"acme"});
  std::remove(path.c_str());
  CHECK_THROWS_WITH_AS(load_scenario_file("does_not_exist.json"),
                       doctest::Contains("MalformedScenario"), Error);
}

TEST_CASE("baseline scenarios run without translation work") {
  auto j = sample_json();
  j["constants"]["virtualized"] = false;
  Scenario sc = load_scenario(j);
  ScenarioRuntime rt = build_runtime(sc, 1);
  Metrics m = rt.engine.run();
  CHECK(m.ping_rtt.size() == 3);
  CHECK(m.translation_steps == 0);
}
