#include "doctest.h"

#include "cloudmesh/bench.hpp"
#include "cloudmesh/fit.hpp"

using namespace cloudmesh;

TEST_CASE("polyfit recovers exact polynomials") {
  std::vector<double> xs, line, quad;
  for (int i = 1; i <= 12; ++i) {
    xs.push_back(i);
    line.push_back(3.0 + 2.0 * i);
    quad.push_back(1.0 - 4.0 * i + 0.5 * i * i);
  }
  PolyFit lf = polyfit(xs, line, 1);
  CHECK(lf.r_squared == doctest::Approx(1.0));
  CHECK(lf.coeffs[0] == doctest::Approx(3.0));
  CHECK(lf.coeffs[1] == doctest::Approx(2.0));
  PolyFit qf = polyfit(xs, quad, 2);
  CHECK(qf.r_squared == doctest::Approx(1.0));
  CHECK(qf.coeffs[2] == doctest::Approx(0.5));

  // a line fit against clearly quadratic data has to lose accuracy
  PolyFit bad = polyfit(xs, quad, 1);
  CHECK(bad.r_squared < 0.999);
  CHECK_THROWS_AS(polyfit({1.0}, {1.0}, 1), Error);
}

TEST_CASE("setup bench matches the closed forms on unit weights") {
  CostModel cost{5, 1};
  auto mst = run_setup_bench(2, 16, TopologyKind::Mst, cost);
  auto mesh = run_setup_bench(2, 16, TopologyKind::FullMesh, cost);
  for (const auto& row : mst) {
    CHECK(row.tunnels == row.clouds - 1);
    CHECK(row.setup_cost == 6LL * (row.clouds - 1));
  }
  for (const auto& row : mesh) {
    CHECK(row.tunnels == static_cast<long long>(row.clouds) * (row.clouds - 1) / 2);
    CHECK(row.setup_cost == 6LL * row.tunnels);
  }
}

TEST_CASE("setup cost grows linearly for trees, quadratically for meshes") {
  CostModel cost{5, 1};
  std::vector<double> xs, mst_y, mesh_y;
  for (const auto& row : run_setup_bench(2, 24, TopologyKind::Mst, cost)) {
    xs.push_back(row.clouds);
    mst_y.push_back(static_cast<double>(row.setup_cost));
  }
  for (const auto& row : run_setup_bench(2, 24, TopologyKind::FullMesh, cost))
    mesh_y.push_back(static_cast<double>(row.setup_cost));
  CHECK(polyfit(xs, mst_y, 1).r_squared >= 0.999);
  CHECK(polyfit(xs, mesh_y, 2).r_squared >= 0.999);
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (xs[i] >= 3) CHECK(mesh_y[i] > mst_y[i]);
}

TEST_CASE("translation work per request does not grow with network count") {
  ControlRow small = run_control_bench(10, 400, true);
  ControlRow large = run_control_bench(200, 400, true);
  CHECK(small.mean_steps > 0);
  CHECK(large.mean_steps <= small.mean_steps * 1.1);
  CHECK(large.mean_steps >= small.mean_steps * 0.9);
  CHECK(small.mean_translation > 0);

  ControlRow base = run_control_bench(10, 400, false);
  CHECK(base.translation_steps == 0);
  CHECK(base.steps_total > 0);
}

TEST_CASE("data-plane overhead is the encap cost times tunnels on path") {
  for (const auto& row : run_data_bench()) {
    CHECK(row.diff == row.expected_diff);
    if (row.tunnels_on_path == 0) CHECK(row.diff == 0);
  }
}

TEST_CASE("isolation fuzz never crosses tenants") {
  auto res = run_isolation_fuzz(101, 4, 1200);
  CHECK(res.metrics.cross_tenant_deliveries == 0);
  CHECK(res.metrics.misdeliveries == 0);
  CHECK(res.metrics.conservation_violations == 0);
  CHECK(res.metrics.packets_delivered > 0);
  CHECK(res.cross_packets > 0);
  REQUIRE(res.metrics.lldp_responses.size() == 4);
  for (const auto& resp : res.metrics.lldp_responses)
    for (const auto& node : res.substrate_node_ids)
      CHECK(resp.find(node) == std::string::npos);
}

TEST_CASE("fuzz runs are reproducible per seed") {
  auto a = run_isolation_fuzz(55, 3, 600);
  auto b = run_isolation_fuzz(55, 3, 600);
  CHECK(a.metrics.to_json().dump() == b.metrics.to_json().dump());
  auto c = run_isolation_fuzz(56, 3, 600);
  CHECK(a.metrics.trace_hash != c.metrics.trace_hash);
}
