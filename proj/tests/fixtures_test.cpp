#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "ipcconfine/fixtures.hpp"
#include "ipcconfine/invariants.hpp"

using namespace ipcconfine;

TEST_CASE("bundled trace files match the generated fixtures") {
  for (const auto& [file, events] : {std::pair{"rpcss.jsonl", fixture_rpcss()},
                                     std::pair{"three_iis.jsonl", fixture_three_iis()}}) {
    std::ifstream in(std::string(IPCCONFINE_FIXTURE_DIR) + "/" + file, std::ios::binary);
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == serialize_trace(events));
  }
}

TEST_CASE("rpcss scenario passes every assertion") {
  auto run = run_scenario("rpcss", {7, 500, true});
  CHECK(run.report.assertions_failed == 0);
  CHECK(run.report.assertions_passed > 0);
  CHECK(run.report.divergences.empty());
}

TEST_CASE("three-iis scenario isolates the web servers") {
  auto run = run_scenario("three-iis", {7, 500, true});
  const auto& r = run.report;
  CHECK(r.assertions_failed == 0);
  CHECK(r.divergences.empty());
  CHECK(r.cross_vm_opens == 0);
  REQUIRE(r.bindings.size() == 3);
  std::set<std::string> ips;
  for (const auto& b : r.bindings) {
    CHECK(b.port == 80);
    ips.insert(b.effective_ip);
  }
  CHECK(ips == std::set<std::string>{"10.0.0.2", "10.0.0.3", "10.0.0.4"});
  CHECK(check_namespace_disjointness(r).empty());
}

TEST_CASE("random scenario honours seed and size") {
  ScenarioOptions o;
  o.seed = 3;
  o.events = 200;
  auto a = scenario_events("random", o);
  CHECK(a == scenario_events("random", o));
  CHECK(a.size() > 200);
  CHECK_THROWS_AS(scenario_events("nosuch"), Error);
}
