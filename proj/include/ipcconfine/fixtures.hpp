#pragma once

// Bundled scenarios.

#include <cstdint>
#include <string>
#include <vector>

#include "ipcconfine/generator.hpp"
#include "ipcconfine/replay.hpp"
#include "ipcconfine/trace.hpp"

namespace ipcconfine {

/// RPCSS object inventory: host services own the host-object rows, a
/// virtualized RPCSS in vm1 creates the isolation rows and the global
/// section, opens every host-object row, then the flag is set.
std::vector<TraceEvent> fixture_rpcss();

/// Three VMs each running an RPCSS + IIS stack and binding port 80 on its
/// own alias address, with cross-VM probes that must all fail.
std::vector<TraceEvent> fixture_three_iis();

struct ScenarioOptions {
  std::uint64_t seed = 7;
  std::uint32_t events = 500;
  bool dual_oracle = false;
};

struct ScenarioRun {
  std::string name;
  std::vector<TraceEvent> events;
  ReplayReport report;
};

/// name is one of rpcss, three-iis, random. Throws UnknownScenario.
ScenarioRun run_scenario(const std::string& name, const ScenarioOptions& options = {});
std::vector<TraceEvent> scenario_events(const std::string& name, const ScenarioOptions& options = {});

}  // namespace ipcconfine
