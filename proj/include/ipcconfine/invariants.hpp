#pragma once

// Checks over engine state and replay reports. Each returns a list of
// human-readable violations; empty means the property holds.

#include <set>
#include <string>
#include <vector>

#include "ipcconfine/confinement_engine.hpp"
#include "ipcconfine/replay.hpp"

namespace ipcconfine {

std::vector<std::string> check_counter_conservation(const EngineCounters& c);

/// Every short-list entry must be covered by the long list.
std::vector<std::string> check_short_within_long(const EngineSnapshot& s);

/// long_hits/long_misses and the short list do not move after the seal.
std::vector<std::string> check_frozen_after_seal(const ReplayReport& report);

/// Two distinct VMs only ever share an effective name through the
/// host-object route, and that name is the original one.
std::vector<std::string> check_namespace_disjointness(const ReplayReport& report);

/// Long-list names that a VM process resolved after the seal without any VM
/// process having resolved them before it.
std::set<std::string> post_seal_first_touch_names(const std::vector<TraceEvent>& events,
                                                  const ReplayReport& report);

}  // namespace ipcconfine
