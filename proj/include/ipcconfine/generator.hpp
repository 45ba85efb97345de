#pragma once

#include <cstdint>
#include <vector>

#include "ipcconfine/trace.hpp"

namespace ipcconfine {

struct TraceParams {
  std::uint32_t vm_count = 3;
  std::uint32_t process_count = 9;  // VM processes, spread round-robin; one host process is added
  std::uint32_t name_pool_size = 40;
  double host_fraction = 0.3;
  double global_fraction = 0.1;
  std::uint32_t event_count = 500;
  std::uint32_t seal_position = 250;  // body events emitted before the seal
  /// Post-seal host-object resolves only use names already resolved by a VM
  /// process before the seal.
  bool constrained = true;
  /// Keep one host object untouched before the seal and resolve it from a
  /// VM right after. Requires host_fraction > 0.
  bool post_seal_first_touch = false;
};

/// Deterministic in (seed, params). Events are simulated while generated so
/// that every close refers to a live handle.
std::vector<TraceEvent> generate_random_trace(std::uint64_t seed, const TraceParams& params = {});

}  // namespace ipcconfine
