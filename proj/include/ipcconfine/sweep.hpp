#pragma once

// Property sweeps over many generated traces. Each case is independent, so
// the parallel kernel distributes cases over OpenMP threads; the serial
// kernel is kept as the reference the parallel one is tested against.

#include <cstdint>
#include <string>
#include <vector>

#include "ipcconfine/generator.hpp"

namespace ipcconfine {

struct SweepCase {
  std::uint64_t seed = 0;
  TraceParams params;
};

struct SweepResult {
  std::uint64_t seed = 0;
  std::uint64_t events = 0;
  std::uint64_t divergences = 0;
  std::vector<std::string> divergent_names;    // sorted, unique
  std::vector<std::string> first_touch_names;  // post-seal first-touch host objects
  std::uint64_t disjointness_violations = 0;
  std::uint64_t frozen_violations = 0;
  std::uint64_t conservation_violations = 0;
  std::uint64_t host_passthrough_vm_outcomes = 0;
  bool deterministic = false;   // two replays rendered identically
  std::uint64_t report_digest = 0;  // FNV-1a of the rendered report

  friend bool operator==(const SweepResult&, const SweepResult&) = default;
};

/// Generates the trace, replays it twice in DualWithOracle mode and runs
/// every trace-level invariant check.
SweepResult run_case(const SweepCase& c);

std::vector<SweepResult> sweep_serial(const std::vector<SweepCase>& cases);
/// threads <= 0 uses the OpenMP default.
std::vector<SweepResult> sweep_parallel(const std::vector<SweepCase>& cases, int threads = 0);

std::uint64_t fnv1a(std::string_view data) noexcept;

}  // namespace ipcconfine
