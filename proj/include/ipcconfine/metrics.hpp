#pragma once

// Counter collection and a microbenchmark of the renaming decision paths
// against an unconfined lookup.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ipcconfine/confinement_engine.hpp"

namespace ipcconfine {

EngineCounters collect_counters(const ConfinementEngine& engine);

struct BenchConfig {
  std::uint64_t iterations = 10'000;  // per path; at least min_iterations
  std::uint64_t min_iterations = 10'000;
  std::uint64_t long_list_size = 10'000;
  double short_warm_fraction = 0.5;
  std::uint64_t seed = 1;
  std::uint32_t batch = 64;   // ops timed together
  std::uint32_t trials = 5;   // per-path statistics keep the fastest trial
};

struct PathStats {
  std::string path;
  double mean_ns = 0;
  double median_ns = 0;
  double ratio = 0;  // median / baseline median
};

struct BenchReport {
  std::uint64_t iterations = 0;
  std::uint64_t long_list_size = 0;
  double short_warm_fraction = 0;
  std::string long_list_structure;
  std::vector<PathStats> paths;  // global_hit, short_hit, long_hit, rename_miss, post_seal_miss, baseline
  std::uint64_t post_seal_long_reads = 0;

  const PathStats& path(const std::string& name) const;
};

/// Throws InvalidConfig for out-of-range settings.
BenchReport bench_resolve(const BenchConfig& config);

nlohmann::json to_json(const BenchReport& report);
std::string bench_table(const BenchReport& report);

}  // namespace ipcconfine
