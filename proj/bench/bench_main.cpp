// Serial vs OpenMP kernels: property sweeps, stress replay, and the
// optimized resolver against the reference scan.

#include <chrono>
#include <cstdio>
#include <random>

#include <omp.h>

#include <CLI11.hpp>

#include "ipcconfine/replay.hpp"
#include "ipcconfine/sweep.hpp"

using namespace ipcconfine;

namespace {

template <typename F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void row(const char* what, double serial, double parallel) {
  std::printf("%-28s %10.4f %10.4f %8.2fx\n", what, serial, parallel, parallel > 0 ? serial / parallel : 0.0);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Serial vs parallel kernel benchmark"};
  std::uint64_t cases = 64, resolves = 200'000;
  std::uint32_t events = 500, long_list = 2000;
  int threads = 0;
  app.add_option("--cases", cases, "Sweep cases")->check(CLI::PositiveNumber);
  app.add_option("--events", events, "Events per generated trace")->check(CLI::PositiveNumber);
  app.add_option("--threads", threads, "OpenMP threads (0: default)");
  app.add_option("--resolves", resolves, "Resolves for the engine comparison")->check(CLI::PositiveNumber);
  app.add_option("--long-list", long_list, "Long list size for the engine comparison")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  const int workers = threads > 0 ? threads : omp_get_max_threads();
  std::printf("threads: %d\n", workers);
  std::printf("%-28s %10s %10s %9s\n", "kernel", "serial s", "other s", "speedup");

  std::vector<SweepCase> sweep;
  for (std::uint64_t s = 1; s <= cases; ++s) {
    SweepCase c{s, {}};
    c.params.event_count = events;
    c.params.seal_position = events / 2;
    sweep.push_back(c);
  }
  std::vector<SweepResult> a, b;
  const double ts = seconds([&] { a = sweep_serial(sweep); });
  const double tp = seconds([&] { b = sweep_parallel(sweep, threads); });
  row("property sweep (parallel)", ts, tp);
  if (a != b) {
    std::fprintf(stderr, "serial and parallel sweeps disagree\n");
    return 1;
  }

  TraceParams big;
  big.event_count = events * 8;
  big.seal_position = big.event_count / 2;
  big.process_count = 24;
  auto trace = generate_random_trace(1, big);
  StressReport stress;
  const double rs = seconds([&] { replay(trace); });
  const double rc = seconds([&] { stress = replay_concurrent(trace, workers); });
  row("trace replay (concurrent)", rs, rc);
  if (!stress.violations.empty()) {
    std::fprintf(stderr, "concurrent replay violated %zu invariants\n", stress.violations.size());
    return 1;
  }

  std::vector<ObjectName> host;
  for (std::uint32_t i = 0; i < long_list; ++i) host.emplace_back("\\host\\obj" + std::to_string(i));
  std::vector<ObjectName> probes;
  std::mt19937_64 rng(7);
  for (std::uint64_t i = 0; i < resolves; ++i)
    probes.emplace_back(rng() % 2 ? host[rng() % host.size()].str() : "\\private\\p" + std::to_string(rng() % 512));
  ConfinementEngine engine;
  ReferenceEngine reference;
  engine.load_long_list(host);
  reference.load_long_list(host);
  const ProcessRef caller{Pid{2}, VmId{1}};
  const IpcCategory cat{IpcGroup::IV_Sync, "Event"};
  std::size_t sink = 0;
  const double tr = seconds([&] {
    for (const auto& n : probes) sink += reference.resolve(caller, n, cat, Intent::Open).effective_name.str().size();
  });
  const double te = seconds([&] {
    for (const auto& n : probes) sink += engine.resolve(caller, n, cat, Intent::Open).effective_name.str().size();
  });
  row("resolve (optimized vs ref)", tr, te);
  std::printf("checksum %zu\n", sink);
  return 0;
}
