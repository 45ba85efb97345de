// ipcconfine: replay traces, run bundled scenarios, benchmark, inspect
// engine state and validate trace files.
//
// Exit codes: 0 success, 1 assertion or divergence failure, 2 input error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "ipcconfine/fixtures.hpp"
#include "ipcconfine/metrics.hpp"
#include "ipcconfine/replay.hpp"
#include "ipcconfine/trace.hpp"

using namespace ipcconfine;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kInputError = 2;

void configure_logging() {
  spdlog::set_level(spdlog::level::warn);
  spdlog::set_pattern("[%l] %v");
  if (const char* env = std::getenv("IPCCONFINE_LOG")) {
    std::string level(env);
    if (level == "error") spdlog::set_level(spdlog::level::err);
    else if (level == "warn") spdlog::set_level(spdlog::level::warn);
    else if (level == "info") spdlog::set_level(spdlog::level::info);
    else if (level == "debug") spdlog::set_level(spdlog::level::debug);
    else spdlog::warn("ignoring IPCCONFINE_LOG={} (expected error|warn|info|debug)", level);
  }
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidConfig, "cannot write '" + path + "'");
  out << text;
}

int summarize(const ReplayReport& report, bool dual, const std::string& report_path) {
  if (!report_path.empty()) {
    write_file(report_path, report_text(report));
    spdlog::info("report written to {}", report_path);
  }
  for (const auto& f : report.failures)
    std::cout << "FAIL seq " << f.seq << ": " << f.field << " expected " << f.expected << ", got " << f.actual << "\n";
  for (const auto& d : report.divergences)
    std::cout << "DIVERGENCE seq " << d.seq << " vm" << d.vm << " '" << d.name << "': optimized "
              << to_string(d.optimized.route) << " " << d.optimized.effective_name.str() << ", reference "
              << to_string(d.reference.route) << " " << d.reference.effective_name.str() << "\n";
  std::cout << report.events_run << " events, " << report.assertions_passed << " assertions passed, "
            << report.assertions_failed << " failed";
  if (dual) std::cout << ", " << report.divergences.size() << " divergences";
  std::cout << "\n";
  const bool ok = report.assertions_failed == 0 && (!dual || report.divergences.empty());
  return ok ? kOk : kFailed;
}

void print_state(const EngineSnapshot& s) {
  std::cout << "flag: " << (s.sealed ? "true" : "false") << "\n";
  std::cout << "long list (" << s.long_list.size() << "):\n";
  for (const auto& n : s.long_list) std::cout << "  " << n << "\n";
  std::cout << "short list (" << s.short_list.size() << ", most recent first):\n";
  for (const auto& n : s.short_list) std::cout << "  " << n << "\n";
  std::cout << "global-object tables:\n";
  for (const auto& [vm, names] : s.global_tables) {
    std::cout << "  " << vm_tag(VmId{vm}) << ":\n";
    for (const auto& n : names) std::cout << "    " << n << "\n";
  }
  std::cout << "counters:\n";
  const auto counters = to_json(s.counters);
  for (const auto& [k, v] : counters.items()) std::cout << "  " << k << " = " << v << "\n";
}

void print_bindings(const ReplayReport& report) {
  std::cout << "pid   vm   requested         effective         port\n";
  for (const auto& b : report.bindings) {
    char line[128];
    std::snprintf(line, sizeof line, "%-5u %-4u %-17s %-17s %d\n", b.pid, b.vm, b.requested_ip.c_str(),
                  b.effective_ip.c_str(), b.port);
    std::cout << line;
  }
  std::set<std::string> ips;
  for (const auto& b : report.bindings) ips.insert(b.effective_ip);
  std::cout << report.bindings.size() << " bindings on " << ips.size() << " distinct addresses, "
            << report.cross_vm_opens << " cross-VM object opens\n";
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"IPC confinement simulator for OS-level virtual machines"};
  app.require_subcommand(1);

  std::string trace_path, report_path, emit_path, json_path, scenario_name;
  bool dual = false;
  ScenarioOptions scen;
  BenchConfig bench;

  auto* replay_cmd = app.add_subcommand("replay", "Replay a JSONL trace and check its expectations");
  replay_cmd->add_option("trace", trace_path, "Trace file")->required()->check(CLI::ExistingFile);
  replay_cmd->add_flag("--dual-oracle", dual, "Run the reference resolver in lockstep");
  replay_cmd->add_option("--report", report_path, "Write the JSON report here");

  auto* scenario_cmd = app.add_subcommand("scenario", "Generate and replay a bundled scenario");
  scenario_cmd->add_option("name", scenario_name, "rpcss | three-iis | random")->required();
  scenario_cmd->add_option("--seed", scen.seed, "Seed for the random scenario");
  scenario_cmd->add_option("--events", scen.events, "Event count for the random scenario")->check(CLI::PositiveNumber);
  scenario_cmd->add_flag("--dual-oracle", dual, "Run the reference resolver in lockstep");
  scenario_cmd->add_option("--report", report_path, "Write the JSON report here");
  scenario_cmd->add_option("--emit", emit_path, "Also write the scenario trace as JSONL");

  auto* bench_cmd = app.add_subcommand("bench", "Benchmark the renaming decision paths");
  bench_cmd->add_option("--iterations", bench.iterations, "Operations per path");
  bench_cmd->add_option("--long-list", bench.long_list_size, "Long host-object list size");
  bench_cmd->add_option("--short-warm", bench.short_warm_fraction, "Fraction of the long list pre-promoted");
  bench_cmd->add_option("--seed", bench.seed, "Workload seed");
  bench_cmd->add_option("--trials", bench.trials, "Repetitions per path");
  bench_cmd->add_option("--json", json_path, "Write the JSON report here ('-' for stdout)");

  auto* inspect_cmd = app.add_subcommand("inspect", "Replay, then dump engine state");
  inspect_cmd->add_option("trace", trace_path, "Trace file")->check(CLI::ExistingFile);
  inspect_cmd->add_option("--scenario", scenario_name, "Inspect a bundled scenario instead of a file");

  auto* validate_cmd = app.add_subcommand("validate", "Parse and validate a trace file");
  validate_cmd->add_option("trace", trace_path, "Trace file")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kInputError;
  }

  try {
    if (*replay_cmd) {
      auto events = read_trace_file(trace_path);
      spdlog::info("replaying {} events from {}", events.size(), trace_path);
      auto report = replay(events, dual ? ReplayMode::DualWithOracle : ReplayMode::Single);
      return summarize(report, dual, report_path);
    }
    if (*scenario_cmd) {
      scen.dual_oracle = dual;
      auto run = run_scenario(scenario_name, scen);
      if (!emit_path.empty()) write_trace_file(emit_path, run.events);
      int rc = summarize(run.report, dual, report_path);
      if (scenario_name == "three-iis") {
        print_bindings(run.report);
        if (run.report.cross_vm_opens != 0) rc = kFailed;
      }
      return rc;
    }
    if (*bench_cmd) {
      auto report = bench_resolve(bench);
      if (json_path == "-")
        std::cout << to_json(report).dump(2) << "\n";
      else {
        std::cout << bench_table(report);
        if (!json_path.empty()) write_file(json_path, to_json(report).dump(2) + "\n");
      }
      return kOk;
    }
    if (*inspect_cmd) {
      if (trace_path.empty() == scenario_name.empty()) {
        std::cerr << "inspect needs exactly one of a trace file or --scenario\n";
        return kInputError;
      }
      auto events = trace_path.empty() ? scenario_events(scenario_name, scen) : read_trace_file(trace_path);
      auto report = replay(events);
      print_state(report.final_state);
      return kOk;
    }
    if (*validate_cmd) {
      auto events = read_trace_file(trace_path);
      std::cout << events.size() << " events OK\n";
      return kOk;
    }
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
