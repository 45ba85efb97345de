#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ipcconfine/confinement_engine.hpp"
#include "ipcconfine/trace.hpp"

namespace ipcconfine {

enum class ReplayMode { Single, DualWithOracle };

class ReplayError : public Error {
 public:
  ReplayError(std::uint64_t seq, const std::string& detail)
      : Error(ErrorCode::ReplayError, "seq " + std::to_string(seq) + ": " + detail), seq_(seq) {}
  std::uint64_t seq() const noexcept { return seq_; }

 private:
  std::uint64_t seq_;
};

/// Adjudicated result of one event.
struct EventOutcome {
  std::uint64_t seq = 0;
  TraceOp op = TraceOp::Seal;
  std::optional<std::uint32_t> vm;              // actor's VM
  std::optional<std::string> name;              // original name (create/open)
  std::optional<Route> route;
  std::optional<std::string> effective_name;
  std::optional<Decision> decision;
  std::optional<std::string> error;             // AccessStatus or ErrorCode spelling
  std::optional<std::string> effective_ip;
  std::optional<std::uint32_t> scope_vm;
  std::optional<std::uint64_t> object_id;
  std::optional<std::uint32_t> object_creator_vm;
};

struct AssertionFailure {
  std::uint64_t seq = 0;
  std::string field;
  std::string expected;
  std::string actual;
};

struct Divergence {
  std::uint64_t seq = 0;
  std::uint32_t vm = 0;
  std::string name;
  ResolveOutcome optimized;
  ResolveOutcome reference;
};

struct BindingRow {
  std::uint32_t pid = 0;
  std::uint32_t vm = 0;
  std::string requested_ip;
  std::string effective_ip;
  int port = 0;
};

struct ReplayReport {
  ReplayMode mode = ReplayMode::Single;
  std::uint64_t events_run = 0;
  std::uint64_t assertions_passed = 0;
  std::vector<AssertionFailure> failures;  // one entry per mismatching field
  std::uint64_t assertions_failed = 0;     // events with at least one mismatch
  std::vector<Divergence> divergences;
  std::vector<EventOutcome> outcomes;
  std::optional<std::uint64_t> seal_seq;
  std::optional<EngineSnapshot> seal_state;  // taken right after the first seal
  EngineSnapshot final_state;
  std::vector<BindingRow> bindings;
  std::uint64_t live_objects = 0;
  std::uint64_t cross_vm_opens = 0;
};

/// Runs the events against a fresh topology, engine and kernel. In
/// DualWithOracle mode a ReferenceEngine resolves every create/open in
/// lockstep and differing outcomes are recorded as divergences.
///
/// Registry refusals (AlreadyExists, NotFound, CategoryMismatch) and
/// AddressInUse are ordinary outcomes. Any other error aborts with
/// ReplayError unless the event expects exactly that error.
ReplayReport replay(const std::vector<TraceEvent>& events, ReplayMode mode = ReplayMode::Single);

nlohmann::json to_json(const ReplayReport& report);
nlohmann::json to_json(const EngineSnapshot& snapshot);
nlohmann::json to_json(const EngineCounters& counters);
/// Deterministic rendering used for report files and determinism checks.
std::string report_text(const ReplayReport& report);

/// Outcome of a concurrent replay. Per-process event order is preserved;
/// seal events act as barriers between segments.
struct StressReport {
  std::uint64_t events_run = 0;
  std::uint64_t refused = 0;   // registry refusals and tolerated errors
  int workers = 0;
  EngineSnapshot final_state;
  std::vector<std::string> violations;
};

StressReport replay_concurrent(const std::vector<TraceEvent>& events, int workers);

}  // namespace ipcconfine
