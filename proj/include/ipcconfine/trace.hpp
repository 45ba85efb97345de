#pragma once

// Trace wire format: UTF-8 JSONL, one event object per line.
//
//   {"seq":1,"op":"load_long_list","names":["\\RPC Control\\ntsvcs"]}
//   {"seq":2,"op":"vm_create","ip":"10.0.0.2"}
//   {"seq":3,"op":"spawn","vm":1}
//   {"seq":4,"op":"create","actor":1,"name":"\\a","category":"I_Port","scope":"Local",
//    "expect":{"route":"VmPrivate"}}
//
// Handles are referred to by the seq of the create/open event that produced
// them ("handle" field of close events).

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ipcconfine/confinement_engine.hpp"
#include "ipcconfine/core_model.hpp"
#include "ipcconfine/sim_kernel.hpp"

namespace ipcconfine {

enum class TraceOp {
  LoadLongList,
  VmCreate,
  Spawn,
  Create,
  Open,
  Close,
  Send,
  RegisterWindow,
  FindWindow,
  RemoteThread,
  SetHook,
  Bind,
  Seal,
};

std::string_view to_string(TraceOp op);
std::optional<TraceOp> trace_op_from_string(std::string_view text);

struct Expectation {
  std::optional<Route> route;
  std::optional<std::string> effective_name;
  std::optional<Decision> decision;
  std::optional<std::string> error;  // ErrorCode or AccessStatus spelling
  std::optional<std::string> effective_ip;
  std::optional<std::uint32_t> scope_vm;

  friend bool operator==(const Expectation&, const Expectation&) = default;
};

struct TraceEvent {
  std::uint64_t seq = 0;
  TraceOp op = TraceOp::Seal;
  std::optional<std::uint32_t> actor;

  std::vector<std::string> names;          // load_long_list
  std::optional<std::string> ip;           // vm_create, bind
  std::optional<std::uint32_t> vm;         // spawn
  std::optional<std::string> name;         // create, open
  std::optional<IpcGroup> category;        // create, open
  std::optional<std::string> subtype;      // create/open label, or send message kind
  std::optional<Scope> scope;              // create
  std::optional<std::uint64_t> handle;     // close
  std::optional<std::uint32_t> target;     // send, remote_thread
  std::optional<std::string> payload;      // send
  std::optional<std::string> window_class; // register_window, find_window
  std::optional<HookRequest> hook;         // set_hook
  std::optional<int> port;                 // bind

  std::optional<Expectation> expect;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

/// Carries the line number (ParseError) or seq (ValidationError).
class TraceError : public Error {
 public:
  TraceError(ErrorCode code, std::uint64_t location, const std::string& detail)
      : Error(code, (code == ErrorCode::ParseError ? "line " : "seq ") + std::to_string(location) + ": " + detail),
        location_(location) {}
  std::uint64_t location() const noexcept { return location_; }

 private:
  std::uint64_t location_;
};

nlohmann::json to_json(const TraceEvent& event);
/// Throws TraceError(ValidationError) using the event's seq when known.
TraceEvent event_from_json(const nlohmann::json& j);

/// Parses and validates a JSONL document. Blank lines are skipped.
std::vector<TraceEvent> parse_trace(std::string_view text);
std::string serialize_trace(const std::vector<TraceEvent>& events);

/// Checks one event in isolation: required fields, reserved names, ranges.
void validate_event(const TraceEvent& event);
/// Per-event validation plus strictly increasing seq.
void validate_trace(const std::vector<TraceEvent>& events);

std::vector<TraceEvent> read_trace_file(const std::string& path);
void write_trace_file(const std::string& path, const std::vector<TraceEvent>& events);

}  // namespace ipcconfine
