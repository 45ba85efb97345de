#pragma once

// Decision core of the confinement mechanism.
//
// Name-addressed IPC (groups I-IV) goes through the renaming decision:
//
//   host caller              -> original name, untouched
//   Global create            -> record in the VM's global-object table, renamed
//   in global-object table   -> renamed
//   in short host list       -> original name (move to front while unsealed)
//   sealed                   -> renamed, long list never consulted
//   in long host list        -> original name, promoted into the short list
//   otherwise                -> renamed
//
// Process-addressed IPC (groups V-VII) goes through the access decision,
// which compares the VM ids of the two parties.

#include <atomic>
#include <cstdint>
#include <list>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ipcconfine/core_model.hpp"

namespace ipcconfine {

enum class Route { HostPassthrough, VmGlobal, VmPrivate };
enum class Principle { HostObject, GlobalObject, Isolation };

std::string_view to_string(Route route);
std::string_view to_string(Principle principle);
std::optional<Route> route_from_string(std::string_view text);

struct ResolveOutcome {
  ObjectName effective_name;
  Route route;
  Principle principle;

  friend bool operator==(const ResolveOutcome&, const ResolveOutcome&) = default;
};

enum class Decision { Allow, Deny };
enum class VerdictReason { SameVm, CrossVm, ScopedToVm, NoTarget };

std::string_view to_string(Decision decision);
std::string_view to_string(VerdictReason reason);
std::optional<Decision> decision_from_string(std::string_view text);

struct Verdict {
  Decision decision;
  VerdictReason reason;

  bool allowed() const noexcept { return decision == Decision::Allow; }
  friend bool operator==(const Verdict&, const Verdict&) = default;
};

struct EngineCounters {
  std::uint64_t resolves_total = 0;
  std::uint64_t host_bypasses = 0;        // resolves by host callers
  std::uint64_t global_creates = 0;       // Global creates recorded in a VM table
  std::uint64_t global_table_hits = 0;
  std::uint64_t short_hits = 0;
  std::uint64_t long_hits = 0;
  std::uint64_t long_misses = 0;
  std::uint64_t renames = 0;
  std::uint64_t host_passthroughs = 0;    // VM resolves answered with the host name
  std::uint64_t post_seal_long_skips = 0;
  std::uint64_t denials = 0;
  std::uint64_t long_list_probes = 0;     // every read of the long list

  friend bool operator==(const EngineCounters&, const EngineCounters&) = default;
};

/// Set of original host-service object names. Entries ending in '*' match
/// the entry prefix followed by one or more decimal digits.
class LongHostList {
 public:
  /// Returns the number of distinct entries.
  std::size_t assign(const std::vector<ObjectName>& names);
  bool contains(const std::string& name) const;
  std::size_t size() const noexcept { return exact_.size() + patterns_.size(); }
  std::vector<std::string> entries() const;

 private:
  std::unordered_set<std::string> exact_;
  std::vector<std::string> patterns_;  // prefixes with the trailing '*' removed
};

bool matches_digit_pattern(std::string_view name, std::string_view prefix) noexcept;

/// Most-recent-first list of host objects with O(1) membership and promotion.
class ShortHostList {
 public:
  explicit ShortHostList(std::optional<std::size_t> capacity = std::nullopt) : capacity_(capacity) {}

  bool contains(const std::string& name) const { return index_.contains(name); }
  void touch(const std::string& name);   // insert at or move to front
  std::vector<std::string> ordered() const { return {order_.begin(), order_.end()}; }
  std::size_t size() const noexcept { return order_.size(); }

 private:
  std::optional<std::size_t> capacity_;
  std::list<std::string> order_;
  std::unordered_map<std::string, std::list<std::string>::iterator> index_;
};

struct EngineSnapshot {
  std::vector<std::string> long_list;   // sorted
  std::vector<std::string> short_list;  // most recent first
  bool sealed = false;
  std::map<std::uint32_t, std::vector<std::string>> global_tables;  // sorted names
  EngineCounters counters;

  friend bool operator==(const EngineSnapshot&, const EngineSnapshot&) = default;
};

struct EngineOptions {
  /// Unlimited when unset.
  std::optional<std::size_t> short_list_capacity;
};

/// Thread-safe; every public operation is linearizable under one mutex.
class ConfinementEngine {
 public:
  explicit ConfinementEngine(EngineOptions options = {});

  /// Throws AlreadyLoaded on the second call.
  std::size_t load_long_list(const std::vector<ObjectName>& names);
  std::size_t load_long_list(const std::vector<std::string>& names);

  /// Throws NotLoaded before load_long_list and BadCategory for groups V-VII.
  ResolveOutcome resolve(const ProcessRef& caller, const ObjectName& name, const IpcCategory& category,
                         Intent intent, Scope scope = Scope::Local);

  /// Sets the Host-Object Flag. Idempotent; throws NotLoaded.
  void seal_host_objects();

  /// Message-group decision; throws BadCategory outside group V.
  Verdict access_decide(const ProcessRef& sender, const ProcessRef& receiver, const IpcCategory& category);

  /// `target_vm` empty means a system-wide request.
  Verdict dangerous_decide(const ProcessRef& caller, std::optional<VmId> target_vm, DangerousKind kind);

  EngineSnapshot snapshot() const;
  EngineCounters counters() const;
  bool loaded() const;
  bool sealed() const;

 private:
  mutable std::mutex mu_;
  bool loaded_ = false;
  bool sealed_ = false;
  LongHostList long_list_;
  ShortHostList short_list_;
  std::unordered_map<std::uint32_t, std::unordered_set<std::string>> global_tables_;
  EngineCounters counters_;
};

/// Reference resolver used as an oracle: the same decision order with no
/// short list and no flag, scanning every long-list entry on each lookup.
class ReferenceEngine {
 public:
  std::size_t load_long_list(const std::vector<ObjectName>& names);
  ResolveOutcome resolve(const ProcessRef& caller, const ObjectName& name, const IpcCategory& category,
                         Intent intent, Scope scope = Scope::Local);
  /// Accepted for lockstep replay; has no effect on decisions.
  void seal_host_objects() {}

  std::uint64_t scans() const noexcept { return scans_; }

 private:
  bool in_long_list(const std::string& name);

  bool loaded_ = false;
  std::vector<std::string> entries_;
  std::map<std::uint32_t, std::vector<std::string>> global_tables_;
  std::uint64_t scans_ = 0;
};

}  // namespace ipcconfine
