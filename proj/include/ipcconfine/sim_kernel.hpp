#pragma once

// Simulated OS surface. Every IPC action is routed through the confinement
// engine: a named-object registry for groups I-IV, process inboxes and a
// window registry for group V and the window half of group VII, an
// alias-aware socket table for group VI, and gates for the dangerous calls.

#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ipcconfine/confinement_engine.hpp"
#include "ipcconfine/core_model.hpp"

namespace ipcconfine {

struct HandleId {
  std::uint64_t value = 0;
  friend constexpr auto operator<=>(HandleId, HandleId) = default;
};

struct ObjectRecord {
  std::uint64_t object_id = 0;
  ObjectName effective_name;
  IpcCategory category;
  ProcessRef creator;
  std::uint32_t refcount = 0;
};

enum class AccessStatus { Ok, AlreadyExists, NotFound, CategoryMismatch };
std::string_view to_string(AccessStatus status);

/// Result of create_object/open_object. The resolution is reported even
/// when the registry refuses the request.
struct ObjectAccess {
  ResolveOutcome resolution;
  AccessStatus status = AccessStatus::Ok;
  std::optional<HandleId> handle;
  std::uint64_t object_id = 0;

  bool ok() const noexcept { return status == AccessStatus::Ok; }
};

struct WindowRecord {
  std::uint64_t window_id = 0;
  std::string class_name;
  ProcessRef owner;
};

struct SocketBinding {
  std::uint64_t binding_id = 0;
  ProcessRef owner;
  std::string requested_ip;
  std::string effective_ip;
  std::uint16_t port = 0;
};

struct Message {
  Pid sender;
  MessageKind kind;
  std::string payload;
};

enum class Delivery { Delivered, Blocked };
enum class HookRequest { SystemWide, OwnVm };

/// Effective reach of a window hook: always exactly one context.
struct HookScope {
  VmId vm;
  friend bool operator==(const HookScope&, const HookScope&) = default;
};

class SimKernel {
 public:
  SimKernel(Topology& topology, ConfinementEngine& engine);

  // Groups I-IV. Unknown callers throw UnknownProcess; engine errors propagate.
  ObjectAccess create_object(Pid caller, const ObjectName& name, const IpcCategory& category,
                             Scope scope = Scope::Local);
  ObjectAccess open_object(Pid caller, const ObjectName& name, const IpcCategory& category);
  /// Throws InvalidHandle for unknown, foreign or already closed handles.
  void close(Pid caller, HandleId handle);

  std::optional<ObjectRecord> lookup(const ObjectName& effective_name) const;
  std::vector<ObjectRecord> objects() const;
  std::size_t live_handles() const;
  /// Successful opens of an object created in a different VM, excluding
  /// host-created objects reached through the host-object route.
  std::uint64_t cross_vm_opens() const;

  // Group V.
  Delivery send_message(Pid sender, Pid target, MessageKind kind, std::string payload);
  /// Sends to the owner of a registered window.
  Delivery send_to_window(Pid sender, std::uint64_t window_id, MessageKind kind, std::string payload);
  std::optional<Message> receive(Pid receiver);
  std::size_t inbox_size(Pid receiver) const;

  /// Per-VM clipboard; readers only ever see their own VM's contents.
  void clipboard_write(Pid writer, std::string data);
  std::optional<std::string> clipboard_read(Pid reader) const;

  // Window half of group VII.
  WindowRecord register_window(Pid owner, std::string class_name);
  std::optional<WindowRecord> find_window(Pid caller, const std::string& class_name);
  std::vector<WindowRecord> enumerate_windows(Pid caller);

  // Remaining dangerous calls.
  Verdict create_remote_thread(Pid caller, Pid target);
  HookScope set_hook(Pid caller, HookRequest requested);

  // Group VI. Throws InvalidPort and AddressInUse.
  SocketBinding bind_socket(Pid caller, const std::string& requested_ip, int port);
  void unbind_socket(std::uint64_t binding_id);
  std::vector<SocketBinding> bindings() const;

  ConfinementEngine& engine() noexcept { return engine_; }
  Topology& topology() noexcept { return topology_; }

 private:
  struct HandleEntry {
    ProcessRef owner;
    std::string effective_name;
  };

  Topology& topology_;
  ConfinementEngine& engine_;

  mutable std::mutex mu_;
  std::uint64_t next_object_ = 1;
  std::uint64_t next_handle_ = 1;
  std::uint64_t next_window_ = 1;
  std::uint64_t next_binding_ = 1;
  std::uint64_t cross_vm_opens_ = 0;
  std::map<std::string, ObjectRecord> registry_;
  std::map<std::uint64_t, HandleEntry> handles_;
  std::unordered_map<std::uint32_t, std::deque<Message>> inboxes_;
  std::unordered_map<std::uint32_t, std::string> clipboards_;
  std::vector<WindowRecord> windows_;
  std::map<std::uint64_t, SocketBinding> sockets_;
};

}  // namespace ipcconfine
