#pragma once

// Identity and naming substrate: VMs, processes, object names, IPC
// categories and the per-VM rename function.

#include <compare>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ipcconfine/error.hpp"

namespace ipcconfine {

/// Execution context identity. Value 0 is the host; VMs are numbered from 1.
struct VmId {
  std::uint32_t value = 0;

  constexpr bool is_host() const noexcept { return value == 0; }
  friend constexpr auto operator<=>(VmId, VmId) = default;
};

inline constexpr VmId kHostVm{0};

struct Pid {
  std::uint32_t value = 0;
  friend constexpr auto operator<=>(Pid, Pid) = default;
};

struct ProcessRef {
  Pid pid;
  VmId vm;
  friend constexpr bool operator==(const ProcessRef&, const ProcessRef&) = default;
};

/// A backslash-separated object-manager path such as "\RPC Control\epmapper".
/// Always begins with the separator, has at least one component, no empty
/// components and no trailing separator.
class ObjectName {
 public:
  static constexpr char kSeparator = '\\';

  /// Throws Error(InvalidName) when `path` is malformed.
  explicit ObjectName(std::string path);

  static bool is_valid(std::string_view path) noexcept;

  const std::string& str() const noexcept { return path_; }
  std::vector<std::string_view> components() const;
  std::string_view first_component() const;

  friend bool operator==(const ObjectName&, const ObjectName&) = default;
  friend auto operator<=>(const ObjectName& a, const ObjectName& b) { return a.path_ <=> b.path_; }

 private:
  std::string path_;
};

enum class IpcGroup {
  I_Port,
  II_PseudoFile,
  III_SharedMemory,
  IV_Sync,
  V_Message,
  VI_Socket,
  VII_Dangerous,
};

std::string_view to_string(IpcGroup group);
std::optional<IpcGroup> ipc_group_from_string(std::string_view text);

/// Groups I-IV are addressed by name and resolved by renaming.
constexpr bool is_name_addressed(IpcGroup g) noexcept {
  return g == IpcGroup::I_Port || g == IpcGroup::II_PseudoFile ||
         g == IpcGroup::III_SharedMemory || g == IpcGroup::IV_Sync;
}

struct IpcCategory {
  IpcGroup group = IpcGroup::I_Port;
  std::string subtype;

  friend bool operator==(const IpcCategory&, const IpcCategory&) = default;
};

enum class Scope { Local, Global };
enum class Intent { Create, Open };

std::string_view to_string(Scope scope);
std::optional<Scope> scope_from_string(std::string_view text);

enum class MessageKind { WindowsMessage, DataCopy, Clipboard, DDE };
enum class DangerousKind { FindWindow, CreateRemoteThread, SetWindowHook, EnumerateWindows };

std::string_view to_string(MessageKind kind);
std::optional<MessageKind> message_kind_from_string(std::string_view text);
std::string_view to_string(DangerousKind kind);

/// "vm" followed by the decimal id, e.g. "vm1".
std::string vm_tag(VmId vm);

/// True for a path component of the reserved form "vm<digits>".
bool is_reserved_component(std::string_view component) noexcept;

/// Per-VM image of a name: "\vmN" prepended to the original path.
/// Throws Error(HostRenameForbidden) for the host context.
ObjectName rename(const ObjectName& name, VmId vm);

/// Global when declared so, or when any path component is exactly "Global".
bool is_global_name(const ObjectName& name, Scope declared_scope) noexcept;

/// Registry of VMs and processes. Allocation is serialized by an internal
/// mutex, so concurrent callers observe a linearizable order.
class Topology {
 public:
  Topology();

  /// Throws DuplicateAlias when the address belongs to another VM and
  /// InvalidAddress when it is not a dotted IPv4 address.
  VmId vm_create(const std::string& alias_ip);

  /// Throws UnknownVm.
  ProcessRef process_spawn(VmId vm);

  /// Throws UnknownProcess.
  ProcessRef process(Pid pid) const;
  VmId vm_of(Pid pid) const { return process(pid).vm; }

  bool vm_exists(VmId vm) const;
  /// Alias address for a VM; throws UnknownVm (host has no alias).
  std::string alias_of(VmId vm) const;

  std::vector<VmId> vms() const;
  std::vector<ProcessRef> processes() const;

 private:
  mutable std::mutex mu_;
  std::uint32_t next_vm_ = 1;
  std::uint32_t next_pid_ = 1;
  std::unordered_map<std::uint32_t, std::string> aliases_;
  std::unordered_set<std::string> used_aliases_;
  std::unordered_map<std::uint32_t, ProcessRef> processes_;
};

}  // namespace ipcconfine

template <>
struct std::hash<ipcconfine::VmId> {
  std::size_t operator()(ipcconfine::VmId v) const noexcept { return std::hash<std::uint32_t>{}(v.value); }
};

template <>
struct std::hash<ipcconfine::ObjectName> {
  std::size_t operator()(const ipcconfine::ObjectName& n) const noexcept {
    return std::hash<std::string>{}(n.str());
  }
};
