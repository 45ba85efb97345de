#include "ipcconfine/core_model.hpp"

#include <arpa/inet.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <utility>

namespace ipcconfine {

namespace {

constexpr std::array kErrorNames{
    std::pair{ErrorCode::InvalidName, "InvalidName"},
    std::pair{ErrorCode::InvalidAddress, "InvalidAddress"},
    std::pair{ErrorCode::DuplicateAlias, "DuplicateAlias"},
    std::pair{ErrorCode::UnknownVm, "UnknownVm"},
    std::pair{ErrorCode::UnknownProcess, "UnknownProcess"},
    std::pair{ErrorCode::HostRenameForbidden, "HostRenameForbidden"},
    std::pair{ErrorCode::AlreadyLoaded, "AlreadyLoaded"},
    std::pair{ErrorCode::NotLoaded, "NotLoaded"},
    std::pair{ErrorCode::BadCategory, "BadCategory"},
    std::pair{ErrorCode::AlreadyExists, "AlreadyExists"},
    std::pair{ErrorCode::NotFound, "NotFound"},
    std::pair{ErrorCode::CategoryMismatch, "CategoryMismatch"},
    std::pair{ErrorCode::InvalidHandle, "InvalidHandle"},
    std::pair{ErrorCode::AddressInUse, "AddressInUse"},
    std::pair{ErrorCode::InvalidPort, "InvalidPort"},
    std::pair{ErrorCode::ParseError, "ParseError"},
    std::pair{ErrorCode::ValidationError, "ValidationError"},
    std::pair{ErrorCode::ReplayError, "ReplayError"},
    std::pair{ErrorCode::InvalidParams, "InvalidParams"},
    std::pair{ErrorCode::InvalidConfig, "InvalidConfig"},
    std::pair{ErrorCode::UnknownScenario, "UnknownScenario"},
};

constexpr std::array kGroupNames{
    std::pair{IpcGroup::I_Port, "I_Port"},
    std::pair{IpcGroup::II_PseudoFile, "II_PseudoFile"},
    std::pair{IpcGroup::III_SharedMemory, "III_SharedMemory"},
    std::pair{IpcGroup::IV_Sync, "IV_Sync"},
    std::pair{IpcGroup::V_Message, "V_Message"},
    std::pair{IpcGroup::VI_Socket, "VI_Socket"},
    std::pair{IpcGroup::VII_Dangerous, "VII_Dangerous"},
};

constexpr std::array kMessageNames{
    std::pair{MessageKind::WindowsMessage, "WindowsMessage"},
    std::pair{MessageKind::DataCopy, "DataCopy"},
    std::pair{MessageKind::Clipboard, "Clipboard"},
    std::pair{MessageKind::DDE, "DDE"},
};

template <typename Table, typename Key>
std::string_view lookup_name(const Table& table, Key key) {
  for (const auto& [k, name] : table)
    if (k == key) return name;
  return "?";
}

template <typename Table>
auto lookup_key(const Table& table, std::string_view text)
    -> std::optional<typename Table::value_type::first_type> {
  for (const auto& [k, name] : table)
    if (text == name) return k;
  return std::nullopt;
}

bool is_ipv4(const std::string& text) {
  in_addr addr{};
  return inet_pton(AF_INET, text.c_str(), &addr) == 1;
}

}  // namespace

std::string_view to_string(ErrorCode code) { return lookup_name(kErrorNames, code); }

ErrorCode error_code_from_string(std::string_view text) {
  if (auto code = lookup_key(kErrorNames, text)) return *code;
  throw std::invalid_argument("unknown error code: " + std::string(text));
}

std::string_view to_string(IpcGroup group) { return lookup_name(kGroupNames, group); }
std::optional<IpcGroup> ipc_group_from_string(std::string_view text) { return lookup_key(kGroupNames, text); }

std::string_view to_string(Scope scope) { return scope == Scope::Global ? "Global" : "Local"; }

std::optional<Scope> scope_from_string(std::string_view text) {
  if (text == "Global") return Scope::Global;
  if (text == "Local") return Scope::Local;
  return std::nullopt;
}

std::string_view to_string(MessageKind kind) { return lookup_name(kMessageNames, kind); }
std::optional<MessageKind> message_kind_from_string(std::string_view text) {
  return lookup_key(kMessageNames, text);
}

std::string_view to_string(DangerousKind kind) {
  switch (kind) {
    case DangerousKind::FindWindow: return "FindWindow";
    case DangerousKind::CreateRemoteThread: return "CreateRemoteThread";
    case DangerousKind::SetWindowHook: return "SetWindowHook";
    case DangerousKind::EnumerateWindows: return "EnumerateWindows";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// ObjectName

ObjectName::ObjectName(std::string path) : path_(std::move(path)) {
  if (!is_valid(path_)) throw Error(ErrorCode::InvalidName, "malformed object name '" + path_ + "'");
}

bool ObjectName::is_valid(std::string_view path) noexcept {
  if (path.size() < 2 || path.front() != kSeparator || path.back() == kSeparator) return false;
  for (std::size_t i = 1; i < path.size(); ++i)
    if (path[i] == kSeparator && path[i - 1] == kSeparator) return false;
  return true;
}

std::vector<std::string_view> ObjectName::components() const {
  std::vector<std::string_view> out;
  std::string_view rest(path_);
  rest.remove_prefix(1);
  while (!rest.empty()) {
    auto pos = rest.find(kSeparator);
    out.push_back(rest.substr(0, pos));
    if (pos == std::string_view::npos) break;
    rest.remove_prefix(pos + 1);
  }
  return out;
}

std::string_view ObjectName::first_component() const {
  std::string_view rest(path_);
  rest.remove_prefix(1);
  return rest.substr(0, rest.find(kSeparator));
}

// ---------------------------------------------------------------------------
// Naming

std::string vm_tag(VmId vm) { return "vm" + std::to_string(vm.value); }

bool is_reserved_component(std::string_view component) noexcept {
  if (component.size() < 3 || component.substr(0, 2) != "vm") return false;
  return std::all_of(component.begin() + 2, component.end(),
                     [](unsigned char c) { return std::isdigit(c) != 0; });
}

ObjectName rename(const ObjectName& name, VmId vm) {
  if (vm.is_host()) throw Error(ErrorCode::HostRenameForbidden, "host names are never renamed");
  std::string out;
  out.reserve(name.str().size() + 12);
  out += ObjectName::kSeparator;
  out += vm_tag(vm);
  out += name.str();
  return ObjectName(std::move(out));
}

bool is_global_name(const ObjectName& name, Scope declared_scope) noexcept {
  if (declared_scope == Scope::Global) return true;
  for (auto c : name.components())
    if (c == "Global") return true;
  return false;
}

// ---------------------------------------------------------------------------
// Topology

Topology::Topology() { used_aliases_.reserve(8); }

VmId Topology::vm_create(const std::string& alias_ip) {
  if (!is_ipv4(alias_ip)) throw Error(ErrorCode::InvalidAddress, "'" + alias_ip + "' is not an IPv4 address");
  std::lock_guard lock(mu_);
  if (used_aliases_.contains(alias_ip)) throw Error(ErrorCode::DuplicateAlias, alias_ip);
  VmId id{next_vm_++};
  aliases_.emplace(id.value, alias_ip);
  used_aliases_.insert(alias_ip);
  return id;
}

ProcessRef Topology::process_spawn(VmId vm) {
  std::lock_guard lock(mu_);
  if (!vm.is_host() && !aliases_.contains(vm.value))
    throw Error(ErrorCode::UnknownVm, "vm " + std::to_string(vm.value));
  ProcessRef p{Pid{next_pid_++}, vm};
  processes_.emplace(p.pid.value, p);
  return p;
}

ProcessRef Topology::process(Pid pid) const {
  std::lock_guard lock(mu_);
  auto it = processes_.find(pid.value);
  if (it == processes_.end()) throw Error(ErrorCode::UnknownProcess, "pid " + std::to_string(pid.value));
  return it->second;
}

bool Topology::vm_exists(VmId vm) const {
  if (vm.is_host()) return true;
  std::lock_guard lock(mu_);
  return aliases_.contains(vm.value);
}

std::string Topology::alias_of(VmId vm) const {
  std::lock_guard lock(mu_);
  auto it = aliases_.find(vm.value);
  if (it == aliases_.end()) throw Error(ErrorCode::UnknownVm, "vm " + std::to_string(vm.value));
  return it->second;
}

std::vector<VmId> Topology::vms() const {
  std::lock_guard lock(mu_);
  std::vector<VmId> out;
  for (const auto& [id, alias] : aliases_) out.push_back(VmId{id});
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ProcessRef> Topology::processes() const {
  std::lock_guard lock(mu_);
  std::vector<ProcessRef> out;
  for (const auto& [pid, p] : processes_) out.push_back(p);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.pid < b.pid; });
  return out;
}

}  // namespace ipcconfine
