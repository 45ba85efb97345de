#include "ipcconfine/sim_kernel.hpp"

#include <arpa/inet.h>

#include <algorithm>

namespace ipcconfine {

namespace {

bool same_category(const IpcCategory& a, const IpcCategory& b) {
  if (a.group != b.group) return false;
  return a.subtype.empty() || b.subtype.empty() || a.subtype == b.subtype;
}

}  // namespace

std::string_view to_string(AccessStatus status) {
  switch (status) {
    case AccessStatus::Ok: return "Ok";
    case AccessStatus::AlreadyExists: return "AlreadyExists";
    case AccessStatus::NotFound: return "NotFound";
    case AccessStatus::CategoryMismatch: return "CategoryMismatch";
  }
  return "?";
}

SimKernel::SimKernel(Topology& topology, ConfinementEngine& engine) : topology_(topology), engine_(engine) {}

// ---------------------------------------------------------------------------
// Named objects

ObjectAccess SimKernel::create_object(Pid caller, const ObjectName& name, const IpcCategory& category,
                                      Scope scope) {
  auto proc = topology_.process(caller);
  ObjectAccess out{engine_.resolve(proc, name, category, Intent::Create, scope), AccessStatus::Ok, std::nullopt, 0};

  std::lock_guard lock(mu_);
  const auto& key = out.resolution.effective_name.str();
  if (auto it = registry_.find(key); it != registry_.end()) {
    out.status = same_category(it->second.category, category) ? AccessStatus::AlreadyExists
                                                               : AccessStatus::CategoryMismatch;
    return out;
  }
  ObjectRecord rec{next_object_++, out.resolution.effective_name, category, proc, 1};
  HandleId h{next_handle_++};
  handles_.emplace(h.value, HandleEntry{proc, key});
  out.handle = h;
  out.object_id = rec.object_id;
  registry_.emplace(key, std::move(rec));
  return out;
}

ObjectAccess SimKernel::open_object(Pid caller, const ObjectName& name, const IpcCategory& category) {
  auto proc = topology_.process(caller);
  ObjectAccess out{engine_.resolve(proc, name, category, Intent::Open), AccessStatus::Ok, std::nullopt, 0};

  std::lock_guard lock(mu_);
  const auto& key = out.resolution.effective_name.str();
  auto it = registry_.find(key);
  if (it == registry_.end()) {
    out.status = AccessStatus::NotFound;
    return out;
  }
  if (!same_category(it->second.category, category)) {
    out.status = AccessStatus::CategoryMismatch;
    return out;
  }
  auto& rec = it->second;
  ++rec.refcount;
  HandleId h{next_handle_++};
  handles_.emplace(h.value, HandleEntry{proc, key});
  out.handle = h;
  out.object_id = rec.object_id;
  if (rec.creator.vm != proc.vm && !rec.creator.vm.is_host()) ++cross_vm_opens_;
  return out;
}

void SimKernel::close(Pid caller, HandleId handle) {
  std::lock_guard lock(mu_);
  auto it = handles_.find(handle.value);
  if (it == handles_.end() || it->second.owner.pid != caller)
    throw Error(ErrorCode::InvalidHandle, "handle " + std::to_string(handle.value));
  auto rec = registry_.find(it->second.effective_name);
  if (rec != registry_.end() && --rec->second.refcount == 0) registry_.erase(rec);
  handles_.erase(it);
}

std::optional<ObjectRecord> SimKernel::lookup(const ObjectName& effective_name) const {
  std::lock_guard lock(mu_);
  auto it = registry_.find(effective_name.str());
  if (it == registry_.end()) return std::nullopt;
  return it->second;
}

std::vector<ObjectRecord> SimKernel::objects() const {
  std::lock_guard lock(mu_);
  std::vector<ObjectRecord> out;
  out.reserve(registry_.size());
  for (const auto& [k, rec] : registry_) out.push_back(rec);
  return out;
}

std::size_t SimKernel::live_handles() const {
  std::lock_guard lock(mu_);
  return handles_.size();
}

std::uint64_t SimKernel::cross_vm_opens() const {
  std::lock_guard lock(mu_);
  return cross_vm_opens_;
}

// ---------------------------------------------------------------------------
// Messages

Delivery SimKernel::send_message(Pid sender, Pid target, MessageKind kind, std::string payload) {
  auto from = topology_.process(sender);
  auto to = topology_.process(target);
  auto verdict = engine_.access_decide(from, to, IpcCategory{IpcGroup::V_Message, std::string(to_string(kind))});
  if (!verdict.allowed()) return Delivery::Blocked;
  std::lock_guard lock(mu_);
  inboxes_[target.value].push_back(Message{sender, kind, std::move(payload)});
  return Delivery::Delivered;
}

Delivery SimKernel::send_to_window(Pid sender, std::uint64_t window_id, MessageKind kind, std::string payload) {
  std::optional<Pid> owner;
  {
    std::lock_guard lock(mu_);
    for (const auto& w : windows_)
      if (w.window_id == window_id) owner = w.owner.pid;
  }
  if (!owner) throw Error(ErrorCode::NotFound, "window " + std::to_string(window_id));
  return send_message(sender, *owner, kind, std::move(payload));
}

std::optional<Message> SimKernel::receive(Pid receiver) {
  std::lock_guard lock(mu_);
  auto it = inboxes_.find(receiver.value);
  if (it == inboxes_.end() || it->second.empty()) return std::nullopt;
  auto msg = std::move(it->second.front());
  it->second.pop_front();
  return msg;
}

std::size_t SimKernel::inbox_size(Pid receiver) const {
  std::lock_guard lock(mu_);
  auto it = inboxes_.find(receiver.value);
  return it == inboxes_.end() ? 0 : it->second.size();
}

void SimKernel::clipboard_write(Pid writer, std::string data) {
  auto proc = topology_.process(writer);
  std::lock_guard lock(mu_);
  clipboards_[proc.vm.value] = std::move(data);
}

std::optional<std::string> SimKernel::clipboard_read(Pid reader) const {
  auto proc = topology_.process(reader);
  std::lock_guard lock(mu_);
  auto it = clipboards_.find(proc.vm.value);
  if (it == clipboards_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// Windows and dangerous calls

WindowRecord SimKernel::register_window(Pid owner, std::string class_name) {
  auto proc = topology_.process(owner);
  std::lock_guard lock(mu_);
  windows_.push_back(WindowRecord{next_window_++, std::move(class_name), proc});
  return windows_.back();
}

std::optional<WindowRecord> SimKernel::find_window(Pid caller, const std::string& class_name) {
  auto proc = topology_.process(caller);
  // The search is system-wide by request; the engine narrows it to the caller's VM.
  engine_.dangerous_decide(proc, std::nullopt, DangerousKind::FindWindow);
  std::lock_guard lock(mu_);
  for (const auto& w : windows_)
    if (w.owner.vm == proc.vm && w.class_name == class_name) return w;
  return std::nullopt;
}

std::vector<WindowRecord> SimKernel::enumerate_windows(Pid caller) {
  auto proc = topology_.process(caller);
  engine_.dangerous_decide(proc, std::nullopt, DangerousKind::EnumerateWindows);
  std::lock_guard lock(mu_);
  std::vector<WindowRecord> out;
  for (const auto& w : windows_)
    if (w.owner.vm == proc.vm) out.push_back(w);
  return out;
}

Verdict SimKernel::create_remote_thread(Pid caller, Pid target) {
  auto from = topology_.process(caller);
  auto to = topology_.process(target);
  return engine_.dangerous_decide(from, to.vm, DangerousKind::CreateRemoteThread);
}

HookScope SimKernel::set_hook(Pid caller, HookRequest requested) {
  auto proc = topology_.process(caller);
  auto target = requested == HookRequest::SystemWide ? std::nullopt : std::optional<VmId>(proc.vm);
  engine_.dangerous_decide(proc, target, DangerousKind::SetWindowHook);
  return HookScope{proc.vm};
}

// ---------------------------------------------------------------------------
// Sockets

SocketBinding SimKernel::bind_socket(Pid caller, const std::string& requested_ip, int port) {
  if (port < 1 || port > 65535) throw Error(ErrorCode::InvalidPort, std::to_string(port));
  in_addr addr{};
  if (inet_pton(AF_INET, requested_ip.c_str(), &addr) != 1)
    throw Error(ErrorCode::InvalidAddress, "'" + requested_ip + "' is not an IPv4 address");
  auto proc = topology_.process(caller);
  auto effective = proc.vm.is_host() ? requested_ip : topology_.alias_of(proc.vm);

  std::lock_guard lock(mu_);
  for (const auto& [id, b] : sockets_)
    if (b.effective_ip == effective && b.port == port)
      throw Error(ErrorCode::AddressInUse, effective + ":" + std::to_string(port));
  SocketBinding b{next_binding_++, proc, requested_ip, effective, static_cast<std::uint16_t>(port)};
  sockets_.emplace(b.binding_id, b);
  return b;
}

void SimKernel::unbind_socket(std::uint64_t binding_id) {
  std::lock_guard lock(mu_);
  if (sockets_.erase(binding_id) == 0)
    throw Error(ErrorCode::InvalidHandle, "binding " + std::to_string(binding_id));
}

std::vector<SocketBinding> SimKernel::bindings() const {
  std::lock_guard lock(mu_);
  std::vector<SocketBinding> out;
  for (const auto& [id, b] : sockets_) out.push_back(b);
  return out;
}

}  // namespace ipcconfine
