#include "ipcconfine/generator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "ipcconfine/sim_kernel.hpp"

namespace ipcconfine {

namespace {

// Distribution helpers with fixed arithmetic so traces are identical across
// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return unit() < p; }
  template <typename T>
  const T& pick(const std::vector<T>& v) { return v[below(v.size())]; }

 private:
  std::mt19937_64 engine_;
};

struct PoolName {
  std::string name;
  IpcGroup group;
  std::string subtype;
};

constexpr std::array kPorts{80, 443, 8080, 21};
constexpr std::array kWindowClasses{"IISAdminWnd", "OleMainThreadWndClass", "Shell_TrayWnd", "DDEMLEvent",
                                    "ConsoleWindowClass"};

class Builder {
 public:
  Builder(std::uint64_t seed, const TraceParams& p) : rng_(seed), p_(p), kernel_(topology_, engine_) {}

  std::vector<TraceEvent> build() {
    make_pools();
    setup();
    const bool reserve = p_.post_seal_first_touch;
    if (reserve) reserved_ = host_.back().name;
    for (std::uint32_t i = 0; i < p_.event_count; ++i) {
      if (i == p_.seal_position) seal();
      body_event();
    }
    if (p_.seal_position == p_.event_count) seal();
    return std::move(events_);
  }

 private:
  void make_pools() {
    const auto pool = p_.name_pool_size;
    std::uint32_t n_host = p_.host_fraction > 0 ? std::max<std::uint32_t>(1, std::lround(pool * p_.host_fraction)) : 0;
    std::uint32_t n_global =
        p_.global_fraction > 0 ? std::max<std::uint32_t>(1, std::lround(pool * p_.global_fraction)) : 0;
    if (p_.post_seal_first_touch && n_host < 2) n_host = 2;
    if (n_host + n_global > pool) throw Error(ErrorCode::InvalidParams, "name pool too small for the fractions");
    std::uint32_t n_private = pool - n_host - n_global;

    for (std::uint32_t i = 0; i < n_host; ++i) {
      switch (i % 4) {
        case 0:
          if (i == 0) {
            host_.push_back({"\\Device\\NamedPipe\\net\\NtControlPipe" + std::to_string(7 + seed_digit()),
                             IpcGroup::II_PseudoFile, "NamedPipe"});
            long_entries_.push_back("\\Device\\NamedPipe\\net\\NtControlPipe*");
            continue;
          }
          host_.push_back({"\\RPC Control\\HostSvc" + std::to_string(i), IpcGroup::I_Port, "LPC"});
          break;
        case 1: host_.push_back({"\\Device\\NamedPipe\\hostpipe" + std::to_string(i), IpcGroup::II_PseudoFile, "NamedPipe"}); break;
        case 2: host_.push_back({"\\BaseNamedObjects\\HostEvent" + std::to_string(i), IpcGroup::IV_Sync, "Event"}); break;
        default: host_.push_back({"\\BaseNamedObjects\\HostSection" + std::to_string(i), IpcGroup::III_SharedMemory, "Section"}); break;
      }
      long_entries_.push_back(host_.back().name);
    }
    for (std::uint32_t i = 0; i < n_global; ++i)
      global_.push_back({"\\BaseNamedObjects\\Global\\Shared" + std::to_string(i), IpcGroup::III_SharedMemory, "Section"});
    for (std::uint32_t i = 0; i < n_private; ++i) {
      switch (i % 3) {
        case 0: private_.push_back({"\\RPC Control\\Port" + std::to_string(i), IpcGroup::I_Port, "ALPC"}); break;
        case 1: private_.push_back({"\\BaseNamedObjects\\Mutex" + std::to_string(i), IpcGroup::IV_Sync, "Mutex"}); break;
        default: private_.push_back({"\\Device\\NamedPipe\\pipe" + std::to_string(i), IpcGroup::II_PseudoFile, "NamedPipe"}); break;
      }
    }
    if (private_.empty() && global_.empty() && host_.empty()) throw Error(ErrorCode::InvalidParams, "empty name pool");
  }

  std::uint32_t seed_digit() { return static_cast<std::uint32_t>(rng_.below(3)); }

  TraceEvent& emit(TraceOp op) {
    auto& e = events_.emplace_back();
    e.seq = ++seq_;
    e.op = op;
    return e;
  }

  void setup() {
    auto& load = emit(TraceOp::LoadLongList);
    load.names = long_entries_;
    engine_.load_long_list(long_entries_);

    for (std::uint32_t v = 0; v < p_.vm_count; ++v) {
      auto& e = emit(TraceOp::VmCreate);
      e.ip = "10.0." + std::to_string((v + 2) / 250) + "." + std::to_string((v + 2) % 250);
      topology_.vm_create(*e.ip);
    }
    auto spawn = [&](std::uint32_t vm) {
      auto& e = emit(TraceOp::Spawn);
      e.vm = vm;
      return topology_.process_spawn(VmId{vm}).pid.value;
    };
    host_pid_ = spawn(0);
    for (std::uint32_t i = 0; i < p_.process_count; ++i) vm_pids_.push_back(spawn(1 + i % p_.vm_count));
    all_pids_ = vm_pids_;
    all_pids_.push_back(host_pid_);

    // Host services own their objects.
    for (const auto& h : host_) create(host_pid_, h, Scope::Local);
  }

  void seal() {
    emit(TraceOp::Seal);
    engine_.seal_host_objects();
    sealed_ = true;
    auto snap = engine_.snapshot();
    promoted_.insert(snap.short_list.begin(), snap.short_list.end());
    if (reserved_) {
      for (const auto& h : host_)
        if (h.name == *reserved_) open(rng_.pick(vm_pids_), h);
    }
  }

  const PoolName* pick_name() {
    std::vector<const PoolName*> hosts;
    for (const auto& h : host_) {
      if (reserved_ && h.name == *reserved_) continue;
      if (sealed_ && p_.constrained && !promoted_.contains(h.name)) continue;
      hosts.push_back(&h);
    }
    const double r = rng_.unit();
    if (r < p_.host_fraction && !hosts.empty()) return rng_.pick(hosts);
    if (r < p_.host_fraction + p_.global_fraction && !global_.empty()) return &rng_.pick(global_);
    if (!private_.empty()) return &rng_.pick(private_);
    if (!global_.empty()) return &rng_.pick(global_);
    if (!hosts.empty()) return rng_.pick(hosts);
    return nullptr;
  }

  void create(std::uint32_t pid, const PoolName& n, Scope scope) {
    auto& e = emit(TraceOp::Create);
    e.actor = pid;
    e.name = n.name;
    e.category = n.group;
    e.subtype = n.subtype;
    e.scope = scope;
    track(e.seq, pid, kernel_.create_object(Pid{pid}, ObjectName(n.name), {n.group, n.subtype}, scope));
  }

  void open(std::uint32_t pid, const PoolName& n) {
    auto& e = emit(TraceOp::Open);
    e.actor = pid;
    e.name = n.name;
    e.category = n.group;
    e.subtype = n.subtype;
    track(e.seq, pid, kernel_.open_object(Pid{pid}, ObjectName(n.name), {n.group, n.subtype}));
  }

  void track(std::uint64_t seq, std::uint32_t pid, const ObjectAccess& a) {
    if (a.ok()) live_.emplace(seq, std::pair{pid, *a.handle});
  }

  void body_event() {
    const auto roll = rng_.below(100);
    const std::uint32_t vm_actor = rng_.pick(vm_pids_);
    if (roll < 50) {
      const PoolName* n = pick_name();
      if (!n) return send_event(vm_actor);
      if (roll < 30) return open(vm_actor, *n);
      bool global = std::find_if(global_.begin(), global_.end(), [&](const auto& g) { return g.name == n->name; }) !=
                    global_.end();
      return create(vm_actor, *n, global && rng_.chance(0.5) ? Scope::Global : Scope::Local);
    }
    if (roll < 62) {
      if (live_.empty()) return send_event(vm_actor);
      auto it = live_.begin();
      std::advance(it, rng_.below(live_.size()));
      auto& e = emit(TraceOp::Close);
      e.actor = it->second.first;
      e.handle = it->first;
      kernel_.close(Pid{it->second.first}, it->second.second);
      live_.erase(it);
      return;
    }
    const std::uint32_t actor = rng_.chance(0.15) ? host_pid_ : vm_actor;
    if (roll < 72) return send_event(actor);
    if (roll < 77) {
      auto& e = emit(TraceOp::RegisterWindow);
      e.actor = actor;
      e.window_class = kWindowClasses[rng_.below(kWindowClasses.size())];
      return;
    }
    if (roll < 83) {
      auto& e = emit(TraceOp::FindWindow);
      e.actor = actor;
      e.window_class = kWindowClasses[rng_.below(kWindowClasses.size())];
      return;
    }
    if (roll < 89) {
      auto& e = emit(TraceOp::RemoteThread);
      e.actor = actor;
      e.target = rng_.pick(all_pids_);
      return;
    }
    if (roll < 93) {
      auto& e = emit(TraceOp::SetHook);
      e.actor = actor;
      e.hook = rng_.chance(0.5) ? HookRequest::SystemWide : HookRequest::OwnVm;
      return;
    }
    auto& e = emit(TraceOp::Bind);
    e.actor = actor;
    e.ip = rng_.chance(0.7) ? "0.0.0.0" : "127.0.0.1";
    e.port = kPorts[rng_.below(kPorts.size())];
  }

  void send_event(std::uint32_t actor) {
    static const std::vector<std::string> kinds{"WindowsMessage", "DataCopy", "Clipboard", "DDE"};
    auto& e = emit(TraceOp::Send);
    e.actor = actor;
    e.target = rng_.pick(all_pids_);
    e.subtype = rng_.pick(kinds);
    e.payload = "m" + std::to_string(e.seq);
  }

  Rng rng_;
  TraceParams p_;
  Topology topology_;
  ConfinementEngine engine_;
  SimKernel kernel_;

  std::vector<PoolName> host_, global_, private_;
  std::vector<std::string> long_entries_;
  std::vector<std::uint32_t> vm_pids_, all_pids_;
  std::uint32_t host_pid_ = 0;
  std::map<std::uint64_t, std::pair<std::uint32_t, HandleId>> live_;
  std::set<std::string> promoted_;
  std::optional<std::string> reserved_;
  bool sealed_ = false;
  std::uint64_t seq_ = 0;
  std::vector<TraceEvent> events_;
};

}  // namespace

std::vector<TraceEvent> generate_random_trace(std::uint64_t seed, const TraceParams& params) {
  if (params.vm_count == 0 || params.process_count == 0 || params.name_pool_size == 0 || params.event_count == 0)
    throw Error(ErrorCode::InvalidParams, "counts must be positive");
  if (params.host_fraction < 0 || params.host_fraction > 1 || params.global_fraction < 0 ||
      params.global_fraction > 1 || params.host_fraction + params.global_fraction > 1)
    throw Error(ErrorCode::InvalidParams, "fractions must lie in [0,1] and sum to at most 1");
  if (params.seal_position > params.event_count)
    throw Error(ErrorCode::InvalidParams, "seal_position exceeds event_count");
  if (params.post_seal_first_touch && params.host_fraction <= 0)
    throw Error(ErrorCode::InvalidParams, "post_seal_first_touch needs host objects");
  if (params.vm_count > 60000) throw Error(ErrorCode::InvalidParams, "too many VMs");
  return Builder(seed, params).build();
}

}  // namespace ipcconfine
