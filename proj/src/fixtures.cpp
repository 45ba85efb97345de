#include "ipcconfine/fixtures.hpp"

namespace ipcconfine {

namespace {

struct Obj {
  const char* name;
  IpcGroup group;
  const char* subtype;
};

// Host-object rows of the RPCSS inventory. The named-pipe control row is a
// digit pattern; the instance below is what the host service creates.
constexpr const char* kNtControlPattern = "\\Device\\NamedPipe\\net\\NtControlPipe*";
const std::vector<Obj> kHostRows{
    {"\\RPC Control\\DNSResolver", IpcGroup::I_Port, "Port"},
    {"\\RPC Control\\ntsvcs", IpcGroup::I_Port, "Port"},
    {"\\Device\\NamedPipe\\net\\NtControlPipe1", IpcGroup::II_PseudoFile, "NamedPipe"},
    {"\\Device\\NamedPipe\\svcsctl", IpcGroup::II_PseudoFile, "NamedPipe"},
    {"\\Device\\NamedPipe\\ntsvcs", IpcGroup::II_PseudoFile, "NamedPipe"},
    {"\\Device\\NamedPipe\\EVENTLOG", IpcGroup::II_PseudoFile, "NamedPipe"},
    {"\\BaseNamedObjects\\DBWinMutex", IpcGroup::IV_Sync, "Mutex"},
    {"\\BaseNamedObjects\\RasPbFile", IpcGroup::IV_Sync, "Mutex"},
    {"\\BaseNamedObjects_R_00000000da_SMem_", IpcGroup::III_SharedMemory, "Section"},
    {"\\BaseNamedObjects\\DBWIN_BUFFER", IpcGroup::III_SharedMemory, "Section"},
    {"\\BaseNamedObjects\\ScmCreatedEvent", IpcGroup::IV_Sync, "Event"},
    {"\\SECURITY\\LSA_AUTHENTICATION_INITIALIZED", IpcGroup::IV_Sync, "Event"},
};

const std::vector<Obj> kIsolationRows{
    {"\\RPC Control\\epmapper", IpcGroup::I_Port, "Port"},
    {"\\RPC Control\\OLE30778CF8A8F24282B5F73ADC0B14", IpcGroup::I_Port, "Port"},
    {"\\Device\\NamedPipe\\epmapper", IpcGroup::II_PseudoFile, "NamedPipe"},
    {"\\Device\\NamedPipe\\Winsock2\\CatalogChangeListener-30c-0", IpcGroup::II_PseudoFile, "NamedPipe"},
};

const Obj kGlobalRow{"\\BaseNamedObjects\\Global\\RotHintTable", IpcGroup::III_SharedMemory, "Section"};

class TraceWriter {
 public:
  TraceEvent& add(TraceOp op) {
    auto& e = events.emplace_back();
    e.seq = ++seq;
    e.op = op;
    return e;
  }

  TraceEvent& object(TraceOp op, std::uint32_t actor, const Obj& o, Scope scope = Scope::Local) {
    auto& e = add(op);
    e.actor = actor;
    e.name = o.name;
    e.category = o.group;
    e.subtype = o.subtype;
    if (op == TraceOp::Create) e.scope = scope;
    return e;
  }

  static Expectation route(Route r, std::string effective) {
    Expectation x;
    x.route = r;
    x.effective_name = std::move(effective);
    return x;
  }

  static Expectation decision(Decision d) {
    Expectation x;
    x.decision = d;
    return x;
  }

  std::vector<TraceEvent> events;
  std::uint64_t seq = 0;
};

std::string renamed(std::uint32_t vm, const std::string& name) { return "\\vm" + std::to_string(vm) + name; }

}  // namespace

std::vector<TraceEvent> fixture_rpcss() {
  TraceWriter w;
  auto& load = w.add(TraceOp::LoadLongList);
  for (const auto& h : kHostRows)
    load.names.push_back(std::string(h.name).find("NtControlPipe") != std::string::npos ? kNtControlPattern : h.name);

  w.add(TraceOp::VmCreate).ip = "10.0.0.2";
  w.add(TraceOp::Spawn).vm = 0;  // pid 1: host service process
  w.add(TraceOp::Spawn).vm = 1;  // pid 2: virtualized RPCSS
  constexpr std::uint32_t kHost = 1, kRpcss = 2;

  for (const auto& h : kHostRows) w.object(TraceOp::Create, kHost, h).expect = w.route(Route::HostPassthrough, h.name);
  for (const auto& o : kIsolationRows)
    w.object(TraceOp::Create, kRpcss, o).expect = w.route(Route::VmPrivate, renamed(1, o.name));
  w.object(TraceOp::Create, kRpcss, kGlobalRow, Scope::Global).expect =
      w.route(Route::VmGlobal, renamed(1, kGlobalRow.name));
  for (const auto& h : kHostRows) w.object(TraceOp::Open, kRpcss, h).expect = w.route(Route::HostPassthrough, h.name);
  w.add(TraceOp::Seal);

  // After startup: the global section still resolves to the VM's copy.
  w.object(TraceOp::Open, kRpcss, kGlobalRow).expect = w.route(Route::VmGlobal, renamed(1, kGlobalRow.name));
  return std::move(w.events);
}

std::vector<TraceEvent> fixture_three_iis() {
  TraceWriter w;
  const std::vector<Obj> host_services{
      {"\\RPC Control\\ntsvcs", IpcGroup::I_Port, "Port"},
      {"\\Device\\NamedPipe\\svcsctl", IpcGroup::II_PseudoFile, "NamedPipe"},
      {"\\BaseNamedObjects\\ScmCreatedEvent", IpcGroup::IV_Sync, "Event"},
      {"\\Device\\NamedPipe\\net\\NtControlPipe3", IpcGroup::II_PseudoFile, "NamedPipe"},
  };
  auto& load = w.add(TraceOp::LoadLongList);
  load.names = {"\\RPC Control\\ntsvcs", "\\Device\\NamedPipe\\svcsctl", "\\BaseNamedObjects\\ScmCreatedEvent",
                kNtControlPattern};

  constexpr std::uint32_t kVms = 3;
  for (std::uint32_t v = 1; v <= kVms; ++v) w.add(TraceOp::VmCreate).ip = "10.0.0." + std::to_string(v + 1);
  w.add(TraceOp::Spawn).vm = 0;
  constexpr std::uint32_t kHost = 1;

  // Per VM: svchost (RPCSS), inetinfo, two DLLHOST surrogates.
  struct Stack {
    std::uint32_t svchost, inetinfo, dllhost1, dllhost2;
  };
  std::vector<Stack> stacks;
  std::uint32_t pid = kHost;
  for (std::uint32_t v = 1; v <= kVms; ++v) {
    for (int i = 0; i < 4; ++i) w.add(TraceOp::Spawn).vm = v;
    stacks.push_back({pid + 1, pid + 2, pid + 3, pid + 4});
    pid += 4;
  }

  for (const auto& h : host_services) w.object(TraceOp::Create, kHost, h);

  const Obj epmapper{"\\RPC Control\\epmapper", IpcGroup::I_Port, "Port"};
  const Obj rot{"\\BaseNamedObjects\\Global\\RotHintTable", IpcGroup::III_SharedMemory, "Section"};
  for (std::uint32_t v = 1; v <= kVms; ++v) {
    const auto& s = stacks[v - 1];
    const std::string ready_name = "\\BaseNamedObjects\\W3SVC_Ready_" + std::to_string(v);

    w.object(TraceOp::Create, s.svchost, epmapper).expect = w.route(Route::VmPrivate, renamed(v, epmapper.name));
    w.object(TraceOp::Create, s.svchost, rot, Scope::Global).expect = w.route(Route::VmGlobal, renamed(v, rot.name));
    for (const auto& h : host_services)
      w.object(TraceOp::Open, s.inetinfo, h).expect = w.route(Route::HostPassthrough, h.name);
    w.object(TraceOp::Open, s.inetinfo, epmapper).expect = w.route(Route::VmPrivate, renamed(v, epmapper.name));
    w.object(TraceOp::Open, s.dllhost1, rot).expect = w.route(Route::VmGlobal, renamed(v, rot.name));

    auto& ev = w.add(TraceOp::Create);
    ev.actor = s.inetinfo;
    ev.name = ready_name;
    ev.category = IpcGroup::IV_Sync;
    ev.subtype = "Event";
    ev.scope = Scope::Local;

    auto& bind = w.add(TraceOp::Bind);
    bind.actor = s.inetinfo;
    bind.ip = "0.0.0.0";
    bind.port = 80;
    bind.expect.emplace();
    bind.expect->effective_ip = "10.0.0." + std::to_string(v + 1);

    auto& wnd = w.add(TraceOp::RegisterWindow);
    wnd.actor = s.inetinfo;
    wnd.window_class = "IISAdminWnd";

    auto& local = w.add(TraceOp::Send);
    local.actor = s.dllhost1;
    local.target = s.inetinfo;
    local.subtype = "WindowsMessage";
    local.payload = "GET /default.asp";
    local.expect = w.decision(Decision::Allow);
  }
  w.add(TraceOp::Seal);

  // Cross-VM probes: every one must fail.
  for (std::uint32_t v = 1; v <= kVms; ++v) {
    const auto& s = stacks[v - 1];
    const auto other = v % kVms + 1;
    const auto& o = stacks[other - 1];

    auto& probe = w.add(TraceOp::Open);
    probe.actor = s.dllhost2;
    probe.name = "\\BaseNamedObjects\\W3SVC_Ready_" + std::to_string(other);
    probe.category = IpcGroup::IV_Sync;
    probe.subtype = "Event";
    probe.expect.emplace();
    probe.expect->route = Route::VmPrivate;
    probe.expect->error = "NotFound";

    auto& msg = w.add(TraceOp::Send);
    msg.actor = s.inetinfo;
    msg.target = o.inetinfo;
    msg.subtype = "DataCopy";
    msg.payload = "cross";
    msg.expect = w.decision(Decision::Deny);

    auto& thread = w.add(TraceOp::RemoteThread);
    thread.actor = s.dllhost1;
    thread.target = o.inetinfo;
    thread.expect = w.decision(Decision::Deny);

    auto& find = w.add(TraceOp::FindWindow);
    find.actor = s.dllhost2;
    find.window_class = "IISAdminWnd";
    find.expect = w.decision(Decision::Allow);  // only its own VM's window is visible

    auto& hook = w.add(TraceOp::SetHook);
    hook.actor = s.inetinfo;
    hook.hook = HookRequest::SystemWide;
    hook.expect.emplace();
    hook.expect->scope_vm = v;

    auto& host_msg = w.add(TraceOp::Send);
    host_msg.actor = s.svchost;
    host_msg.target = kHost;
    host_msg.subtype = "Clipboard";
    host_msg.payload = "x";
    host_msg.expect = w.decision(Decision::Deny);

    w.object(TraceOp::Open, s.dllhost2, host_services[0]).expect =
        w.route(Route::HostPassthrough, host_services[0].name);
  }

  // Host cannot see VM windows.
  auto& host_find = w.add(TraceOp::FindWindow);
  host_find.actor = kHost;
  host_find.window_class = "IISAdminWnd";
  host_find.expect = w.decision(Decision::Deny);
  return std::move(w.events);
}

std::vector<TraceEvent> scenario_events(const std::string& name, const ScenarioOptions& options) {
  if (name == "rpcss") return fixture_rpcss();
  if (name == "three-iis") return fixture_three_iis();
  if (name == "random") {
    TraceParams p;
    p.event_count = options.events;
    p.seal_position = options.events / 2;
    return generate_random_trace(options.seed, p);
  }
  throw Error(ErrorCode::UnknownScenario, "'" + name + "' (expected rpcss, three-iis or random)");
}

ScenarioRun run_scenario(const std::string& name, const ScenarioOptions& options) {
  ScenarioRun run{name, scenario_events(name, options), {}};
  run.report = replay(run.events, options.dual_oracle ? ReplayMode::DualWithOracle : ReplayMode::Single);
  return run;
}

}  // namespace ipcconfine
