#include "ipcconfine/replay.hpp"

#include <omp.h>

#include <map>
#include <mutex>
#include <numeric>

#include "ipcconfine/invariants.hpp"

namespace ipcconfine {

using nlohmann::json;

namespace {

bool is_outcome_error(ErrorCode code) { return code == ErrorCode::AddressInUse; }

IpcCategory category_of(const TraceEvent& e) { return IpcCategory{*e.category, e.subtype.value_or("")}; }

template <typename T>
std::string show(const std::optional<T>& v) {
  if (!v) return "<none>";
  if constexpr (std::is_same_v<T, std::string>)
    return *v;
  else if constexpr (std::is_arithmetic_v<T>)
    return std::to_string(*v);
  else
    return std::string(to_string(*v));
}

class Replayer {
 public:
  explicit Replayer(ReplayMode mode) : kernel_(topology_, engine_) {
    report_.mode = mode;
    if (mode == ReplayMode::DualWithOracle) reference_.emplace();
  }

  void run(const TraceEvent& e) {
    EventOutcome o;
    o.seq = e.seq;
    o.op = e.op;
    try {
      execute(e, o);
    } catch (const ReplayError&) {
      throw;
    } catch (const Error& ex) {
      auto code = std::string(to_string(ex.code()));
      bool expected = e.expect && e.expect->error == code;
      if (!expected && !is_outcome_error(ex.code())) throw ReplayError(e.seq, ex.what());
      o.error = code;
    }
    ++report_.events_run;
    if (e.expect) check(*e.expect, o);
    report_.outcomes.push_back(std::move(o));
  }

  ReplayReport finish() {
    report_.final_state = engine_.snapshot();
    for (const auto& b : kernel_.bindings())
      report_.bindings.push_back(BindingRow{b.owner.pid.value, b.owner.vm.value, b.requested_ip, b.effective_ip, b.port});
    report_.live_objects = kernel_.objects().size();
    report_.cross_vm_opens = kernel_.cross_vm_opens();
    return std::move(report_);
  }

 private:
  ProcessRef actor(const TraceEvent& e) { return topology_.process(Pid{*e.actor}); }

  void execute(const TraceEvent& e, EventOutcome& o) {
    if (e.actor) o.vm = actor(e).vm.value;
    switch (e.op) {
      case TraceOp::LoadLongList: {
        std::vector<ObjectName> names;
        for (const auto& n : e.names) names.emplace_back(n);
        engine_.load_long_list(names);
        if (reference_) reference_->load_long_list(names);
        break;
      }
      case TraceOp::VmCreate:
        o.vm = topology_.vm_create(*e.ip).value;
        break;
      case TraceOp::Spawn:
        o.vm = topology_.process_spawn(VmId{*e.vm}).vm.value;
        break;
      case TraceOp::Create:
      case TraceOp::Open: {
        ObjectName name(*e.name);
        auto cat = category_of(e);
        auto access = e.op == TraceOp::Create
                          ? kernel_.create_object(Pid{*e.actor}, name, cat, e.scope.value_or(Scope::Local))
                          : kernel_.open_object(Pid{*e.actor}, name, cat);
        o.name = *e.name;
        o.route = access.resolution.route;
        o.effective_name = access.resolution.effective_name.str();
        if (access.ok()) {
          handles_[e.seq] = *access.handle;
          o.object_id = access.object_id;
          if (auto rec = kernel_.lookup(access.resolution.effective_name)) o.object_creator_vm = rec->creator.vm.value;
        } else {
          o.error = std::string(to_string(access.status));
        }
        if (reference_) {
          auto intent = e.op == TraceOp::Create ? Intent::Create : Intent::Open;
          auto ref = reference_->resolve(actor(e), name, cat, intent, e.scope.value_or(Scope::Local));
          if (!(ref == access.resolution))
            report_.divergences.push_back(Divergence{e.seq, *o.vm, *e.name, access.resolution, ref});
        }
        break;
      }
      case TraceOp::Close: {
        auto it = handles_.find(*e.handle);
        if (it == handles_.end())
          throw Error(ErrorCode::InvalidHandle, "no handle produced by seq " + std::to_string(*e.handle));
        kernel_.close(Pid{*e.actor}, it->second);
        break;
      }
      case TraceOp::Send: {
        auto kind = *message_kind_from_string(*e.subtype);
        auto d = kernel_.send_message(Pid{*e.actor}, Pid{*e.target}, kind, e.payload.value_or(""));
        o.decision = d == Delivery::Delivered ? Decision::Allow : Decision::Deny;
        break;
      }
      case TraceOp::RegisterWindow:
        kernel_.register_window(Pid{*e.actor}, *e.window_class);
        break;
      case TraceOp::FindWindow:
        o.decision = kernel_.find_window(Pid{*e.actor}, *e.window_class) ? Decision::Allow : Decision::Deny;
        break;
      case TraceOp::RemoteThread:
        o.decision = kernel_.create_remote_thread(Pid{*e.actor}, Pid{*e.target}).decision;
        break;
      case TraceOp::SetHook:
        o.scope_vm = kernel_.set_hook(Pid{*e.actor}, *e.hook).vm.value;
        o.decision = Decision::Allow;
        break;
      case TraceOp::Bind:
        o.effective_ip = kernel_.bind_socket(Pid{*e.actor}, *e.ip, *e.port).effective_ip;
        o.decision = Decision::Allow;
        break;
      case TraceOp::Seal:
        engine_.seal_host_objects();
        if (reference_) reference_->seal_host_objects();
        if (!report_.seal_state) {
          report_.seal_seq = e.seq;
          report_.seal_state = engine_.snapshot();
        }
        break;
    }
  }

  void check(const Expectation& x, const EventOutcome& o) {
    const auto before = report_.failures.size();
    auto cmp = [&](const char* field, const auto& expected, const auto& actual) {
      if (!expected) return;
      if (expected != actual) report_.failures.push_back({o.seq, field, show(expected), show(actual)});
    };
    cmp("route", x.route, o.route);
    cmp("effective_name", x.effective_name, o.effective_name);
    cmp("decision", x.decision, o.decision);
    cmp("error", x.error, o.error);
    cmp("effective_ip", x.effective_ip, o.effective_ip);
    cmp("scope_vm", x.scope_vm, o.scope_vm);
    if (report_.failures.size() == before)
      ++report_.assertions_passed;
    else
      ++report_.assertions_failed;
  }

  Topology topology_;
  ConfinementEngine engine_;
  SimKernel kernel_;
  std::optional<ReferenceEngine> reference_;
  std::map<std::uint64_t, HandleId> handles_;
  ReplayReport report_;
};

json outcome_json(const ResolveOutcome& r) {
  return {{"effective_name", r.effective_name.str()}, {"route", to_string(r.route)},
          {"principle", to_string(r.principle)}};
}

}  // namespace

ReplayReport replay(const std::vector<TraceEvent>& events, ReplayMode mode) {
  validate_trace(events);
  Replayer r(mode);
  for (const auto& e : events) r.run(e);
  return r.finish();
}

json to_json(const EngineCounters& c) {
  return {{"resolves_total", c.resolves_total},
          {"host_bypasses", c.host_bypasses},
          {"global_creates", c.global_creates},
          {"global_table_hits", c.global_table_hits},
          {"short_hits", c.short_hits},
          {"long_hits", c.long_hits},
          {"long_misses", c.long_misses},
          {"renames", c.renames},
          {"host_passthroughs", c.host_passthroughs},
          {"post_seal_long_skips", c.post_seal_long_skips},
          {"denials", c.denials},
          {"long_list_probes", c.long_list_probes}};
}

json to_json(const EngineSnapshot& s) {
  json tables = json::object();
  for (const auto& [vm, names] : s.global_tables) tables[vm_tag(VmId{vm})] = names;
  return {{"long_list", s.long_list},
          {"short_list", s.short_list},
          {"flag", s.sealed},
          {"global_tables", tables},
          {"counters", to_json(s.counters)}};
}

json to_json(const ReplayReport& r) {
  json outcomes = json::array();
  for (const auto& o : r.outcomes) {
    json j{{"seq", o.seq}, {"op", to_string(o.op)}};
    if (o.vm) j["vm"] = *o.vm;
    if (o.name) j["name"] = *o.name;
    if (o.route) j["route"] = to_string(*o.route);
    if (o.effective_name) j["effective_name"] = *o.effective_name;
    if (o.decision) j["decision"] = to_string(*o.decision);
    if (o.error) j["error"] = *o.error;
    if (o.effective_ip) j["effective_ip"] = *o.effective_ip;
    if (o.scope_vm) j["scope_vm"] = *o.scope_vm;
    if (o.object_id) j["object_id"] = *o.object_id;
    outcomes.push_back(std::move(j));
  }
  json failures = json::array();
  for (const auto& f : r.failures)
    failures.push_back({{"seq", f.seq}, {"field", f.field}, {"expected", f.expected}, {"actual", f.actual}});
  json divergences = json::array();
  for (const auto& d : r.divergences)
    divergences.push_back({{"seq", d.seq},
                           {"vm", d.vm},
                           {"name", d.name},
                           {"optimized", outcome_json(d.optimized)},
                           {"reference", outcome_json(d.reference)}});
  json bindings = json::array();
  for (const auto& b : r.bindings)
    bindings.push_back({{"pid", b.pid}, {"vm", b.vm}, {"requested_ip", b.requested_ip},
                        {"effective_ip", b.effective_ip}, {"port", b.port}});
  return {{"mode", r.mode == ReplayMode::Single ? "Single" : "DualWithOracle"},
          {"events_run", r.events_run},
          {"assertions_passed", r.assertions_passed},
          {"assertions_failed", r.assertions_failed},
          {"failures", failures},
          {"divergences", divergences},
          {"counters", to_json(r.final_state.counters)},
          {"seal_seq", r.seal_seq ? json(*r.seal_seq) : json(nullptr)},
          {"seal_state", r.seal_state ? to_json(*r.seal_state) : json(nullptr)},
          {"final_state", to_json(r.final_state)},
          {"bindings", bindings},
          {"live_objects", r.live_objects},
          {"cross_vm_opens", r.cross_vm_opens},
          {"outcomes", outcomes}};
}

std::string report_text(const ReplayReport& report) { return to_json(report).dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Concurrent replay

StressReport replay_concurrent(const std::vector<TraceEvent>& events, int workers) {
  validate_trace(events);
  if (workers < 1) throw Error(ErrorCode::InvalidConfig, "workers must be >= 1");

  Topology topology;
  ConfinementEngine engine;
  SimKernel kernel(topology, engine);
  std::mutex handles_mu;
  std::map<std::uint64_t, HandleId> handles;

  StressReport out;
  out.workers = workers;
  std::uint64_t refused = 0;
  std::optional<EngineCounters> at_seal;
  std::vector<std::string> short_at_seal;

  auto run_one = [&](const TraceEvent& e) -> bool {
    try {
      switch (e.op) {
        case TraceOp::LoadLongList: engine.load_long_list(e.names); break;
        case TraceOp::VmCreate: topology.vm_create(*e.ip); break;
        case TraceOp::Spawn: topology.process_spawn(VmId{*e.vm}); break;
        case TraceOp::Create:
        case TraceOp::Open: {
          ObjectName name(*e.name);
          auto cat = category_of(e);
          auto access = e.op == TraceOp::Create
                            ? kernel.create_object(Pid{*e.actor}, name, cat, e.scope.value_or(Scope::Local))
                            : kernel.open_object(Pid{*e.actor}, name, cat);
          if (!access.ok()) return false;
          std::lock_guard lock(handles_mu);
          handles[e.seq] = *access.handle;
          break;
        }
        case TraceOp::Close: {
          std::optional<HandleId> h;
          {
            std::lock_guard lock(handles_mu);
            if (auto it = handles.find(*e.handle); it != handles.end()) h = it->second;
          }
          if (!h) return false;
          kernel.close(Pid{*e.actor}, *h);
          break;
        }
        case TraceOp::Send:
          kernel.send_message(Pid{*e.actor}, Pid{*e.target}, *message_kind_from_string(*e.subtype),
                              e.payload.value_or(""));
          break;
        case TraceOp::RegisterWindow: kernel.register_window(Pid{*e.actor}, *e.window_class); break;
        case TraceOp::FindWindow: kernel.find_window(Pid{*e.actor}, *e.window_class); break;
        case TraceOp::RemoteThread: kernel.create_remote_thread(Pid{*e.actor}, Pid{*e.target}); break;
        case TraceOp::SetHook: kernel.set_hook(Pid{*e.actor}, *e.hook); break;
        case TraceOp::Bind: kernel.bind_socket(Pid{*e.actor}, *e.ip, *e.port); break;
        case TraceOp::Seal: engine.seal_host_objects(); break;
      }
    } catch (const Error&) {
      return false;
    }
    return true;
  };

  std::size_t i = 0;
  while (i < events.size()) {
    // Segment: everything up to (not including) the next seal.
    std::size_t end = i;
    while (end < events.size() && events[end].op != TraceOp::Seal) ++end;

    std::map<std::uint32_t, std::vector<const TraceEvent*>> lanes;
    for (std::size_t k = i; k < end; ++k) {
      const auto& e = events[k];
      if (!e.actor) {
        if (!run_one(e)) ++refused;
        ++out.events_run;
      } else {
        lanes[*e.actor].push_back(&e);
      }
    }
    std::vector<const std::vector<const TraceEvent*>*> lane_list;
    for (const auto& [pid, lane] : lanes) lane_list.push_back(&lane);

    std::uint64_t seg_refused = 0;
    std::uint64_t seg_run = 0;
#pragma omp parallel for schedule(dynamic) num_threads(workers) reduction(+ : seg_refused, seg_run)
    for (std::size_t l = 0; l < lane_list.size(); ++l) {
      for (const auto* e : *lane_list[l]) {
        if (!run_one(*e)) ++seg_refused;
        ++seg_run;
      }
    }
    refused += seg_refused;
    out.events_run += seg_run;

    if (end < events.size()) {
      if (!run_one(events[end])) ++refused;
      ++out.events_run;
      if (!at_seal) {
        auto snap = engine.snapshot();
        at_seal = snap.counters;
        short_at_seal = snap.short_list;
      }
    }
    i = end + 1;
  }

  out.refused = refused;
  out.final_state = engine.snapshot();
  for (auto& v : check_counter_conservation(out.final_state.counters)) out.violations.push_back(v);
  for (auto& v : check_short_within_long(out.final_state)) out.violations.push_back(v);
  if (at_seal) {
    if (at_seal->long_hits != out.final_state.counters.long_hits ||
        at_seal->long_misses != out.final_state.counters.long_misses)
      out.violations.push_back("long-list counters moved after seal");
    if (short_at_seal != out.final_state.short_list) out.violations.push_back("short list changed after seal");
  }
  std::uint64_t refs = 0;
  for (const auto& rec : kernel.objects()) refs += rec.refcount;
  if (refs != kernel.live_handles())
    out.violations.push_back("refcount sum " + std::to_string(refs) + " != live handles " +
                             std::to_string(kernel.live_handles()));
  return out;
}

}  // namespace ipcconfine
