#include <doctest.h>

#include "ipcconfine/confinement_engine.hpp"
#include "ipcconfine/invariants.hpp"

using namespace ipcconfine;

namespace {

const IpcCategory kPort{IpcGroup::I_Port, "Port"};
const IpcCategory kPipe{IpcGroup::II_PseudoFile, "NamedPipe"};
const IpcCategory kMsg{IpcGroup::V_Message, "WindowsMessage"};
const ProcessRef kHost{Pid{1}, kHostVm};
const ProcessRef kP1{Pid{2}, VmId{1}};
const ProcessRef kP2{Pid{3}, VmId{2}};

struct Loaded : ConfinementEngine {
  explicit Loaded(std::vector<std::string> names) { load_long_list(names); }
};

ResolveOutcome open(ConfinementEngine& e, const ProcessRef& who, const char* name) {
  return e.resolve(who, ObjectName(name), kPort, Intent::Open);
}

}  // namespace

TEST_CASE("resolve before load fails") {
  ConfinementEngine e;
  CHECK_THROWS_AS(open(e, kP1, "\\a"), Error);
  CHECK_THROWS_AS(e.seal_host_objects(), Error);
}

TEST_CASE("second load is rejected") {
  Loaded e(std::vector<std::string>{"\\a"});
  try {
    e.load_long_list(std::vector<std::string>{"\\b"});
    FAIL("expected AlreadyLoaded");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::AlreadyLoaded);
  }
}

TEST_CASE("host callers pass through untouched") {
  Loaded e(std::vector<std::string>{"\\RPC Control\\ntsvcs"});
  auto r = open(e, kHost, "\\Private\\x");
  CHECK(r.route == Route::HostPassthrough);
  CHECK(r.effective_name.str() == "\\Private\\x");
  CHECK(e.counters().host_bypasses == 1);
  CHECK(e.snapshot().short_list.empty());
}

TEST_CASE("isolation renames unknown names") {
  Loaded e(std::vector<std::string>{"\\RPC Control\\ntsvcs"});
  auto r = open(e, kP1, "\\RPC Control\\epmapper");
  CHECK(r.route == Route::VmPrivate);
  CHECK(r.principle == Principle::Isolation);
  CHECK(r.effective_name.str() == "\\vm1\\RPC Control\\epmapper");
  CHECK(e.counters().long_misses == 1);
}

TEST_CASE("host objects pass through and are promoted") {
  Loaded e(std::vector<std::string>{"\\RPC Control\\ntsvcs", "\\Device\\NamedPipe\\svcsctl"});
  auto r = open(e, kP1, "\\RPC Control\\ntsvcs");
  CHECK(r.route == Route::HostPassthrough);
  CHECK(r.principle == Principle::HostObject);
  CHECK(r.effective_name.str() == "\\RPC Control\\ntsvcs");
  CHECK(e.counters().long_hits == 1);
  CHECK(e.snapshot().short_list == std::vector<std::string>{"\\RPC Control\\ntsvcs"});
  open(e, kP2, "\\RPC Control\\ntsvcs");
  CHECK(e.counters().short_hits == 1);
  CHECK(e.counters().long_hits == 1);
}

TEST_CASE("short list keeps most-recent-first order") {
  Loaded e(std::vector<std::string>{"\\a", "\\b", "\\c"});
  open(e, kP1, "\\a");
  open(e, kP1, "\\b");
  open(e, kP1, "\\a");
  CHECK(e.snapshot().short_list == std::vector<std::string>{"\\a", "\\b"});
  open(e, kP2, "\\c");
  CHECK(e.snapshot().short_list == std::vector<std::string>{"\\c", "\\a", "\\b"});
}

TEST_CASE("short list capacity evicts the least recent entry") {
  ConfinementEngine e(EngineOptions{std::size_t{2}});
  e.load_long_list(std::vector<std::string>{"\\a", "\\b", "\\c"});
  open(e, kP1, "\\a");
  open(e, kP1, "\\b");
  open(e, kP1, "\\c");
  CHECK(e.snapshot().short_list == std::vector<std::string>{"\\c", "\\b"});
  CHECK(open(e, kP1, "\\a").route == Route::HostPassthrough);
  CHECK(e.counters().long_hits == 4);
}

TEST_CASE("digit patterns match one or more digits") {
  CHECK(matches_digit_pattern("\\p\\NtControlPipe1", "\\p\\NtControlPipe"));
  CHECK(matches_digit_pattern("\\p\\NtControlPipe20", "\\p\\NtControlPipe"));
  CHECK_FALSE(matches_digit_pattern("\\p\\NtControlPipe", "\\p\\NtControlPipe"));
  CHECK_FALSE(matches_digit_pattern("\\p\\NtControlPipeX", "\\p\\NtControlPipe"));
  CHECK_FALSE(matches_digit_pattern("\\p\\NtControlPipe1a", "\\p\\NtControlPipe"));

  Loaded e(std::vector<std::string>{"\\Device\\NamedPipe\\net\\NtControlPipe*"});
  CHECK(open(e, kP1, "\\Device\\NamedPipe\\net\\NtControlPipe7").route == Route::HostPassthrough);
  CHECK(open(e, kP1, "\\Device\\NamedPipe\\net\\NtControlPipe").route == Route::VmPrivate);
}

TEST_CASE("global creates go to the creator's table") {
  Loaded e(std::vector<std::string>{"\\BaseNamedObjects\\Global\\RotHintTable"});
  auto r = e.resolve(kP1, ObjectName("\\BaseNamedObjects\\Global\\RotHintTable"), kPort, Intent::Create);
  CHECK(r.route == Route::VmGlobal);
  CHECK(r.principle == Principle::GlobalObject);
  CHECK(r.effective_name.str() == "\\vm1\\BaseNamedObjects\\Global\\RotHintTable");
  // The creator's own opens stay local even though the long list has the name.
  CHECK(open(e, kP1, "\\BaseNamedObjects\\Global\\RotHintTable").route == Route::VmGlobal);
  // Another VM did not create it, so it reaches the host object.
  CHECK(open(e, kP2, "\\BaseNamedObjects\\Global\\RotHintTable").route == Route::HostPassthrough);
  auto snap = e.snapshot();
  REQUIRE(snap.global_tables.contains(1));
  CHECK(snap.global_tables.at(1) == std::vector<std::string>{"\\BaseNamedObjects\\Global\\RotHintTable"});
  CHECK_FALSE(snap.global_tables.contains(2));
}

TEST_CASE("declared global scope marks a create global") {
  Loaded e(std::vector<std::string>{});
  auto r = e.resolve(kP1, ObjectName("\\x"), kPort, Intent::Create, Scope::Global);
  CHECK(r.route == Route::VmGlobal);
  CHECK(e.counters().global_creates == 1);
}

TEST_CASE("seal stops long-list reads") {
  Loaded e(std::vector<std::string>{"\\a", "\\b"});
  open(e, kP1, "\\a");
  e.seal_host_objects();
  e.seal_host_objects();
  CHECK(e.sealed());
  const auto before = e.counters();
  CHECK(open(e, kP1, "\\a").route == Route::HostPassthrough);
  auto r = open(e, kP1, "\\b");
  CHECK(r.route == Route::VmPrivate);
  CHECK(r.effective_name.str() == "\\vm1\\b");
  auto after = e.counters();
  CHECK(after.long_list_probes == before.long_list_probes);
  CHECK(after.long_hits == before.long_hits);
  CHECK(after.long_misses == before.long_misses);
  CHECK(after.post_seal_long_skips == before.post_seal_long_skips + 1);
}

TEST_CASE("sealed short list does not reorder") {
  Loaded e(std::vector<std::string>{"\\a", "\\b"});
  open(e, kP1, "\\a");
  open(e, kP1, "\\b");
  e.seal_host_objects();
  open(e, kP1, "\\a");
  CHECK(e.snapshot().short_list == std::vector<std::string>{"\\b", "\\a"});
}

TEST_CASE("group V-VII categories are rejected by resolve") {
  Loaded e(std::vector<std::string>{});
  CHECK_THROWS_AS(e.resolve(kP1, ObjectName("\\a"), kMsg, Intent::Open), Error);
  CHECK_THROWS_AS(e.access_decide(kP1, kP1, kPort), Error);
}

TEST_CASE("access decision compares vm ids") {
  ConfinementEngine e;
  const ProcessRef p1b{Pid{9}, VmId{1}};
  CHECK(e.access_decide(kP1, p1b, kMsg) == Verdict{Decision::Allow, VerdictReason::SameVm});
  CHECK(e.access_decide(kP1, kP2, kMsg).decision == Decision::Deny);
  CHECK(e.access_decide(kHost, kP1, kMsg).decision == Decision::Deny);
  CHECK(e.access_decide(kP1, kHost, kMsg).decision == Decision::Deny);
  const ProcessRef host2{Pid{10}, kHostVm};
  CHECK(e.access_decide(kHost, host2, kMsg).allowed());
  CHECK(e.counters().denials == 3);
}

TEST_CASE("access decisions are symmetric") {
  ConfinementEngine e;
  std::vector<ProcessRef> ps{kHost, kP1, kP2, {Pid{4}, VmId{1}}, {Pid{5}, VmId{3}}};
  for (const auto& a : ps)
    for (const auto& b : ps) CHECK(e.access_decide(a, b, kMsg).decision == e.access_decide(b, a, kMsg).decision);
}

TEST_CASE("dangerous calls are confined to the caller's vm") {
  ConfinementEngine e;
  CHECK(e.dangerous_decide(kP1, VmId{1}, DangerousKind::CreateRemoteThread).allowed());
  CHECK_FALSE(e.dangerous_decide(kP1, VmId{2}, DangerousKind::CreateRemoteThread).allowed());
  CHECK_FALSE(e.dangerous_decide(kP1, kHostVm, DangerousKind::CreateRemoteThread).allowed());
  auto wide = e.dangerous_decide(kP1, std::nullopt, DangerousKind::CreateRemoteThread);
  CHECK(wide == Verdict{Decision::Deny, VerdictReason::NoTarget});
  auto hook = e.dangerous_decide(kP1, std::nullopt, DangerousKind::SetWindowHook);
  CHECK(hook == Verdict{Decision::Allow, VerdictReason::ScopedToVm});
  auto find = e.dangerous_decide(kP1, std::nullopt, DangerousKind::FindWindow);
  CHECK(find.reason == VerdictReason::ScopedToVm);
}

TEST_CASE("counter conservation holds through a mixed workload") {
  Loaded e(std::vector<std::string>{"\\h1", "\\h2", "\\h3*"});
  for (int round = 0; round < 3; ++round) {
    for (const auto* who : {&kHost, &kP1, &kP2}) {
      open(e, *who, "\\h1");
      open(e, *who, "\\h35");
      open(e, *who, "\\private");
      e.resolve(*who, ObjectName("\\Global\\g"), kPort, Intent::Create);
      open(e, *who, "\\Global\\g");
    }
    if (round == 1) e.seal_host_objects();
  }
  auto c = e.counters();
  CHECK(check_counter_conservation(c).empty());
  CHECK(check_short_within_long(e.snapshot()).empty());
  CHECK(c.resolves_total == 45);
  CHECK(c.host_bypasses == 15);
}

TEST_CASE("conservation checker reports broken identities") {
  EngineCounters c;
  c.resolves_total = 3;
  c.short_hits = 1;
  CHECK_FALSE(check_counter_conservation(c).empty());
}
