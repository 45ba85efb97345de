#include <doctest.h>

#include <thread>

#include "ipcconfine/generator.hpp"
#include "ipcconfine/invariants.hpp"
#include "ipcconfine/replay.hpp"

using namespace ipcconfine;

TEST_CASE("engine state stays consistent under concurrent resolves") {
  ConfinementEngine engine;
  std::vector<std::string> host;
  for (int i = 0; i < 50; ++i) host.push_back("\\host\\obj" + std::to_string(i));
  engine.load_long_list(host);
  const IpcCategory cat{IpcGroup::IV_Sync, "Event"};
  std::vector<std::thread> threads;
  for (std::uint32_t t = 0; t < 6; ++t)
    threads.emplace_back([&, t] {
      const ProcessRef who{Pid{t + 1}, VmId{t % 3}};
      for (int i = 0; i < 2000; ++i) {
        const auto n = i % 3 == 0 ? "\\private\\" + std::to_string(i % 17) : host[(i * 7 + t) % host.size()];
        auto r = engine.resolve(who, ObjectName(n), cat, i % 5 == 0 ? Intent::Create : Intent::Open,
                                i % 11 == 0 ? Scope::Global : Scope::Local);
        if (r.route == Route::HostPassthrough && !who.vm.is_host()) CHECK(r.effective_name.str() == n);
        if (t == 0 && i == 1000) engine.seal_host_objects();
      }
    });
  for (auto& th : threads) th.join();
  auto snap = engine.snapshot();
  CHECK(snap.counters.resolves_total == 12000);
  CHECK(check_counter_conservation(snap.counters).empty());
  CHECK(check_short_within_long(snap).empty());
}

TEST_CASE("concurrent replay holds the invariants") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    auto ev = generate_random_trace(seed);
    for (int workers : {1, 4}) {
      auto r = replay_concurrent(ev, workers);
      CHECK(r.events_run == ev.size());
      CHECK(r.violations.empty());
      CHECK(r.final_state.sealed);
    }
  }
}

TEST_CASE("concurrent replay reaches the serial decision set") {
  // Lane interleaving changes order but not which names each VM resolves, so
  // the global tables and long list agree with the serial replay.
  auto ev = generate_random_trace(21);
  auto serial = replay(ev);
  auto stress = replay_concurrent(ev, 4);
  CHECK(stress.final_state.long_list == serial.final_state.long_list);
  CHECK(stress.final_state.global_tables == serial.final_state.global_tables);
  CHECK(stress.final_state.counters.resolves_total == serial.final_state.counters.resolves_total);
}
