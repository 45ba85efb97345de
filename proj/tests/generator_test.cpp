#include <doctest.h>

#include <set>

#include "ipcconfine/generator.hpp"
#include "ipcconfine/invariants.hpp"
#include "ipcconfine/replay.hpp"

using namespace ipcconfine;

TEST_CASE("generation is deterministic in the seed") {
  CHECK(generate_random_trace(5) == generate_random_trace(5));
  CHECK_FALSE(generate_random_trace(5) == generate_random_trace(6));
}

TEST_CASE("generated traces are valid and replay cleanly") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    TraceParams p;
    p.vm_count = 2 + seed % 3;
    auto ev = generate_random_trace(seed, p);
    CHECK_NOTHROW(validate_trace(ev));
    auto r = replay(ev, ReplayMode::DualWithOracle);
    CHECK(r.assertions_failed == 0);
    CHECK(r.divergences.empty());
    CHECK(r.seal_seq.has_value());
    std::size_t vms = 0;
    for (const auto& e : ev) vms += e.op == TraceOp::VmCreate;
    CHECK(vms == p.vm_count);
  }
}

TEST_CASE("unconstrained first touch produces a divergence on that name") {
  TraceParams p;
  p.constrained = false;
  p.post_seal_first_touch = true;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto ev = generate_random_trace(seed, p);
    auto r = replay(ev, ReplayMode::DualWithOracle);
    auto touched = post_seal_first_touch_names(ev, r);
    REQUIRE_FALSE(touched.empty());
    bool attributed = false;
    for (const auto& d : r.divergences) attributed |= touched.contains(d.name);
    CHECK(attributed);
  }
}

TEST_CASE("zero host fraction yields no passthrough") {
  TraceParams p;
  p.host_fraction = 0;
  auto r = replay(generate_random_trace(4, p));
  for (const auto& o : r.outcomes)
    if (o.vm && *o.vm != 0) CHECK(o.route != Route::HostPassthrough);
}

TEST_CASE("invalid parameters are rejected") {
  auto rejects = [](TraceParams p) {
    try {
      generate_random_trace(1, p);
    } catch (const Error& e) {
      return e.code() == ErrorCode::InvalidParams;
    }
    return false;
  };
  TraceParams p;
  p.vm_count = 0;
  CHECK(rejects(p));
  p = {};
  p.host_fraction = 1.5;
  CHECK(rejects(p));
  p = {};
  p.host_fraction = 0;
  p.post_seal_first_touch = true;
  CHECK(rejects(p));
  p = {};
  p.seal_position = p.event_count + 1;
  CHECK(rejects(p));
}
