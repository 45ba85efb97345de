#include "ipcconfine/sweep.hpp"

#include <omp.h>

#include <exception>
#include <set>

#include "ipcconfine/invariants.hpp"
#include "ipcconfine/replay.hpp"

namespace ipcconfine {

std::uint64_t fnv1a(std::string_view data) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

SweepResult run_case(const SweepCase& c) {
  SweepResult r;
  r.seed = c.seed;
  auto events = generate_random_trace(c.seed, c.params);
  auto first = replay(events, ReplayMode::DualWithOracle);
  auto second = replay(events, ReplayMode::DualWithOracle);
  const auto text = report_text(first);
  r.deterministic = text == report_text(second);
  r.report_digest = fnv1a(text);
  r.events = first.events_run;
  r.divergences = first.divergences.size();

  std::set<std::string> divergent;
  for (const auto& d : first.divergences) divergent.insert(d.name);
  r.divergent_names.assign(divergent.begin(), divergent.end());
  auto touched = post_seal_first_touch_names(events, first);
  r.first_touch_names.assign(touched.begin(), touched.end());

  r.disjointness_violations = check_namespace_disjointness(first).size();
  r.frozen_violations = check_frozen_after_seal(first).size();
  r.conservation_violations = check_counter_conservation(first.final_state.counters).size() +
                              check_short_within_long(first.final_state).size();
  for (const auto& o : first.outcomes)
    if (o.vm && *o.vm != 0 && o.route == Route::HostPassthrough) ++r.host_passthrough_vm_outcomes;
  return r;
}

std::vector<SweepResult> sweep_serial(const std::vector<SweepCase>& cases) {
  std::vector<SweepResult> out;
  out.reserve(cases.size());
  for (const auto& c : cases) out.push_back(run_case(c));
  return out;
}

std::vector<SweepResult> sweep_parallel(const std::vector<SweepCase>& cases, int threads) {
  std::vector<SweepResult> out(cases.size());
  const int n = threads > 0 ? threads : omp_get_max_threads();
  const auto count = static_cast<std::int64_t>(cases.size());
  std::vector<std::exception_ptr> errors(cases.size());
#pragma omp parallel for schedule(dynamic) num_threads(n)
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      out[i] = run_case(cases[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace ipcconfine
