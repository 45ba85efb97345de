#include "ipcconfine/invariants.hpp"

#include <map>
#include <utility>

namespace ipcconfine {

std::vector<std::string> check_counter_conservation(const EngineCounters& c) {
  std::vector<std::string> out;
  auto expect_eq = [&](const char* what, std::uint64_t lhs, std::uint64_t rhs) {
    if (lhs != rhs) out.push_back(std::string(what) + ": " + std::to_string(lhs) + " != " + std::to_string(rhs));
  };
  expect_eq("resolves_total", c.resolves_total,
            c.host_bypasses + c.global_creates + c.global_table_hits + c.short_hits + c.long_hits + c.long_misses +
                c.post_seal_long_skips);
  expect_eq("host_passthroughs", c.host_passthroughs, c.short_hits + c.long_hits);
  expect_eq("renames", c.renames, c.global_creates + c.global_table_hits + c.long_misses + c.post_seal_long_skips);
  expect_eq("long_list_probes", c.long_list_probes, c.long_hits + c.long_misses);
  return out;
}

std::vector<std::string> check_short_within_long(const EngineSnapshot& s) {
  LongHostList long_list;
  std::vector<ObjectName> names;
  for (const auto& n : s.long_list) names.emplace_back(n);
  long_list.assign(names);
  std::vector<std::string> out;
  for (const auto& n : s.short_list)
    if (!long_list.contains(n)) out.push_back("short-list entry '" + n + "' is not a host object");
  return out;
}

std::vector<std::string> check_frozen_after_seal(const ReplayReport& report) {
  std::vector<std::string> out;
  if (!report.seal_state) return out;
  const auto& at_seal = *report.seal_state;
  const auto& end = report.final_state;
  if (at_seal.counters.long_hits != end.counters.long_hits)
    out.push_back("long_hits moved after seal: " + std::to_string(at_seal.counters.long_hits) + " -> " +
                  std::to_string(end.counters.long_hits));
  if (at_seal.counters.long_misses != end.counters.long_misses)
    out.push_back("long_misses moved after seal: " + std::to_string(at_seal.counters.long_misses) + " -> " +
                  std::to_string(end.counters.long_misses));
  if (at_seal.short_list != end.short_list) out.push_back("short list changed after seal");
  if (!end.sealed) out.push_back("flag reverted after seal");
  return out;
}

std::vector<std::string> check_namespace_disjointness(const ReplayReport& report) {
  struct Use {
    std::uint32_t vm;
    Route route;
    std::string original;
    std::uint64_t seq;
  };
  std::map<std::string, std::vector<Use>> by_effective;
  for (const auto& o : report.outcomes) {
    if (!o.route || !o.vm || *o.vm == 0 || !o.effective_name || !o.name) continue;
    by_effective[*o.effective_name].push_back(Use{*o.vm, *o.route, *o.name, o.seq});
  }
  std::vector<std::string> out;
  for (const auto& [effective, uses] : by_effective) {
    for (std::size_t i = 0; i < uses.size(); ++i) {
      for (std::size_t j = i + 1; j < uses.size(); ++j) {
        const auto& a = uses[i];
        const auto& b = uses[j];
        if (a.vm == b.vm) continue;
        bool shared_host = a.route == Route::HostPassthrough && b.route == Route::HostPassthrough &&
                           a.original == effective && b.original == effective;
        if (!shared_host)
          out.push_back("vm" + std::to_string(a.vm) + " (seq " + std::to_string(a.seq) + ") and vm" +
                        std::to_string(b.vm) + " (seq " + std::to_string(b.seq) + ") share '" + effective + "'");
      }
    }
  }
  return out;
}

std::set<std::string> post_seal_first_touch_names(const std::vector<TraceEvent>& events,
                                                  const ReplayReport& report) {
  std::set<std::string> out;
  if (!report.seal_seq) return out;
  LongHostList long_list;
  for (const auto& e : events) {
    if (e.op != TraceOp::LoadLongList) continue;
    std::vector<ObjectName> names;
    for (const auto& n : e.names) names.emplace_back(n);
    long_list.assign(names);
  }
  std::set<std::string> touched_before;
  for (const auto& o : report.outcomes) {
    if (!o.name || !o.vm || *o.vm == 0 || !o.route) continue;
    if (!long_list.contains(*o.name)) continue;
    if (o.seq < *report.seal_seq)
      touched_before.insert(*o.name);
    else if (!touched_before.contains(*o.name))
      out.insert(*o.name);
  }
  return out;
}

}  // namespace ipcconfine
