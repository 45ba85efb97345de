#include "ipcconfine/confinement_engine.hpp"

#include <algorithm>
#include <cctype>

namespace ipcconfine {

std::string_view to_string(Route route) {
  switch (route) {
    case Route::HostPassthrough: return "HostPassthrough";
    case Route::VmGlobal: return "VmGlobal";
    case Route::VmPrivate: return "VmPrivate";
  }
  return "?";
}

std::optional<Route> route_from_string(std::string_view text) {
  for (auto r : {Route::HostPassthrough, Route::VmGlobal, Route::VmPrivate})
    if (to_string(r) == text) return r;
  return std::nullopt;
}

std::string_view to_string(Principle principle) {
  switch (principle) {
    case Principle::HostObject: return "HostObject";
    case Principle::GlobalObject: return "GlobalObject";
    case Principle::Isolation: return "Isolation";
  }
  return "?";
}

std::string_view to_string(Decision decision) { return decision == Decision::Allow ? "Allow" : "Deny"; }

std::optional<Decision> decision_from_string(std::string_view text) {
  if (text == "Allow") return Decision::Allow;
  if (text == "Deny") return Decision::Deny;
  return std::nullopt;
}

std::string_view to_string(VerdictReason reason) {
  switch (reason) {
    case VerdictReason::SameVm: return "SameVm";
    case VerdictReason::CrossVm: return "CrossVm";
    case VerdictReason::ScopedToVm: return "ScopedToVm";
    case VerdictReason::NoTarget: return "NoTarget";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Host lists

bool matches_digit_pattern(std::string_view name, std::string_view prefix) noexcept {
  if (name.size() <= prefix.size() || name.substr(0, prefix.size()) != prefix) return false;
  auto tail = name.substr(prefix.size());
  return std::all_of(tail.begin(), tail.end(), [](unsigned char c) { return std::isdigit(c) != 0; });
}

std::size_t LongHostList::assign(const std::vector<ObjectName>& names) {
  exact_.clear();
  patterns_.clear();
  for (const auto& n : names) {
    const auto& s = n.str();
    if (s.back() == '*') {
      auto prefix = s.substr(0, s.size() - 1);
      if (std::find(patterns_.begin(), patterns_.end(), prefix) == patterns_.end()) patterns_.push_back(prefix);
    } else {
      exact_.insert(s);
    }
  }
  return size();
}

bool LongHostList::contains(const std::string& name) const {
  if (exact_.contains(name)) return true;
  for (const auto& prefix : patterns_)
    if (matches_digit_pattern(name, prefix)) return true;
  return false;
}

std::vector<std::string> LongHostList::entries() const {
  std::vector<std::string> out(exact_.begin(), exact_.end());
  for (const auto& p : patterns_) out.push_back(p + "*");
  std::sort(out.begin(), out.end());
  return out;
}

void ShortHostList::touch(const std::string& name) {
  if (auto it = index_.find(name); it != index_.end()) {
    order_.splice(order_.begin(), order_, it->second);
    return;
  }
  order_.push_front(name);
  index_.emplace(name, order_.begin());
  if (capacity_ && order_.size() > *capacity_) {
    index_.erase(order_.back());
    order_.pop_back();
  }
}

// ---------------------------------------------------------------------------
// ConfinementEngine

ConfinementEngine::ConfinementEngine(EngineOptions options) : short_list_(options.short_list_capacity) {}

std::size_t ConfinementEngine::load_long_list(const std::vector<ObjectName>& names) {
  std::lock_guard lock(mu_);
  if (loaded_) throw Error(ErrorCode::AlreadyLoaded, "long host-object list already loaded");
  auto n = long_list_.assign(names);
  loaded_ = true;
  return n;
}

std::size_t ConfinementEngine::load_long_list(const std::vector<std::string>& names) {
  std::vector<ObjectName> parsed;
  parsed.reserve(names.size());
  for (const auto& n : names) parsed.emplace_back(n);
  return load_long_list(parsed);
}

ResolveOutcome ConfinementEngine::resolve(const ProcessRef& caller, const ObjectName& name,
                                          const IpcCategory& category, Intent intent, Scope scope) {
  if (!is_name_addressed(category.group))
    throw Error(ErrorCode::BadCategory, std::string(to_string(category.group)) + " is not name-addressed");

  std::lock_guard lock(mu_);
  if (!loaded_) throw Error(ErrorCode::NotLoaded, "resolve before load_long_list");
  ++counters_.resolves_total;

  if (caller.vm.is_host()) {
    ++counters_.host_bypasses;
    return {name, Route::HostPassthrough, Principle::HostObject};
  }

  auto renamed = [&](Route route, Principle principle) {
    ++counters_.renames;
    return ResolveOutcome{rename(name, caller.vm), route, principle};
  };
  auto passthrough = [&] {
    ++counters_.host_passthroughs;
    return ResolveOutcome{name, Route::HostPassthrough, Principle::HostObject};
  };

  const auto& key = name.str();
  if (intent == Intent::Create && is_global_name(name, scope)) {
    global_tables_[caller.vm.value].insert(key);
    ++counters_.global_creates;
    return renamed(Route::VmGlobal, Principle::GlobalObject);
  }
  if (auto it = global_tables_.find(caller.vm.value); it != global_tables_.end() && it->second.contains(key)) {
    ++counters_.global_table_hits;
    return renamed(Route::VmGlobal, Principle::GlobalObject);
  }
  if (short_list_.contains(key)) {
    if (!sealed_) short_list_.touch(key);
    ++counters_.short_hits;
    return passthrough();
  }
  if (sealed_) {
    ++counters_.post_seal_long_skips;
    return renamed(Route::VmPrivate, Principle::Isolation);
  }
  ++counters_.long_list_probes;
  if (long_list_.contains(key)) {
    short_list_.touch(key);
    ++counters_.long_hits;
    return passthrough();
  }
  ++counters_.long_misses;
  return renamed(Route::VmPrivate, Principle::Isolation);
}

void ConfinementEngine::seal_host_objects() {
  std::lock_guard lock(mu_);
  if (!loaded_) throw Error(ErrorCode::NotLoaded, "seal before load_long_list");
  sealed_ = true;
}

Verdict ConfinementEngine::access_decide(const ProcessRef& sender, const ProcessRef& receiver,
                                         const IpcCategory& category) {
  if (category.group != IpcGroup::V_Message)
    throw Error(ErrorCode::BadCategory, std::string(to_string(category.group)) + " is not a message category");
  std::lock_guard lock(mu_);
  if (sender.vm == receiver.vm) return {Decision::Allow, VerdictReason::SameVm};
  ++counters_.denials;
  return {Decision::Deny, VerdictReason::CrossVm};
}

Verdict ConfinementEngine::dangerous_decide(const ProcessRef& caller, std::optional<VmId> target_vm,
                                            DangerousKind kind) {
  std::lock_guard lock(mu_);
  if (!target_vm) {
    // System-wide requests are narrowed to the caller's own context, except
    // remote thread creation which needs a concrete target.
    if (kind == DangerousKind::CreateRemoteThread) {
      ++counters_.denials;
      return {Decision::Deny, VerdictReason::NoTarget};
    }
    return {Decision::Allow, VerdictReason::ScopedToVm};
  }
  if (*target_vm == caller.vm) return {Decision::Allow, VerdictReason::SameVm};
  ++counters_.denials;
  return {Decision::Deny, VerdictReason::CrossVm};
}

EngineSnapshot ConfinementEngine::snapshot() const {
  std::lock_guard lock(mu_);
  EngineSnapshot s;
  s.long_list = long_list_.entries();
  s.short_list = short_list_.ordered();
  s.sealed = sealed_;
  for (const auto& [vm, names] : global_tables_) {
    auto& out = s.global_tables[vm];
    out.assign(names.begin(), names.end());
    std::sort(out.begin(), out.end());
  }
  s.counters = counters_;
  return s;
}

EngineCounters ConfinementEngine::counters() const {
  std::lock_guard lock(mu_);
  return counters_;
}

bool ConfinementEngine::loaded() const {
  std::lock_guard lock(mu_);
  return loaded_;
}

bool ConfinementEngine::sealed() const {
  std::lock_guard lock(mu_);
  return sealed_;
}

}  // namespace ipcconfine
