#include "ipcconfine/confinement_engine.hpp"

#include <algorithm>

namespace ipcconfine {

std::size_t ReferenceEngine::load_long_list(const std::vector<ObjectName>& names) {
  if (loaded_) throw Error(ErrorCode::AlreadyLoaded, "long host-object list already loaded");
  for (const auto& n : names)
    if (std::find(entries_.begin(), entries_.end(), n.str()) == entries_.end()) entries_.push_back(n.str());
  loaded_ = true;
  return entries_.size();
}

// Plain linear scan. A trailing '*' stands for one or more decimal digits.
bool ReferenceEngine::in_long_list(const std::string& name) {
  ++scans_;
  bool found = false;
  for (const auto& entry : entries_) {
    if (entry.back() != '*') {
      found = found || entry == name;
      continue;
    }
    const auto stem_len = entry.size() - 1;
    if (name.size() <= stem_len || name.compare(0, stem_len, entry, 0, stem_len) != 0) continue;
    bool digits = true;
    for (auto i = stem_len; i < name.size(); ++i) digits = digits && name[i] >= '0' && name[i] <= '9';
    found = found || digits;
  }
  return found;
}

ResolveOutcome ReferenceEngine::resolve(const ProcessRef& caller, const ObjectName& name,
                                        const IpcCategory& category, Intent intent, Scope scope) {
  if (!is_name_addressed(category.group))
    throw Error(ErrorCode::BadCategory, std::string(to_string(category.group)) + " is not name-addressed");
  if (!loaded_) throw Error(ErrorCode::NotLoaded, "resolve before load_long_list");

  if (caller.vm.is_host()) return {name, Route::HostPassthrough, Principle::HostObject};

  auto& table = global_tables_[caller.vm.value];
  const bool in_table = std::find(table.begin(), table.end(), name.str()) != table.end();
  if (intent == Intent::Create && is_global_name(name, scope)) {
    if (!in_table) table.push_back(name.str());
    return {rename(name, caller.vm), Route::VmGlobal, Principle::GlobalObject};
  }
  if (in_table) return {rename(name, caller.vm), Route::VmGlobal, Principle::GlobalObject};
  if (in_long_list(name.str())) return {name, Route::HostPassthrough, Principle::HostObject};
  return {rename(name, caller.vm), Route::VmPrivate, Principle::Isolation};
}

}  // namespace ipcconfine
