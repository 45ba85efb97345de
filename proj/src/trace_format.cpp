#include "ipcconfine/trace.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <set>
#include <sstream>

namespace ipcconfine {

using nlohmann::json;

namespace {

struct OpSpec {
  TraceOp op;
  std::string_view name;
  bool has_actor;
  std::vector<std::string_view> required;
  std::vector<std::string_view> optional;
};

const std::vector<OpSpec>& op_specs() {
  static const std::vector<OpSpec> specs{
      {TraceOp::LoadLongList, "load_long_list", false, {"names"}, {}},
      {TraceOp::VmCreate, "vm_create", false, {"ip"}, {}},
      {TraceOp::Spawn, "spawn", false, {"vm"}, {}},
      {TraceOp::Create, "create", true, {"name", "category"}, {"subtype", "scope"}},
      {TraceOp::Open, "open", true, {"name", "category"}, {"subtype"}},
      {TraceOp::Close, "close", true, {"handle"}, {}},
      {TraceOp::Send, "send", true, {"target", "subtype"}, {"payload"}},
      {TraceOp::RegisterWindow, "register_window", true, {"class"}, {}},
      {TraceOp::FindWindow, "find_window", true, {"class"}, {}},
      {TraceOp::RemoteThread, "remote_thread", true, {"target"}, {}},
      {TraceOp::SetHook, "set_hook", true, {"hook"}, {}},
      {TraceOp::Bind, "bind", true, {"ip", "port"}, {}},
      {TraceOp::Seal, "seal", false, {}, {}},
  };
  return specs;
}

const OpSpec& spec_for(TraceOp op) {
  for (const auto& s : op_specs())
    if (s.op == op) return s;
  throw std::logic_error("unhandled trace op");
}

std::string_view to_string(HookRequest h) { return h == HookRequest::SystemWide ? "SystemWide" : "OwnVm"; }

std::optional<HookRequest> hook_from_string(std::string_view text) {
  if (text == "SystemWide") return HookRequest::SystemWide;
  if (text == "OwnVm") return HookRequest::OwnVm;
  return std::nullopt;
}

[[noreturn]] void invalid(std::uint64_t seq, const std::string& why) {
  throw TraceError(ErrorCode::ValidationError, seq, why);
}

template <typename T>
T get_field(const json& j, const char* key, std::uint64_t seq) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    invalid(seq, std::string("field '") + key + "' has the wrong type");
  }
}

void check_name(const std::string& name, std::uint64_t seq, bool allow_pattern) {
  if (!ObjectName::is_valid(name)) invalid(seq, "malformed object name '" + name + "'");
  ObjectName n(name);
  if (is_reserved_component(n.first_component()))
    invalid(seq, "name '" + name + "' uses the reserved vm<digits> prefix");
  if (!allow_pattern && name.find('*') != std::string::npos)
    invalid(seq, "pattern entries are only allowed in load_long_list");
  if (allow_pattern) {
    auto star = name.find('*');
    if (star != std::string::npos && star != name.size() - 1)
      invalid(seq, "'*' may only appear as the last character of '" + name + "'");
  }
}

Expectation expectation_from_json(const json& j, std::uint64_t seq) {
  if (!j.is_object()) invalid(seq, "expect must be an object");
  static const std::set<std::string> known{"route", "effective_name", "decision", "error", "effective_ip", "scope_vm"};
  for (const auto& [k, v] : j.items())
    if (!known.contains(k)) invalid(seq, "unknown expect field '" + k + "'");
  Expectation e;
  if (j.contains("route")) {
    auto r = route_from_string(get_field<std::string>(j, "route", seq));
    if (!r) invalid(seq, "unknown route in expect");
    e.route = r;
  }
  if (j.contains("effective_name")) e.effective_name = get_field<std::string>(j, "effective_name", seq);
  if (j.contains("decision")) {
    auto d = decision_from_string(get_field<std::string>(j, "decision", seq));
    if (!d) invalid(seq, "unknown decision in expect");
    e.decision = d;
  }
  if (j.contains("error")) e.error = get_field<std::string>(j, "error", seq);
  if (j.contains("effective_ip")) e.effective_ip = get_field<std::string>(j, "effective_ip", seq);
  if (j.contains("scope_vm")) e.scope_vm = get_field<std::uint32_t>(j, "scope_vm", seq);
  return e;
}

json expectation_to_json(const Expectation& e) {
  json j = json::object();
  if (e.route) j["route"] = to_string(*e.route);
  if (e.effective_name) j["effective_name"] = *e.effective_name;
  if (e.decision) j["decision"] = to_string(*e.decision);
  if (e.error) j["error"] = *e.error;
  if (e.effective_ip) j["effective_ip"] = *e.effective_ip;
  if (e.scope_vm) j["scope_vm"] = *e.scope_vm;
  return j;
}

}  // namespace

std::string_view to_string(TraceOp op) { return spec_for(op).name; }

std::optional<TraceOp> trace_op_from_string(std::string_view text) {
  for (const auto& s : op_specs())
    if (s.name == text) return s.op;
  return std::nullopt;
}

json to_json(const TraceEvent& e) {
  json j;
  j["seq"] = e.seq;
  j["op"] = to_string(e.op);
  if (e.actor) j["actor"] = *e.actor;
  if (e.op == TraceOp::LoadLongList) j["names"] = e.names;
  if (e.ip) j["ip"] = *e.ip;
  if (e.vm) j["vm"] = *e.vm;
  if (e.name) j["name"] = *e.name;
  if (e.category) j["category"] = to_string(*e.category);
  if (e.subtype) j["subtype"] = *e.subtype;
  if (e.scope) j["scope"] = to_string(*e.scope);
  if (e.handle) j["handle"] = *e.handle;
  if (e.target) j["target"] = *e.target;
  if (e.payload) j["payload"] = *e.payload;
  if (e.window_class) j["class"] = *e.window_class;
  if (e.hook) j["hook"] = to_string(*e.hook);
  if (e.port) j["port"] = *e.port;
  if (e.expect) j["expect"] = expectation_to_json(*e.expect);
  return j;
}

TraceEvent event_from_json(const json& j) {
  if (!j.is_object()) invalid(0, "event is not a JSON object");
  if (!j.contains("seq") || !j["seq"].is_number_unsigned() || j["seq"].get<std::uint64_t>() == 0)
    invalid(0, "missing or non-positive seq");
  TraceEvent e;
  e.seq = j["seq"].get<std::uint64_t>();
  if (!j.contains("op") || !j["op"].is_string()) invalid(e.seq, "missing op");
  auto op = trace_op_from_string(j["op"].get<std::string>());
  if (!op) invalid(e.seq, "unknown op '" + j["op"].get<std::string>() + "'");
  e.op = *op;

  const auto& spec = spec_for(e.op);
  for (const auto& [key, value] : j.items()) {
    if (key == "seq" || key == "op" || key == "expect") continue;
    if (key == "actor" && spec.has_actor) continue;
    auto listed = [&](const auto& v) { return std::find(v.begin(), v.end(), key) != v.end(); };
    if (!listed(spec.required) && !listed(spec.optional))
      invalid(e.seq, "field '" + key + "' is not allowed for op " + std::string(spec.name));
  }
  for (auto key : spec.required)
    if (!j.contains(std::string(key))) invalid(e.seq, "missing field '" + std::string(key) + "'");
  if (spec.has_actor) {
    if (!j.contains("actor") || j["actor"].is_null()) invalid(e.seq, "missing actor");
    e.actor = get_field<std::uint32_t>(j, "actor", e.seq);
  }

  if (j.contains("names")) e.names = get_field<std::vector<std::string>>(j, "names", e.seq);
  if (j.contains("ip")) e.ip = get_field<std::string>(j, "ip", e.seq);
  if (j.contains("vm")) e.vm = get_field<std::uint32_t>(j, "vm", e.seq);
  if (j.contains("name")) e.name = get_field<std::string>(j, "name", e.seq);
  if (j.contains("category")) {
    auto g = ipc_group_from_string(get_field<std::string>(j, "category", e.seq));
    if (!g) invalid(e.seq, "unknown category");
    e.category = g;
  }
  if (j.contains("subtype")) e.subtype = get_field<std::string>(j, "subtype", e.seq);
  if (j.contains("scope")) {
    auto s = scope_from_string(get_field<std::string>(j, "scope", e.seq));
    if (!s) invalid(e.seq, "scope must be Local or Global");
    e.scope = s;
  }
  if (j.contains("handle")) e.handle = get_field<std::uint64_t>(j, "handle", e.seq);
  if (j.contains("target")) e.target = get_field<std::uint32_t>(j, "target", e.seq);
  if (j.contains("payload")) e.payload = get_field<std::string>(j, "payload", e.seq);
  if (j.contains("class")) e.window_class = get_field<std::string>(j, "class", e.seq);
  if (j.contains("hook")) {
    auto h = hook_from_string(get_field<std::string>(j, "hook", e.seq));
    if (!h) invalid(e.seq, "hook must be SystemWide or OwnVm");
    e.hook = h;
  }
  if (j.contains("port")) e.port = get_field<int>(j, "port", e.seq);
  if (j.contains("expect")) e.expect = expectation_from_json(j["expect"], e.seq);

  validate_event(e);
  return e;
}

void validate_event(const TraceEvent& e) {
  if (e.seq == 0) invalid(0, "seq must be positive");
  const auto& spec = spec_for(e.op);
  if (spec.has_actor != e.actor.has_value()) invalid(e.seq, spec.has_actor ? "missing actor" : "unexpected actor");
  if (e.actor && *e.actor == 0) invalid(e.seq, "actor pid must be positive");

  switch (e.op) {
    case TraceOp::LoadLongList:
      for (const auto& n : e.names) check_name(n, e.seq, true);
      break;
    case TraceOp::VmCreate:
    case TraceOp::Bind:
      if (!e.ip) invalid(e.seq, "missing ip");
      if (e.op == TraceOp::Bind && !e.port) invalid(e.seq, "missing port");
      break;
    case TraceOp::Spawn:
      if (!e.vm) invalid(e.seq, "missing vm");
      break;
    case TraceOp::Create:
    case TraceOp::Open:
      if (!e.name || !e.category) invalid(e.seq, "missing name or category");
      check_name(*e.name, e.seq, false);
      if (!is_name_addressed(*e.category)) invalid(e.seq, "category must be one of I-IV for " + std::string(spec.name));
      if (e.op == TraceOp::Open && e.scope) invalid(e.seq, "open takes no scope");
      break;
    case TraceOp::Close:
      if (!e.handle) invalid(e.seq, "missing handle");
      if (*e.handle >= e.seq) invalid(e.seq, "handle must refer to an earlier event");
      break;
    case TraceOp::Send:
      if (!e.target || !e.subtype) invalid(e.seq, "missing target or subtype");
      if (!message_kind_from_string(*e.subtype)) invalid(e.seq, "unknown message subtype '" + *e.subtype + "'");
      break;
    case TraceOp::RemoteThread:
      if (!e.target) invalid(e.seq, "missing target");
      break;
    case TraceOp::RegisterWindow:
    case TraceOp::FindWindow:
      if (!e.window_class || e.window_class->empty()) invalid(e.seq, "missing window class");
      break;
    case TraceOp::SetHook:
      if (!e.hook) invalid(e.seq, "missing hook");
      break;
    case TraceOp::Seal:
      break;
  }
  if (e.expect && e.expect->error) {
    const auto& err = *e.expect->error;
    bool known = err == "AlreadyExists" || err == "NotFound" || err == "CategoryMismatch";
    if (!known) {
      try {
        error_code_from_string(err);
        known = true;
      } catch (const std::invalid_argument&) {
      }
    }
    if (!known) invalid(e.seq, "unknown expected error '" + err + "'");
  }
}

void validate_trace(const std::vector<TraceEvent>& events) {
  std::uint64_t last = 0;
  for (const auto& e : events) {
    validate_event(e);
    if (e.seq <= last) invalid(e.seq, "seq not strictly increasing (previous " + std::to_string(last) + ")");
    last = e.seq;
  }
}

std::vector<TraceEvent> parse_trace(std::string_view text) {
  std::vector<TraceEvent> events;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      if (end == text.size()) break;
      continue;
    }
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& ex) {
      throw TraceError(ErrorCode::ParseError, line_no, ex.what());
    }
    events.push_back(event_from_json(j));
    if (end == text.size()) break;
  }
  validate_trace(events);
  return events;
}

std::string serialize_trace(const std::vector<TraceEvent>& events) {
  std::string out;
  for (const auto& e : events) {
    out += to_json(e).dump();
    out += '\n';
  }
  return out;
}

std::vector<TraceEvent> read_trace_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TraceError(ErrorCode::ParseError, 0, "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_trace(buf.str());
}

void write_trace_file(const std::string& path, const std::vector<TraceEvent>& events) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidConfig, "cannot write '" + path + "'");
  out << serialize_trace(events);
}

}  // namespace ipcconfine
