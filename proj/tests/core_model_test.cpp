#include <doctest.h>

#include <set>
#include <thread>

#include "ipcconfine/core_model.hpp"

using namespace ipcconfine;

TEST_CASE("object names are validated") {
  CHECK(ObjectName::is_valid("\\RPC Control\\epmapper"));
  CHECK(ObjectName::is_valid("\\a"));
  CHECK_FALSE(ObjectName::is_valid(""));
  CHECK_FALSE(ObjectName::is_valid("\\"));
  CHECK_FALSE(ObjectName::is_valid("RPC Control\\epmapper"));
  CHECK_FALSE(ObjectName::is_valid("\\a\\\\b"));
  CHECK_FALSE(ObjectName::is_valid("\\a\\"));
  CHECK_THROWS_AS(ObjectName("no-separator"), Error);
  try {
    ObjectName bad("x");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidName);
  }
}

TEST_CASE("components split on the separator") {
  ObjectName n("\\Device\\NamedPipe\\epmapper");
  auto c = n.components();
  REQUIRE(c.size() == 3);
  CHECK(c[0] == "Device");
  CHECK(c[2] == "epmapper");
  CHECK(n.first_component() == "Device");
}

TEST_CASE("rename prefixes the vm tag") {
  ObjectName n("\\RPC Control\\epmapper");
  CHECK(rename(n, VmId{1}).str() == "\\vm1\\RPC Control\\epmapper");
  CHECK(rename(n, VmId{12}).str() == "\\vm12\\RPC Control\\epmapper");
  CHECK_THROWS_AS(rename(n, kHostVm), Error);
}

TEST_CASE("rename is injective across names and vms") {
  std::vector<ObjectName> names;
  for (const char* s : {"\\a", "\\a\\b", "\\b", "\\vmx\\a", "\\RPC Control\\x", "\\Global\\y", "\\a1", "\\1"})
    names.emplace_back(s);
  std::set<std::string> images;
  std::size_t count = 0;
  for (std::uint32_t vm = 1; vm <= 12; ++vm)
    for (const auto& n : names) {
      auto r = rename(n, VmId{vm});
      CHECK(r.first_component() == vm_tag(VmId{vm}));
      CHECK(is_reserved_component(r.first_component()));
      images.insert(r.str());
      ++count;
    }
  CHECK(images.size() == count);
  // A renamed name is never an original one because originals cannot start
  // with a reserved component.
  for (const auto& n : names) CHECK_FALSE(images.contains(n.str()));
}

TEST_CASE("reserved components") {
  CHECK(is_reserved_component("vm1"));
  CHECK(is_reserved_component("vm042"));
  CHECK_FALSE(is_reserved_component("vm"));
  CHECK_FALSE(is_reserved_component("vmx"));
  CHECK_FALSE(is_reserved_component("vm1a"));
  CHECK_FALSE(is_reserved_component("VM1"));
}

TEST_CASE("global names") {
  CHECK(is_global_name(ObjectName("\\BaseNamedObjects\\Global\\RotHintTable"), Scope::Local));
  CHECK(is_global_name(ObjectName("\\BaseNamedObjects\\x"), Scope::Global));
  CHECK_FALSE(is_global_name(ObjectName("\\BaseNamedObjects\\GlobalX"), Scope::Local));
  CHECK_FALSE(is_global_name(ObjectName("\\BaseNamedObjects\\x"), Scope::Local));
}

TEST_CASE("string conversions round trip") {
  for (auto g : {IpcGroup::I_Port, IpcGroup::II_PseudoFile, IpcGroup::III_SharedMemory, IpcGroup::IV_Sync,
                 IpcGroup::V_Message, IpcGroup::VI_Socket, IpcGroup::VII_Dangerous})
    CHECK(ipc_group_from_string(to_string(g)) == g);
  for (auto k : {MessageKind::WindowsMessage, MessageKind::DataCopy, MessageKind::Clipboard, MessageKind::DDE})
    CHECK(message_kind_from_string(to_string(k)) == k);
  CHECK(scope_from_string("Global") == Scope::Global);
  CHECK_FALSE(ipc_group_from_string("VIII").has_value());
  CHECK(error_code_from_string(to_string(ErrorCode::AddressInUse)) == ErrorCode::AddressInUse);
}

TEST_CASE("topology allocates vms and processes") {
  Topology t;
  auto v1 = t.vm_create("10.0.0.2");
  auto v2 = t.vm_create("10.0.0.3");
  CHECK(v1.value == 1);
  CHECK(v2.value == 2);
  CHECK(t.alias_of(v2) == "10.0.0.3");
  CHECK_THROWS_AS(t.vm_create("10.0.0.2"), Error);
  CHECK_THROWS_AS(t.vm_create("10.0.0"), Error);
  CHECK_THROWS_AS(t.alias_of(kHostVm), Error);

  auto host = t.process_spawn(kHostVm);
  auto p = t.process_spawn(v1);
  CHECK(host.vm.is_host());
  CHECK(t.vm_of(p.pid) == v1);
  CHECK(t.process(p.pid) == p);
  CHECK_THROWS_AS(t.process_spawn(VmId{9}), Error);
  CHECK_THROWS_AS(t.process(Pid{99}), Error);
  CHECK(t.vms().size() == 2);
  CHECK(t.processes().size() == 2);
}

TEST_CASE("concurrent spawns get distinct pids") {
  Topology t;
  auto vm = t.vm_create("10.1.0.1");
  std::vector<std::thread> threads;
  std::vector<std::vector<std::uint32_t>> got(4);
  for (int i = 0; i < 4; ++i)
    threads.emplace_back([&, i] {
      for (int k = 0; k < 250; ++k) got[i].push_back(t.process_spawn(vm).pid.value);
    });
  for (auto& th : threads) th.join();
  std::set<std::uint32_t> all;
  for (auto& g : got) all.insert(g.begin(), g.end());
  CHECK(all.size() == 1000);
}
