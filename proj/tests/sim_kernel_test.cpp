#include <doctest.h>

#include "ipcconfine/sim_kernel.hpp"

using namespace ipcconfine;

namespace {

const IpcCategory kSection{IpcGroup::III_SharedMemory, "Section"};
const IpcCategory kMutex{IpcGroup::IV_Sync, "Mutex"};

struct World {
  Topology topo;
  ConfinementEngine engine;
  SimKernel kernel{topo, engine};
  ProcessRef host, a1, a2, b1;

  explicit World(std::vector<std::string> long_list = {"\\BaseNamedObjects\\DBWIN_BUFFER"}) {
    engine.load_long_list(long_list);
    auto v1 = topo.vm_create("10.0.0.2");
    auto v2 = topo.vm_create("10.0.0.3");
    host = topo.process_spawn(kHostVm);
    a1 = topo.process_spawn(v1);
    a2 = topo.process_spawn(v1);
    b1 = topo.process_spawn(v2);
  }
};

}  // namespace

TEST_CASE("same name in two vms gives two objects") {
  World w;
  ObjectName n("\\BaseNamedObjects\\AppMutex");
  auto x = w.kernel.create_object(w.a1.pid, n, kMutex);
  auto y = w.kernel.create_object(w.b1.pid, n, kMutex);
  REQUIRE(x.ok());
  REQUIRE(y.ok());
  CHECK(x.object_id != y.object_id);
  CHECK(x.resolution.effective_name.str() == "\\vm1\\BaseNamedObjects\\AppMutex");
  CHECK(y.resolution.effective_name.str() == "\\vm2\\BaseNamedObjects\\AppMutex");
  auto again = w.kernel.create_object(w.a2.pid, n, kMutex);
  CHECK(again.status == AccessStatus::AlreadyExists);
  CHECK_FALSE(again.handle.has_value());
}

TEST_CASE("open finds same-vm objects only") {
  World w;
  ObjectName n("\\BaseNamedObjects\\AppMutex");
  w.kernel.create_object(w.a1.pid, n, kMutex);
  CHECK(w.kernel.open_object(w.a2.pid, n, kMutex).ok());
  CHECK(w.kernel.open_object(w.b1.pid, n, kMutex).status == AccessStatus::NotFound);
  CHECK(w.kernel.open_object(w.host.pid, n, kMutex).status == AccessStatus::NotFound);
  CHECK(w.kernel.cross_vm_opens() == 0);
}

TEST_CASE("vm processes reach host objects") {
  World w;
  ObjectName n("\\BaseNamedObjects\\DBWIN_BUFFER");
  auto made = w.kernel.create_object(w.host.pid, n, kSection);
  auto got = w.kernel.open_object(w.a1.pid, n, kSection);
  REQUIRE(got.ok());
  CHECK(got.object_id == made.object_id);
  CHECK(got.resolution.route == Route::HostPassthrough);
  CHECK(w.kernel.cross_vm_opens() == 0);
  CHECK(w.kernel.lookup(n)->refcount == 2);
}

TEST_CASE("category mismatch") {
  World w;
  ObjectName n("\\BaseNamedObjects\\Thing");
  w.kernel.create_object(w.a1.pid, n, kMutex);
  CHECK(w.kernel.open_object(w.a2.pid, n, kSection).status == AccessStatus::CategoryMismatch);
  CHECK(w.kernel.open_object(w.a2.pid, n, IpcCategory{IpcGroup::IV_Sync, "Event"}).status ==
        AccessStatus::CategoryMismatch);
  CHECK(w.kernel.open_object(w.a2.pid, n, IpcCategory{IpcGroup::IV_Sync, ""}).ok());
  CHECK(w.kernel.create_object(w.a2.pid, n, kSection).status == AccessStatus::CategoryMismatch);
}

TEST_CASE("refcounts follow handles") {
  World w;
  ObjectName n("\\BaseNamedObjects\\Thing");
  auto c = w.kernel.create_object(w.a1.pid, n, kMutex);
  auto o = w.kernel.open_object(w.a2.pid, n, kMutex);
  ObjectName eff = c.resolution.effective_name;
  CHECK(w.kernel.lookup(eff)->refcount == 2);
  CHECK(w.kernel.live_handles() == 2);
  CHECK_THROWS_AS(w.kernel.close(w.a1.pid, *o.handle), Error);  // foreign handle
  w.kernel.close(w.a2.pid, *o.handle);
  CHECK_THROWS_AS(w.kernel.close(w.a2.pid, *o.handle), Error);  // double close
  CHECK(w.kernel.lookup(eff)->refcount == 1);
  w.kernel.close(w.a1.pid, *c.handle);
  CHECK_FALSE(w.kernel.lookup(eff).has_value());
  CHECK(w.kernel.live_handles() == 0);
  CHECK(w.kernel.create_object(w.a1.pid, n, kMutex).ok());
  CHECK_THROWS_AS(w.kernel.close(w.a1.pid, HandleId{999}), Error);
}

TEST_CASE("messages cross no vm border") {
  World w;
  CHECK(w.kernel.send_message(w.a1.pid, w.a2.pid, MessageKind::WindowsMessage, "hi") == Delivery::Delivered);
  CHECK(w.kernel.send_message(w.a1.pid, w.b1.pid, MessageKind::DataCopy, "x") == Delivery::Blocked);
  CHECK(w.kernel.send_message(w.host.pid, w.a1.pid, MessageKind::DDE, "x") == Delivery::Blocked);
  CHECK(w.kernel.send_message(w.a1.pid, w.host.pid, MessageKind::Clipboard, "x") == Delivery::Blocked);
  CHECK(w.kernel.inbox_size(w.a2.pid) == 1);
  CHECK(w.kernel.inbox_size(w.b1.pid) == 0);
  auto m = w.kernel.receive(w.a2.pid);
  REQUIRE(m.has_value());
  CHECK(m->payload == "hi");
  CHECK(m->sender == w.a1.pid);
  CHECK_FALSE(w.kernel.receive(w.a2.pid).has_value());
}

TEST_CASE("clipboards are per vm") {
  World w;
  w.kernel.clipboard_write(w.a1.pid, "secret");
  CHECK(w.kernel.clipboard_read(w.a2.pid) == "secret");
  CHECK_FALSE(w.kernel.clipboard_read(w.b1.pid).has_value());
  CHECK_FALSE(w.kernel.clipboard_read(w.host.pid).has_value());
}

TEST_CASE("window searches see only the caller's vm") {
  World w;
  auto wa = w.kernel.register_window(w.a1.pid, "IISWnd");
  w.kernel.register_window(w.b1.pid, "IISWnd");
  w.kernel.register_window(w.host.pid, "Shell_TrayWnd");
  auto found = w.kernel.find_window(w.a2.pid, "IISWnd");
  REQUIRE(found.has_value());
  CHECK(found->window_id == wa.window_id);
  CHECK_FALSE(w.kernel.find_window(w.a1.pid, "Shell_TrayWnd").has_value());
  CHECK_FALSE(w.kernel.find_window(w.host.pid, "IISWnd").has_value());
  auto listed = w.kernel.enumerate_windows(w.b1.pid);
  REQUIRE(listed.size() == 1);
  CHECK(listed[0].owner.vm == w.b1.vm);
  CHECK(w.kernel.send_to_window(w.b1.pid, wa.window_id, MessageKind::WindowsMessage, "") == Delivery::Blocked);
  CHECK(w.kernel.send_to_window(w.a2.pid, wa.window_id, MessageKind::WindowsMessage, "") == Delivery::Delivered);
  CHECK_THROWS_AS(w.kernel.send_to_window(w.a2.pid, 777, MessageKind::WindowsMessage, ""), Error);
}

TEST_CASE("remote threads and hooks") {
  World w;
  CHECK(w.kernel.create_remote_thread(w.a1.pid, w.a2.pid).allowed());
  CHECK_FALSE(w.kernel.create_remote_thread(w.a1.pid, w.b1.pid).allowed());
  CHECK_FALSE(w.kernel.create_remote_thread(w.host.pid, w.a1.pid).allowed());
  CHECK(w.kernel.set_hook(w.a1.pid, HookRequest::SystemWide) == HookScope{w.a1.vm});
  CHECK(w.kernel.set_hook(w.host.pid, HookRequest::SystemWide) == HookScope{kHostVm});
}

TEST_CASE("sockets bind on the vm alias") {
  World w;
  auto x = w.kernel.bind_socket(w.a1.pid, "0.0.0.0", 80);
  auto y = w.kernel.bind_socket(w.b1.pid, "0.0.0.0", 80);
  CHECK(x.effective_ip == "10.0.0.2");
  CHECK(y.effective_ip == "10.0.0.3");
  auto h = w.kernel.bind_socket(w.host.pid, "192.168.1.5", 80);
  CHECK(h.effective_ip == "192.168.1.5");
  try {
    w.kernel.bind_socket(w.a2.pid, "127.0.0.1", 80);
    FAIL("expected AddressInUse");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AddressInUse);
  }
  CHECK_THROWS_AS(w.kernel.bind_socket(w.a1.pid, "0.0.0.0", 0), Error);
  CHECK_THROWS_AS(w.kernel.bind_socket(w.a1.pid, "0.0.0.0", 65536), Error);
  CHECK_THROWS_AS(w.kernel.bind_socket(w.a1.pid, "nope", 81), Error);
  w.kernel.unbind_socket(x.binding_id);
  CHECK(w.kernel.bind_socket(w.a2.pid, "0.0.0.0", 80).effective_ip == "10.0.0.2");
  CHECK_THROWS_AS(w.kernel.unbind_socket(x.binding_id), Error);
  CHECK(w.kernel.bindings().size() == 3);
}

TEST_CASE("unknown callers are rejected") {
  World w;
  CHECK_THROWS_AS(w.kernel.create_object(Pid{99}, ObjectName("\\a"), kMutex), Error);
  CHECK_THROWS_AS(w.kernel.send_message(w.a1.pid, Pid{99}, MessageKind::DDE, ""), Error);
}
