#pragma once

#include <string>
#include <vector>

#include "hri/fsm/machine.hpp"
#include "hri/fsm/robot_port.hpp"
#include "hri/robot/fixtures.hpp"
#include "hri/robot/simulator.hpp"
#include "hri/store/task_store.hpp"

namespace hri::test {

/// In-memory store, simulator and a machine built over them.
struct Rig {
  explicit Rig(bool fixtures = true)
      : store(store::TaskStore::in_memory()),
        port(sim),
        machine(make(store, sim, port, fixtures)) {}

  static fsm::Machine make(store::TaskStore& store, robot::Simulator& sim, fsm::SimulatorPort& port,
                           bool fixtures) {
    if (fixtures) robot::load_fixture_tasks(sim.config(), store);
    return fsm::build_interface_fsm(store, port);
  }

  /// Steps the simulator until idle, forwarding completion events.
  void settle(double limit = 120.0) {
    const double dt = 1.0 / sim.config().tick_rate;
    for (double t = 0.0; t < limit; t += dt) {
      sim.step(dt);
      for (const auto& e : sim.drain_events()) {
        if (e.kind == robot::SimEventKind::playback_finished) {
          machine.system_transition(fsm::SystemTrigger::playback_finished);
        }
      }
      if (!sim.busy()) return;
    }
  }

  void signal(int slot) { machine.dispatch_signal(fsm::make_signal(slot)); }

  store::TaskStore store;
  robot::Simulator sim;
  fsm::SimulatorPort port;
  fsm::Machine machine;
};

inline std::size_t option_index(const fsm::GuiStateSnapshot& snap, const std::string& id) {
  for (std::size_t i = 0; i < snap.option_ids.size(); ++i) {
    if (snap.option_ids[i] == id) return i;
  }
  throw std::out_of_range("no option " + id + " in " + snap.state);
}

}  // namespace hri::test
