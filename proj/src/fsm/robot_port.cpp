#include "hri/fsm/robot_port.hpp"

namespace hri::fsm {

bool SimulatorPort::play(const store::Task& task) {
  if (sim_.busy()) return false;
  sim_.play(task.tracks);
  return true;
}

}  // namespace hri::fsm
