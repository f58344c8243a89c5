#pragma once

#include "hri/robot/simulator.hpp"
#include "hri/store/task_store.hpp"

namespace hri::fsm {

/// What the interaction logic needs from a robot. Implemented by the
/// simulator adapter and by test doubles.
class RobotPort {
 public:
  virtual ~RobotPort() = default;

  virtual void start_recording(robot::Arm arm) = 0;
  virtual robot::Recording stop_recording() = 0;
  virtual bool recording() const = 0;

  /// Returns false when the robot is busy.
  virtual bool play(const store::Task& task) = 0;
  virtual bool busy() const = 0;
  virtual void pause() = 0;
  virtual void resume() = 0;
  virtual void stop() = 0;
};

class SimulatorPort : public RobotPort {
 public:
  explicit SimulatorPort(robot::Simulator& sim) : sim_(sim) {}

  void start_recording(robot::Arm arm) override { sim_.start_recording(arm); }
  robot::Recording stop_recording() override { return sim_.stop_recording(); }
  bool recording() const override { return sim_.recording(); }

  bool play(const store::Task& task) override;
  bool busy() const override { return sim_.busy(); }
  void pause() override { sim_.pause(); }
  void resume() override { sim_.resume(); }
  void stop() override { sim_.stop(); }

 private:
  robot::Simulator& sim_;
};

}  // namespace hri::fsm
