#pragma once

#include <vector>

#include "hri/robot/simulator.hpp"
#include "hri/store/task_store.hpp"

namespace hri::robot {

inline constexpr const char* kMoveAB = "MOVE_A_B";
inline constexpr const char* kAction1 = "ACTION_1";
inline constexpr const char* kAction2 = "ACTION_2";

/// Authors trajectories as a chain of timed moves and gripper changes.
class TrajectoryBuilder {
 public:
  TrajectoryBuilder(Arm arm, const Pose& start);

  TrajectoryBuilder& move_to(const Vec3& position, double duration);
  TrajectoryBuilder& grip(Gripper gripper, double dwell = 0.5);
  TrajectoryBuilder& hold(double duration);
  /// Waits until an absolute trajectory time, used to synchronize two arms.
  TrajectoryBuilder& wait_until(double t);

  double time() const { return t_; }
  Trajectory build() const { return trajectory_; }

 private:
  Trajectory trajectory_;
  Pose pose_;
  double t_ = 0.0;
};

/// Pick at `from`, place at `to`, starting and ending at the arm's home pose.
Trajectory pick_and_place(const SimConfig& config, Arm arm, const Vec3& from, const Vec3& to);

/// The three pre-recorded tasks: a right-arm move of the cube from A to B, a
/// left-arm greeting wave, and a right-to-left handover that sets the cube
/// down at B.
std::vector<store::Task> fixture_tasks(const SimConfig& config);

void load_fixture_tasks(const SimConfig& config, store::TaskStore& store);

}  // namespace hri::robot
