#include "hri/robot/fixtures.hpp"

#include <stdexcept>

namespace hri::robot {

namespace {

constexpr double kApproachHeight = 0.12;

Vec3 above(const Vec3& p, double h = kApproachHeight) { return {p[0], p[1], p[2] + h}; }

}  // namespace

TrajectoryBuilder::TrajectoryBuilder(Arm arm, const Pose& start) : pose_(start) {
  trajectory_.arm = arm;
  trajectory_.waypoints.push_back({0.0, start});
}

TrajectoryBuilder& TrajectoryBuilder::move_to(const Vec3& position, double duration) {
  if (!(duration > 0.0)) throw std::invalid_argument("move duration must be positive");
  t_ += duration;
  pose_.position = position;
  trajectory_.waypoints.push_back({t_, pose_});
  return *this;
}

TrajectoryBuilder& TrajectoryBuilder::grip(Gripper gripper, double dwell) {
  if (!(dwell > 0.0)) throw std::invalid_argument("grip dwell must be positive");
  t_ += dwell;
  pose_.gripper = gripper;
  trajectory_.waypoints.push_back({t_, pose_});
  return *this;
}

TrajectoryBuilder& TrajectoryBuilder::hold(double duration) {
  if (!(duration > 0.0)) throw std::invalid_argument("hold duration must be positive");
  t_ += duration;
  trajectory_.waypoints.push_back({t_, pose_});
  return *this;
}

TrajectoryBuilder& TrajectoryBuilder::wait_until(double t) {
  if (t > t_) hold(t - t_);
  return *this;
}

Trajectory pick_and_place(const SimConfig& config, Arm arm, const Vec3& from, const Vec3& to) {
  const Pose home = arm == Arm::left ? config.left_home : config.right_home;
  TrajectoryBuilder b(arm, home);
  b.move_to(above(from), 2.0)
      .move_to(from, 1.0)
      .grip(Gripper::closed)
      .move_to(above(from), 1.0)
      .move_to(above(to), 3.0)
      .move_to(to, 1.0)
      .grip(Gripper::open)
      .move_to(above(to), 1.0)
      .move_to(home.position, 2.0);
  return b.build();
}

std::vector<store::Task> fixture_tasks(const SimConfig& config) {
  std::vector<store::Task> tasks;

  tasks.push_back({kMoveAB, {pick_and_place(config, Arm::right, config.position_a, config.position_b)}, 0.0});

  {
    const Vec3& h = config.left_home.position;
    const Vec3 raised{h[0] + 0.05, h[1], h[2] + 0.2};
    TrajectoryBuilder wave(Arm::left, config.left_home);
    wave.move_to(raised, 1.5);
    for (int i = 0; i < 3; ++i) {
      wave.move_to({raised[0], raised[1] + 0.1, raised[2]}, 0.4)
          .move_to({raised[0], raised[1] - 0.1, raised[2]}, 0.8)
          .move_to(raised, 0.4);
    }
    wave.move_to(h, 1.5);
    tasks.push_back({kAction1, {wave.build()}, 0.0});
  }

  {
    // Right arm picks at A and presents the cube at the exchange point; the
    // left arm closes on it there, the right releases, and the left places
    // it at B.
    const Vec3 exchange{0.55, 0.0, 0.30};
    TrajectoryBuilder right(Arm::right, config.right_home);
    right.move_to(above(config.position_a), 2.0)
        .move_to(config.position_a, 1.0)
        .grip(Gripper::closed)
        .move_to(above(config.position_a), 1.0)
        .move_to(exchange, 2.0);
    const double presented = right.time();

    TrajectoryBuilder left(Arm::left, config.left_home);
    left.wait_until(presented - 2.0).move_to(exchange, 2.0).grip(Gripper::closed);
    const double grasped = left.time();

    right.wait_until(grasped + 0.5).grip(Gripper::open).move_to(config.right_home.position, 2.0);
    left.wait_until(right.time() - 2.0)
        .move_to(above(config.position_b), 2.0)
        .move_to(config.position_b, 1.0)
        .grip(Gripper::open)
        .move_to(above(config.position_b), 1.0)
        .move_to(config.left_home.position, 2.0);
    tasks.push_back({kAction2, {right.build(), left.build()}, 0.0});
  }
  return tasks;
}

void load_fixture_tasks(const SimConfig& config, store::TaskStore& store) {
  for (const auto& task : fixture_tasks(config)) store.save_task(task);
}

}  // namespace hri::robot
