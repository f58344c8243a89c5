#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hri::robot {

using Vec3 = std::array<double, 3>;

enum class Arm { left, right };
enum class Gripper { open, closed };

std::string_view to_string(Arm arm);
std::string_view to_string(Gripper gripper);
std::optional<Arm> parse_arm(std::string_view text);
std::optional<Gripper> parse_gripper(std::string_view text);

double distance(const Vec3& a, const Vec3& b);
Vec3 lerp(const Vec3& a, const Vec3& b, double s);

/// End-effector pose. Kinematics are end-effector level only.
struct Pose {
  Vec3 position{};
  Gripper gripper = Gripper::open;

  friend bool operator==(const Pose&, const Pose&) = default;
};

struct Waypoint {
  double t = 0.0;
  Pose pose;

  friend bool operator==(const Waypoint&, const Waypoint&) = default;
};

/// A single-arm end-effector trajectory. Timestamps start at 0 and are
/// strictly increasing.
struct Trajectory {
  Arm arm = Arm::right;
  std::vector<Waypoint> waypoints;

  double duration() const { return waypoints.empty() ? 0.0 : waypoints.back().t; }
  bool empty() const { return waypoints.empty(); }

  /// Pose at time t: linear position interpolation, gripper held from the
  /// last waypoint at or before t. Exact at waypoint times.
  Pose sample(double t) const;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Throws std::invalid_argument when the timestamp invariants do not hold.
void validate(const Trajectory& trajectory);

/// Axis-aligned box. Defaults to a 1 m x 1 m x 0.5 m volume above the table.
struct Workspace {
  Vec3 min{0.0, -0.5, 0.0};
  Vec3 max{1.0, 0.5, 0.5};

  bool contains(const Vec3& p) const;
  Vec3 clamp(const Vec3& p) const;
};

}  // namespace hri::robot
