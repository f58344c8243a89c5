#include "hri/robot/types.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hri::robot {

std::string_view to_string(Arm arm) { return arm == Arm::left ? "left" : "right"; }

std::string_view to_string(Gripper gripper) {
  return gripper == Gripper::open ? "open" : "closed";
}

std::optional<Arm> parse_arm(std::string_view text) {
  if (text == "left") return Arm::left;
  if (text == "right") return Arm::right;
  return std::nullopt;
}

std::optional<Gripper> parse_gripper(std::string_view text) {
  if (text == "open") return Gripper::open;
  if (text == "closed") return Gripper::closed;
  return std::nullopt;
}

double distance(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

Vec3 lerp(const Vec3& a, const Vec3& b, double s) {
  return {a[0] + (b[0] - a[0]) * s, a[1] + (b[1] - a[1]) * s, a[2] + (b[2] - a[2]) * s};
}

Pose Trajectory::sample(double t) const {
  if (waypoints.empty()) throw std::logic_error("sample of empty trajectory");
  if (t <= waypoints.front().t) return waypoints.front().pose;
  if (t >= waypoints.back().t) return waypoints.back().pose;

  // first waypoint strictly after t
  auto next = std::upper_bound(waypoints.begin(), waypoints.end(), t,
                               [](double value, const Waypoint& w) { return value < w.t; });
  auto prev = std::prev(next);
  if (prev->t == t) return prev->pose;

  const double s = (t - prev->t) / (next->t - prev->t);
  return Pose{lerp(prev->pose.position, next->pose.position, s), prev->pose.gripper};
}

void validate(const Trajectory& trajectory) {
  const auto& w = trajectory.waypoints;
  if (w.empty()) return;
  if (w.front().t != 0.0) throw std::invalid_argument("trajectory must start at t = 0");
  for (std::size_t i = 1; i < w.size(); ++i) {
    if (!(w[i].t > w[i - 1].t)) {
      throw std::invalid_argument("trajectory timestamps must be strictly increasing");
    }
  }
}

bool Workspace::contains(const Vec3& p) const {
  for (int i = 0; i < 3; ++i) {
    if (p[i] < min[i] || p[i] > max[i]) return false;
  }
  return true;
}

Vec3 Workspace::clamp(const Vec3& p) const {
  return {std::clamp(p[0], min[0], max[0]), std::clamp(p[1], min[1], max[1]),
          std::clamp(p[2], min[2], max[2])};
}

}  // namespace hri::robot
