#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "hri/robot/types.hpp"

namespace hri::robot {

struct SimConfig {
  Workspace workspace;
  double cube_edge = 0.037;
  // A and B sit 0.60 m apart on the table, cube resting on its face.
  Vec3 position_a{0.6, -0.3, 0.0185};
  Vec3 position_b{0.6, 0.3, 0.0185};
  double pick_tolerance = 0.02;
  double tick_rate = 50.0;
  Pose left_home{{0.4, 0.25, 0.25}, Gripper::open};
  Pose right_home{{0.4, -0.25, 0.25}, Gripper::open};
};

struct WorldState {
  Pose left;
  Pose right;
  Vec3 cube{};
  std::optional<Arm> attached;
  Vec3 position_a{};
  Vec3 position_b{};

  const Pose& arm(Arm a) const { return a == Arm::left ? left : right; }
  Pose& arm(Arm a) { return a == Arm::left ? left : right; }

  friend bool operator==(const WorldState&, const WorldState&) = default;
};

enum class SimEventKind { playback_finished, record_saved, attached, detached };

struct SimEvent {
  SimEventKind kind;
  double time = 0.0;
  std::optional<Arm> arm;

  friend bool operator==(const SimEvent&, const SimEvent&) = default;
};

/// One pose applied to an arm during playback, keyed by playback time.
struct ExecutedPose {
  double play_time = 0.0;
  Arm arm = Arm::right;
  Pose pose;

  friend bool operator==(const ExecutedPose&, const ExecutedPose&) = default;
};

struct Recording {
  Trajectory trajectory;
  bool empty = false;  // stop called with no guidance samples
};

enum class PlaybackStatus { idle, playing, paused };

class SimError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Dual-arm tabletop simulator. Owns its state; callers serialize access.
class Simulator {
 public:
  explicit Simulator(SimConfig config = {});

  const SimConfig& config() const { return config_; }
  const WorldState& world() const { return world_; }
  double clock() const { return clock_; }
  void reset();

  // Kinesthetic teaching.
  void start_recording(Arm arm);
  /// Appends a guidance pose; returns false when the sample is rejected for a
  /// non-increasing timestamp. Positions are clamped to the workspace.
  bool feed_guidance(const Pose& pose, double t);
  Recording stop_recording();
  bool recording() const { return recording_arm_.has_value(); }
  std::optional<Arm> recording_arm() const { return recording_arm_; }

  // Playback of one or more concurrent single-arm tracks.
  void play(std::vector<Trajectory> tracks);
  bool pause();
  bool resume();
  void stop();
  PlaybackStatus status() const { return status_; }
  bool busy() const { return status_ != PlaybackStatus::idle || recording(); }
  double playback_time() const { return play_time_; }
  double remaining() const;

  WorldState step(double dt);

  std::vector<SimEvent> drain_events();
  const std::vector<ExecutedPose>& executed() const { return executed_; }
  void clear_executed() { executed_.clear(); }

 private:
  void apply_pose(Arm arm, const Pose& pose);
  void update_attachment();
  void finish_playback();

  SimConfig config_;
  WorldState world_;
  double clock_ = 0.0;
  Vec3 grasp_offset_{};

  std::optional<Arm> recording_arm_;
  Trajectory recorded_;
  std::optional<double> guidance_origin_;

  PlaybackStatus status_ = PlaybackStatus::idle;
  std::vector<Trajectory> tracks_;
  double play_time_ = 0.0;
  double play_end_ = 0.0;

  std::vector<SimEvent> events_;
  std::vector<ExecutedPose> executed_;
};

}  // namespace hri::robot
