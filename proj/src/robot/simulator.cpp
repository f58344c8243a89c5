#include "hri/robot/simulator.hpp"

#include <algorithm>
#include <limits>

namespace hri::robot {

Simulator::Simulator(SimConfig config) : config_(std::move(config)) { reset(); }

void Simulator::reset() {
  world_ = WorldState{};
  world_.left = config_.left_home;
  world_.right = config_.right_home;
  world_.cube = config_.position_a;
  world_.position_a = config_.position_a;
  world_.position_b = config_.position_b;
  clock_ = 0.0;
  grasp_offset_ = {};
  recording_arm_.reset();
  recorded_ = {};
  guidance_origin_.reset();
  status_ = PlaybackStatus::idle;
  tracks_.clear();
  play_time_ = 0.0;
  play_end_ = 0.0;
  events_.clear();
  executed_.clear();
}

void Simulator::start_recording(Arm arm) {
  if (recording()) throw SimError("already recording");
  if (status_ != PlaybackStatus::idle) throw SimError("cannot record during playback");
  recording_arm_ = arm;
  recorded_ = Trajectory{arm, {}};
  guidance_origin_.reset();
}

bool Simulator::feed_guidance(const Pose& pose, double t) {
  if (!recording_arm_) throw SimError("guidance received while not recording");
  if (!guidance_origin_) guidance_origin_ = t;
  const double rebased = t - *guidance_origin_;
  if (!recorded_.waypoints.empty() && !(rebased > recorded_.waypoints.back().t)) {
    return false;
  }
  Pose clamped{config_.workspace.clamp(pose.position), pose.gripper};
  recorded_.waypoints.push_back({rebased, clamped});
  apply_pose(*recording_arm_, clamped);
  update_attachment();
  return true;
}

Recording Simulator::stop_recording() {
  if (!recording_arm_) throw SimError("not recording");
  Recording out{std::move(recorded_), false};
  out.empty = out.trajectory.waypoints.empty();
  events_.push_back({SimEventKind::record_saved, clock_, recording_arm_});
  recording_arm_.reset();
  recorded_ = {};
  guidance_origin_.reset();
  return out;
}

void Simulator::play(std::vector<Trajectory> tracks) {
  if (busy()) throw SimError("play rejected: simulator busy");
  for (const auto& track : tracks) validate(track);
  std::erase_if(tracks, [](const Trajectory& tr) { return tr.empty(); });

  tracks_ = std::move(tracks);
  play_time_ = 0.0;
  play_end_ = 0.0;
  for (const auto& track : tracks_) play_end_ = std::max(play_end_, track.duration());

  if (tracks_.empty()) {
    events_.push_back({SimEventKind::playback_finished, clock_, std::nullopt});
    return;
  }
  status_ = PlaybackStatus::playing;
  // The first waypoint is applied immediately so playback starts from the
  // recorded initial pose.
  for (const auto& track : tracks_) {
    const Pose& first = track.waypoints.front().pose;
    apply_pose(track.arm, first);
    executed_.push_back({0.0, track.arm, first});
  }
  update_attachment();
  if (play_end_ == 0.0) finish_playback();
}

bool Simulator::pause() {
  if (status_ != PlaybackStatus::playing) return false;
  status_ = PlaybackStatus::paused;
  return true;
}

bool Simulator::resume() {
  if (status_ != PlaybackStatus::paused) return false;
  status_ = PlaybackStatus::playing;
  return true;
}

void Simulator::stop() {
  status_ = PlaybackStatus::idle;
  tracks_.clear();
  play_time_ = 0.0;
  play_end_ = 0.0;
}

double Simulator::remaining() const {
  if (status_ == PlaybackStatus::idle) return 0.0;
  return std::max(0.0, play_end_ - play_time_);
}

WorldState Simulator::step(double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step requires dt > 0");
  clock_ += dt;
  if (status_ != PlaybackStatus::playing) return world_;

  const double from = play_time_;
  const double to = std::min(play_time_ + dt, play_end_);

  // Visit every waypoint crossed in (from, to] so that results do not depend
  // on the tick rate at waypoint granularity.
  std::vector<double> marks;
  for (const auto& track : tracks_) {
    for (const auto& w : track.waypoints) {
      if (w.t > from && w.t <= to) marks.push_back(w.t);
    }
  }
  marks.push_back(to);
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());

  for (double mark : marks) {
    for (const auto& track : tracks_) {
      const Pose pose = track.sample(mark);
      apply_pose(track.arm, pose);
      executed_.push_back({mark, track.arm, pose});
    }
    update_attachment();
  }
  play_time_ = to;
  if (play_time_ >= play_end_) finish_playback();
  return world_;
}

std::vector<SimEvent> Simulator::drain_events() {
  std::vector<SimEvent> out;
  out.swap(events_);
  return out;
}

void Simulator::apply_pose(Arm arm, const Pose& pose) {
  world_.arm(arm) = Pose{config_.workspace.clamp(pose.position), pose.gripper};
}

void Simulator::update_attachment() {
  if (world_.attached) {
    const Pose& holder = world_.arm(*world_.attached);
    world_.cube = {holder.position[0] + grasp_offset_[0], holder.position[1] + grasp_offset_[1],
                   holder.position[2] + grasp_offset_[2]};
    if (holder.gripper == Gripper::open) {
      events_.push_back({SimEventKind::detached, clock_, world_.attached});
      world_.attached.reset();
    }
  }
  if (world_.attached) return;

  std::optional<Arm> best;
  double best_distance = std::numeric_limits<double>::infinity();
  for (Arm arm : {Arm::right, Arm::left}) {
    const Pose& p = world_.arm(arm);
    if (p.gripper != Gripper::closed) continue;
    const double d = distance(p.position, world_.cube);
    if (d <= config_.pick_tolerance && d < best_distance) {
      best = arm;
      best_distance = d;
    }
  }
  if (best) {
    const Vec3& g = world_.arm(*best).position;
    grasp_offset_ = {world_.cube[0] - g[0], world_.cube[1] - g[1], world_.cube[2] - g[2]};
    world_.attached = best;
    events_.push_back({SimEventKind::attached, clock_, best});
  }
}

void Simulator::finish_playback() {
  status_ = PlaybackStatus::idle;
  tracks_.clear();
  events_.push_back({SimEventKind::playback_finished, clock_, std::nullopt});
}

}  // namespace hri::robot
