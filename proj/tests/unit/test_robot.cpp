#include <random>

#include "doctest.h"
#include "hri/robot/fixtures.hpp"
#include "hri/robot/simulator.hpp"

using namespace hri;
using namespace hri::robot;

namespace {

std::vector<ExecutedPose> play_through(Simulator& sim, std::vector<Trajectory> tracks, double dt = 0.02) {
  sim.play(std::move(tracks));
  while (sim.busy()) sim.step(dt);
  return sim.executed();
}

std::vector<SimEvent> events_of(std::vector<SimEvent> all, SimEventKind a, SimEventKind b) {
  std::erase_if(all, [&](const SimEvent& e) { return e.kind != a && e.kind != b; });
  return all;
}

}  // namespace

TEST_CASE("world geometry") {
  const SimConfig cfg;
  CHECK(distance(cfg.position_a, cfg.position_b) == doctest::Approx(0.60).epsilon(1e-12));
  CHECK(cfg.cube_edge == 0.037);
  CHECK(cfg.pick_tolerance == 0.02);
  Simulator sim;
  CHECK(sim.world().cube == cfg.position_a);
  CHECK(Workspace{}.contains(cfg.position_a));
  CHECK(Workspace{}.clamp({2.0, -1.0, 0.25}) == Vec3{1.0, -0.5, 0.25});
}

TEST_CASE("trajectory sampling and validation") {
  Trajectory tr{Arm::left, {{0.0, {{0, 0, 0}, Gripper::open}}, {1.0, {{1, 0, 0}, Gripper::closed}}}};
  CHECK(tr.sample(0.5).position == Vec3{0.5, 0, 0});
  CHECK(tr.sample(0.5).gripper == Gripper::open);
  CHECK(tr.sample(1.0).gripper == Gripper::closed);
  CHECK(tr.sample(5.0).position == Vec3{1, 0, 0});
  CHECK_NOTHROW(validate(tr));
  tr.waypoints[0].t = 0.1;
  CHECK_THROWS_AS(validate(tr), std::invalid_argument);
  tr.waypoints[0].t = 0.0;
  tr.waypoints[1].t = 0.0;
  CHECK_THROWS_AS(validate(tr), std::invalid_argument);
}

TEST_CASE("guidance is recorded verbatim with rebased timestamps") {
  Simulator sim;
  sim.start_recording(Arm::right);
  const std::vector<Pose> poses{{{0.5, 0.0, 0.2}, Gripper::open},
                                {{0.55, 0.05, 0.2}, Gripper::open},
                                {{0.6, 0.1, 0.15}, Gripper::closed}};
  CHECK(sim.feed_guidance(poses[0], 10.0));
  CHECK(sim.feed_guidance(poses[1], 10.1));
  CHECK_FALSE(sim.feed_guidance(poses[1], 10.1));
  CHECK(sim.feed_guidance(poses[2], 10.2));
  CHECK(sim.world().right == poses[2]);
  const auto rec = sim.stop_recording();
  CHECK_FALSE(rec.empty);
  REQUIRE(rec.trajectory.waypoints.size() == 3);
  CHECK(rec.trajectory.waypoints[0].t == 0.0);
  for (std::size_t i = 0; i < 3; ++i) CHECK(rec.trajectory.waypoints[i].pose == poses[i]);
  CHECK(sim.drain_events() == std::vector<SimEvent>{{SimEventKind::record_saved, 0.0, Arm::right}});
}

TEST_CASE("recording misuse") {
  Simulator sim;
  CHECK_THROWS_AS(sim.feed_guidance({}, 0.0), SimError);
  CHECK_THROWS_AS(sim.stop_recording(), SimError);
  sim.start_recording(Arm::left);
  CHECK_THROWS_AS(sim.start_recording(Arm::left), SimError);
  const auto rec = sim.stop_recording();
  CHECK(rec.empty);
  CHECK(rec.trajectory.waypoints.empty());
}

TEST_CASE("playback of a just-recorded trajectory reproduces the guidance") {
  Simulator sim;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> coord(0.1, 0.4), gap(0.03, 0.3);
  sim.start_recording(Arm::right);
  double t = 3.0;
  std::vector<Pose> poses;
  for (int i = 0; i < 40; ++i) {
    Pose p{{coord(rng), coord(rng) - 0.25, coord(rng)}, i % 7 < 3 ? Gripper::open : Gripper::closed};
    poses.push_back(p);
    sim.feed_guidance(p, t);
    t += gap(rng);
  }
  const auto rec = sim.stop_recording();
  sim.clear_executed();
  const auto executed = play_through(sim, {rec.trajectory});
  for (const auto& w : rec.trajectory.waypoints) {
    const auto it = std::find_if(executed.begin(), executed.end(),
                                 [&](const ExecutedPose& e) { return e.play_time == w.t; });
    REQUIRE(it != executed.end());
    CHECK(it->pose == w.pose);
  }
  std::size_t k = 0;
  for (const auto& e : executed) {
    if (k < poses.size() && e.pose == poses[k]) ++k;
  }
  CHECK(k == poses.size());
}

TEST_CASE("pause and resume do not change the executed pose sequence") {
  const SimConfig cfg;
  const auto tr = pick_and_place(cfg, Arm::right, cfg.position_a, cfg.position_b);
  Simulator plain;
  const auto reference = play_through(plain, {tr});

  Simulator paused;
  paused.play({tr});
  int ticks = 0;
  while (paused.busy()) {
    if (ticks == 50) {
      CHECK(paused.pause());
      CHECK_FALSE(paused.pause());
      for (int i = 0; i < 250; ++i) paused.step(0.02);  // 5 s frozen
      CHECK(paused.resume());
      CHECK_FALSE(paused.resume());
    }
    paused.step(0.02);
    ++ticks;
  }
  CHECK(paused.executed() == reference);
  CHECK(paused.world() == plain.world());
}

TEST_CASE("attachment follows the pick tolerance") {
  SimConfig cfg;
  Simulator sim(cfg);
  Vec3 near = cfg.position_a;
  near[2] += 0.01;
  Trajectory grab{Arm::right,
                  {{0.0, {near, Gripper::open}}, {0.5, {near, Gripper::closed}}, {1.5, {{0.6, 0.0, 0.2}, Gripper::closed}},
                   {2.0, {{0.6, 0.0, 0.2}, Gripper::open}}, {3.0, {{0.5, -0.2, 0.3}, Gripper::open}}}};
  sim.play({grab});
  while (sim.playback_time() < 0.6) sim.step(0.02);
  CHECK(sim.world().attached == Arm::right);
  while (sim.busy()) sim.step(0.02);
  CHECK_FALSE(sim.world().attached.has_value());
  CHECK(distance(sim.world().cube, {0.6, 0.0, 0.2 - 0.01 + 0.0}) < 1e-9);

  Simulator far(cfg);
  Vec3 off = cfg.position_a;
  off[2] += 0.025;
  far.play({Trajectory{Arm::left, {{0.0, {off, Gripper::open}}, {0.5, {off, Gripper::closed}}}}});
  while (far.busy()) far.step(0.02);
  CHECK_FALSE(far.world().attached.has_value());
}

TEST_CASE("fixtures: MOVE_A_B carries the cube to B") {
  const SimConfig cfg;
  auto store = store::TaskStore::in_memory();
  load_fixture_tasks(cfg, store);
  CHECK(store.list_tasks() == std::vector<std::string>{"ACTION_1", "ACTION_2", "MOVE_A_B"});
  Simulator sim(cfg);
  play_through(sim, store.load_task(kMoveAB).tracks);
  CHECK(distance(sim.world().cube, cfg.position_b) < 0.01);
  CHECK_FALSE(sim.world().attached.has_value());
}

TEST_CASE("fixtures: ACTION_1 waves without touching the cube") {
  const SimConfig cfg;
  const auto tasks = fixture_tasks(cfg);
  Simulator sim(cfg);
  play_through(sim, tasks[1].tracks);
  CHECK(tasks[1].name == kAction1);
  CHECK(sim.world().cube == cfg.position_a);
  CHECK(events_of(sim.drain_events(), SimEventKind::attached, SimEventKind::detached).empty());
}

TEST_CASE("fixtures: ACTION_2 hands the cube from right to left exactly once") {
  const SimConfig cfg;
  const auto tasks = fixture_tasks(cfg);
  REQUIRE(tasks[2].name == kAction2);
  REQUIRE(tasks[2].tracks.size() == 2);
  Simulator sim(cfg);
  play_through(sim, tasks[2].tracks);
  const auto ev = events_of(sim.drain_events(), SimEventKind::attached, SimEventKind::detached);
  REQUIRE(ev.size() == 4);
  CHECK((ev[0].kind == SimEventKind::attached && ev[0].arm == Arm::right));
  CHECK((ev[1].kind == SimEventKind::detached && ev[1].arm == Arm::right));
  CHECK((ev[2].kind == SimEventKind::attached && ev[2].arm == Arm::left));
  CHECK((ev[3].kind == SimEventKind::detached && ev[3].arm == Arm::left));
}

TEST_CASE("empty playback finishes immediately and play while busy is rejected") {
  Simulator sim;
  sim.play({});
  CHECK_FALSE(sim.busy());
  CHECK(sim.drain_events().size() == 1);
  const SimConfig cfg;
  sim.play({pick_and_place(cfg, Arm::right, cfg.position_a, cfg.position_b)});
  CHECK_THROWS_AS(sim.play({}), SimError);
  CHECK_THROWS_AS(sim.start_recording(Arm::left), SimError);
  sim.stop();
  CHECK_FALSE(sim.busy());
  sim.step(1.0);
  CHECK(sim.drain_events().empty());
}

TEST_CASE("idle stepping leaves the world unchanged and runs are deterministic") {
  Simulator sim;
  const auto before = sim.world();
  for (int i = 0; i < 100; ++i) sim.step(0.02);
  CHECK(sim.world() == before);

  const SimConfig cfg;
  const auto tasks = fixture_tasks(cfg);
  Simulator a(cfg), b(cfg);
  for (const auto& t : tasks) {
    play_through(a, t.tracks, 0.013);
    play_through(b, t.tracks, 0.013);
  }
  CHECK(a.executed() == b.executed());
  CHECK(a.world() == b.world());
}
