#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "hri/analytics/analytics.hpp"
#include "hri/bus/server.hpp"
#include "hri/harness/harness.hpp"
#include "hri/harness/live.hpp"
#include "common/rig.hpp"

using namespace hri;
using namespace hri::harness;
using namespace std::chrono_literals;

namespace {

fsm::GuiStateSnapshot menu(std::size_t options, std::size_t selector) {
  fsm::GuiStateSnapshot s;
  s.state = "m";
  s.options.assign(options, "o");
  s.option_ids.assign(options, "o");
  s.selector = selector;
  return s;
}

/// Shortest signal count that selects `target`, by breadth-first search over
/// selector positions with saturating moves.
std::size_t shortest_selection(std::size_t n, std::size_t selector, std::size_t target) {
  std::map<std::size_t, std::size_t> dist{{selector, 0}};
  std::deque<std::size_t> queue{selector};
  while (!queue.empty()) {
    const std::size_t s = queue.front();
    queue.pop_front();
    if (s == target) return dist[s] + 1;
    for (std::size_t next : {s + 1 < n ? s + 1 : s, s > 0 ? s - 1 : s}) {
      if (!dist.contains(next)) {
        dist[next] = dist[s] + 1;
        queue.push_back(next);
      }
    }
  }
  return 0;
}

/// Fixtures that finish as soon as they start.
Scenario instant_scenario() {
  Scenario s;
  for (const char* name : {robot::kMoveAB, robot::kAction1, robot::kAction2}) s.fixtures.push_back({name, {}, 0.0});
  s.guidance_min = 10.0;
  s.guidance_max = 10.0;
  return s;
}

VirtualUserModel exact_user(Modality m) {
  VirtualUserModel u;
  u.modality = m;
  u.touch = {0.7, 0.0};
  u.gesture = {0.7, 0.0};
  u.decision = {0.5, 0.0};
  u.recognizer = gesture::StochasticRecognizerModel::perfect();
  return u;
}

std::size_t planned_length(const fsm::GuiStateSnapshot& snap, const std::string& id) {
  return plan_signal_sequence(snap, test::option_index(snap, id)).size();
}

}  // namespace

TEST_CASE("planner examples") {
  CHECK(plan_signal_sequence(menu(4, 0), 0) == std::vector<fsm::Signal>{{1, 0.0}});
  CHECK(plan_signal_sequence(menu(4, 0), 2) == std::vector<fsm::Signal>{{2, 0.0}, {2, 0.0}, {1, 0.0}});
  CHECK(plan_signal_sequence(menu(4, 2), 0) == std::vector<fsm::Signal>{{3, 0.0}, {3, 0.0}, {1, 0.0}});
  CHECK_THROWS_AS(plan_signal_sequence(menu(4, 0), 4), std::invalid_argument);
  auto action = menu(0, 0);
  action.kind = fsm::StateKind::action;
  CHECK_THROWS_AS(plan_signal_sequence(action, 0), std::invalid_argument);
}

TEST_CASE("planned sequences are optimal on menus of up to eight options") {
  for (std::size_t n = 1; n <= 8; ++n) {
    for (std::size_t sel = 0; sel < n; ++sel) {
      for (std::size_t target = 0; target < n; ++target) {
        const auto plan = plan_signal_sequence(menu(n, sel), target);
        CHECK(plan.size() == shortest_selection(n, sel, target));
        CHECK(plan.size() == (target > sel ? target - sel : sel - target) + 1);
        // Simulating the plan lands on the target.
        std::size_t s = sel;
        for (std::size_t i = 0; i + 1 < plan.size(); ++i) s = plan[i].slot == 2 ? std::min(s + 1, n - 1) : (s ? s - 1 : 0);
        CHECK(s == target);
        CHECK(plan.back().slot == 1);
      }
    }
  }
}

TEST_CASE("zero-jitter touchscreen session has closed-form durations") {
  const auto log = run_session(instant_scenario(), exact_user(Modality::touchscreen), 1);
  const double input = 0.5 + 0.7;
  REQUIRE(log.completed_all());
  // playback, task; back, record, new, stop; back, macro, slot:1, task, slot:2, task, run, g1, g2;
  // stop, back, sequence, add, task, add, task, run.
  CHECK(log.tasks[0].inputs == 2);
  CHECK(log.tasks[1].inputs == 4);
  CHECK(log.tasks[2].inputs == 9);
  CHECK(log.tasks[3].inputs == 8);
  CHECK(log.tasks[0].duration == doctest::Approx(2 * input).epsilon(1e-12));
  CHECK(log.tasks[1].duration == doctest::Approx(4 * input + 10.0).epsilon(1e-12));
  // The recorded demonstration is replayed by the robot in task 3.
  CHECK(log.tasks[2].duration == doctest::Approx(9 * input + 10.0).epsilon(1e-12));
  CHECK(log.tasks[3].duration == doctest::Approx(8 * input).epsilon(1e-12));
  CHECK(log.elapsed == doctest::Approx(23 * input + 20.0).epsilon(1e-12));
}

TEST_CASE("with robot motion the durations add the fixture run times") {
  Scenario s;
  s.guidance_min = s.guidance_max = 10.0;
  const auto log = run_session(s, exact_user(Modality::touchscreen), 1);
  const auto fixtures = robot::fixture_tasks(s.sim);
  CHECK(log.tasks[0].duration == doctest::Approx(2 * 1.2 + fixtures[0].duration()).epsilon(1e-9));
  CHECK(log.tasks[3].duration ==
        doctest::Approx(8 * 1.2 + fixtures[1].duration() + fixtures[2].duration()).epsilon(1e-9));
}

TEST_CASE("perfect gestures differ from touch only by the planned sequence lengths") {
  Scenario s;
  s.guidance_min = s.guidance_max = 10.0;
  const auto touch = run_session(s, exact_user(Modality::touchscreen), 3);
  const auto gesture = run_session(s, exact_user(Modality::gesture), 3);

  test::Rig rig;
  const std::size_t to_playback = planned_length(rig.machine.snapshot(), "playback");
  rig.machine.dispatch_event({fsm::states::kPlaybackMenu, {}});
  const std::size_t to_task = planned_length(rig.machine.snapshot(), "task:MOVE_A_B");
  CHECK(gesture.tasks[0].inputs == to_playback + to_task);
  CHECK(gesture.tasks[0].duration - touch.tasks[0].duration ==
        doctest::Approx(double(to_playback + to_task - 2) * 1.2).epsilon(1e-9));
  CHECK(gesture.tasks[0].gesture_misses == 0);
}

TEST_CASE("gesture sessions never need fewer inputs than touch sessions") {
  Scenario s;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto touch = run_session(s, exact_user(Modality::touchscreen), seed);
    const auto gesture = run_session(s, exact_user(Modality::gesture), seed);
    for (std::size_t k = 0; k < 4; ++k) {
      CHECK(gesture.tasks[k].inputs >= touch.tasks[k].inputs);
      CHECK(gesture.tasks[k].duration >= touch.tasks[k].duration);
    }
  }
}

TEST_CASE("elapsed 310 s after task 3 stops the session before task 4") {
  // Tasks 1-3 take 15 inputs, 10 s of guidance and 10 s replaying it.
  auto user = exact_user(Modality::touchscreen);
  user.decision.mean = 290.0 / 15.0 - 0.7;
  const auto log = run_session(instant_scenario(), user, 1);
  CHECK(log.tasks[0].completed);
  CHECK(log.tasks[1].completed);
  CHECK(log.tasks[2].completed);
  CHECK_FALSE(log.tasks[3].attempted);
  CHECK_FALSE(log.tasks[3].completed);
  CHECK(log.elapsed == doctest::Approx(310.0).epsilon(1e-12));
}

TEST_CASE("the soft limit never truncates a task in progress") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> limit(10.0, 400.0);
  VirtualUserModel user;
  user.modality = Modality::gesture;
  for (int i = 0; i < 30; ++i) {
    Scenario s;
    s.soft_limit = limit(rng);
    const auto log = run_session(s, user, static_cast<std::uint64_t>(i));
    double clock = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      if (!log.tasks[k].attempted) {
        CHECK(clock >= s.soft_limit);
        break;
      }
      CHECK(clock < s.soft_limit);
      CHECK(log.tasks[k].completed);
      clock += log.tasks[k].duration;
    }
    CHECK(log.elapsed == doctest::Approx(clock).epsilon(1e-12));
  }
}

TEST_CASE("missing fixtures are a startup error") {
  Scenario s;
  s.fixtures.push_back({"OTHER", {}, 0.0});
  CHECK_THROWS_AS(run_session(s, VirtualUserModel{}, 1), StartupError);
}

TEST_CASE("studies are deterministic for a master seed") {
  StudyConfig cfg;
  cfg.sessions = 4;
  const auto a = run_study(cfg);
  const auto b = run_study(cfg);
  CHECK(a == b);
  REQUIRE(a.size() == 8);
  CHECK(a.front().modality == Modality::gesture);
  CHECK(a.back().modality == Modality::touchscreen);
  cfg.seed = 2;
  CHECK(run_study(cfg) != a);
  CHECK(session_seed(1, Modality::gesture, 0) != session_seed(1, Modality::touchscreen, 0));
  CHECK(session_seed(1, Modality::gesture, 3) == session_seed(1, Modality::gesture, 3));
}

TEST_CASE("recorded demonstrations vary between participants") {
  StudyConfig cfg;
  cfg.sessions = 10;
  cfg.modalities = {Modality::touchscreen};
  const auto logs = run_study(cfg);
  std::set<double> durations;
  for (const auto& l : logs) durations.insert(l.tasks[1].duration);
  CHECK(durations.size() == logs.size());
}

TEST_CASE("gesture attempts per command average 1/p") {
  for (double p : {0.4, 0.7}) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(p * 100));
    const auto model = gesture::StochasticRecognizerModel::with_recall(p);
    std::size_t attempts = 0;
    const std::size_t commands = 10'000;
    for (std::size_t c = 0; c < commands; ++c) {
      do {
        ++attempts;
      } while (!gesture::stochastic_recognize(gesture::GestureLabel::G2, model, rng));
    }
    CHECK(std::abs(double(attempts) / double(commands) - 1.0 / p) <= 0.05 / p);
  }

  // The same holds for the commands virtual participants issue.
  VirtualUserModel user;
  user.modality = Modality::gesture;
  user.recognizer = gesture::StochasticRecognizerModel::with_recall(0.5);
  Scenario s;
  s.soft_limit = 1e9;
  std::uint64_t detected = 0, missed = 0;
  for (std::uint64_t seed = 1; detected < 10'000; ++seed) {
    const auto log = run_session(s, user, seed);
    for (const auto& t : log.tasks) {
      detected += t.inputs;
      missed += t.gesture_misses;
    }
  }
  CHECK(std::abs(double(detected + missed) / double(detected) - 2.0) <= 0.1);
}

TEST_CASE("median gap skips tasks without samples in both modalities") {
  std::vector<SessionLog> logs(3);
  logs[0].modality = Modality::gesture;
  logs[0].tasks[0] = {true, true, 30.0, 1, 0};
  logs[1].modality = Modality::touchscreen;
  logs[1].tasks[0] = {true, true, 10.0, 1, 0};
  logs[1].tasks[1] = {true, true, 5.0, 1, 0};
  logs[2].modality = Modality::touchscreen;
  logs[2].tasks[0] = {true, true, 20.0, 1, 0};
  CHECK(*median_gap(logs, {0, 1, 2, 3}) == 15.0);
  CHECK_FALSE(median_gap(logs, {1}).has_value());
}

TEST_CASE("study configuration files") {
  const auto cfg = parse_study_config(R"({
    "sessions": 7, "seed": 9, "modalities": ["touchscreen"],
    "user": {"touch": {"mean": 0.9, "jitter": 0.1}, "recognizer": {"recall": [0.5, 0.6, 0.7, 0.8], "latency": [0.0, 0.2]}},
    "scenario": {"soft_limit": 200, "guidance": [9, 12]},
    "serve": {"port": 9000}
  })");
  CHECK(cfg.sessions == 7);
  CHECK(cfg.seed == 9);
  CHECK(cfg.modalities == std::vector<Modality>{Modality::touchscreen});
  CHECK(cfg.user.touch.mean == 0.9);
  CHECK(cfg.user.recognizer.recall[3] == 0.8);
  CHECK(cfg.user.recognizer.latency_max == 0.2);
  CHECK(cfg.scenario.soft_limit == 200.0);
  CHECK(cfg.scenario.guidance_max == 12.0);
  CHECK(parse_study_config(R"({"user": {"recognizer": {"recall": 0.3}}})").user.recognizer.recall[1] == 0.3);
  CHECK_THROWS_WITH_AS(parse_study_config(R"({"user": {"speed": 1}})"), doctest::Contains("user.speed"),
                       std::invalid_argument);
  CHECK_THROWS_AS(parse_study_config(R"({"user": {"recognizer": {"recall": 1.5}}})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_study_config("{not json"), std::invalid_argument);
}

TEST_CASE("the interaction core answers a console press with a gui snapshot") {
  auto store = store::TaskStore::in_memory();
  robot::load_fixture_tasks(robot::SimConfig{}, store);
  ScriptedRobot robot;
  InteractionCore core(store, robot);
  bus::Producer console("console");

  auto out = core.consume(console.make(bus::TouchMessage{1, std::nullopt}, 0.5));
  REQUIRE(out.size() == 1);
  const auto& gui = std::get<bus::GuiPayload>(out[0]);
  CHECK(gui.state == fsm::states::kPlaybackMenu);
  CHECK(gui.option_ids.front() == "task:ACTION_1");

  CHECK(core.consume(console.make(bus::TouchMessage{99, std::nullopt}, 0.6)).empty());
  CHECK(core.consume(console.make(bus::TouchMessage{std::nullopt, fsm::Button::pause}, 0.7)).empty());
  CHECK(core.consume(console.make(bus::SignalPayload{4, {}, {}}, 0.8)).empty());

  auto rejected = core.consume(console.make(bus::EventPayload{"nowhere", {}}, 0.9));
  REQUIRE(rejected.size() == 1);
  CHECK(std::get<bus::SessionPayload>(rejected[0]).op == "warning");
  CHECK(core.snapshot() == gui);

  out = core.consume(console.make(bus::EventPayload{fsm::states::kPlaybackAction, fsm::TaskArg{"MOVE_A_B"}}, 1.0));
  CHECK(std::get<bus::GuiPayload>(out.at(0)).state == fsm::states::kPlaybackAction);
  CHECK(robot.busy());
  out = core.consume(bus::Producer("sim").make(bus::RobotEventPayload{"playback_finished", std::nullopt}, 2.0));
  CHECK(std::get<bus::GuiPayload>(out.at(0)).state == fsm::states::kPlaybackMenu);
}

TEST_CASE("store summaries round-trip") {
  StoreSummary s{{"A", "B"}, {"B", "A"}, {std::string("A"), std::nullopt, std::string("B")}};
  const auto back = parse_summary(format_summary(s));
  CHECK(back.tasks == s.tasks);
  CHECK(back.sequence == s.sequence);
  CHECK(back.macro == s.macro);
}

TEST_CASE("live stack: console, imu stream and replay agree") {
  const auto log_path = std::filesystem::temp_directory_path() / "hri-live-test.jsonl";
  ServeConfig cfg;
  cfg.server.port = 0;
  cfg.log_path = log_path.string();
  {
    LiveStack stack(cfg);
    stack.start();
    bus::Client console("127.0.0.1", stack.port(), bus::Client::Transport::websocket, "console");
    console.subscribe({bus::Channel::gui});
    auto next_gui = [&]() -> std::optional<bus::GuiPayload> {
      for (;;) {
        auto m = console.receive(5000ms);
        if (!m) return std::nullopt;
        if (auto* g = std::get_if<bus::GuiPayload>(&m->payload)) return *g;
      }
    };

    // The G1 template selects the first main-menu option.
    bus::Client watch("127.0.0.1", stack.port(), bus::Client::Transport::line, "watch");
    const auto tpl = default_templates().templates[0];
    REQUIRE(tpl.label == gesture::GestureLabel::G1);
    double t = 0.1;
    for (const auto& s : gesture::synthesize_rest(0.0, 10)) watch.publish(bus::ImuPayload{s.accel, s.gyro}, t += 0.1);
    for (const auto& s : tpl.samples) watch.publish(bus::ImuPayload{s.accel, s.gyro}, t += 0.1);
    auto gui = next_gui();
    REQUIRE(gui);
    CHECK(gui->state == fsm::states::kRecordMenu);

    // "back", then "playback" by touch.
    console.publish(bus::TouchMessage{test::option_index(*gui, "back"), std::nullopt}, 1.0);
    gui = next_gui();
    REQUIRE(gui);
    CHECK(gui->state == fsm::states::kMainMenu);
    console.publish(bus::TouchMessage{1, std::nullopt}, 2.0);
    gui = next_gui();
    REQUIRE(gui);
    CHECK(gui->state == fsm::states::kPlaybackMenu);

    // Play ACTION_1 and pause, resume, stop it.
    console.publish(bus::TouchMessage{0, std::nullopt}, 3.0);
    gui = next_gui();
    REQUIRE(gui);
    CHECK(gui->state == fsm::states::kPlaybackAction);
    console.publish(bus::TouchMessage{std::nullopt, fsm::Button::pause}, 4.0);
    CHECK(next_gui()->context == "paused");
    console.publish(bus::TouchMessage{std::nullopt, fsm::Button::pause}, 5.0);
    CHECK(next_gui()->context == "playing ACTION_1");
    console.publish(bus::TouchMessage{std::nullopt, fsm::Button::stop}, 6.0);
    CHECK(next_gui()->state == fsm::states::kPlaybackMenu);
    stack.stop();
  }

  std::ifstream in(log_path);
  const auto replayed = replay_session(in);
  CHECK(replayed.logged.size() >= 7);
  CHECK(replayed.matches());

  std::ifstream again(log_path);
  ReplayOptions opts;
  opts.reprocess_imu = true;
  const auto reprocessed = replay_session(again, opts);
  CHECK(reprocessed.matches());
  std::filesystem::remove(log_path);
}
