#include <functional>
#include <random>

#include "doctest.h"
#include "hri/harness/harness.hpp"
#include "common/menus.hpp"
#include "common/rig.hpp"

using namespace hri;
using namespace hri::fsm;
using test::Rig;
using test::option_index;
using test::menu_setups;

namespace {

void require_same(Rig& a, Rig& b) {
  CHECK(a.machine.current() == b.machine.current());
  CHECK(a.machine.context() == b.machine.context());
  CHECK(a.machine.snapshot() == b.machine.snapshot());
  CHECK(a.machine.working_sequence() == b.machine.working_sequence());
  CHECK(a.machine.macro() == b.machine.macro());
  CHECK(a.store.list_tasks() == b.store.list_tasks());
}

}  // namespace

TEST_CASE("empty store builds a main menu with four options") {
  Rig rig(false);
  const auto snap = rig.machine.snapshot();
  CHECK(snap.state == states::kMainMenu);
  CHECK(snap.options == std::vector<std::string>{"record", "playback", "sequential playback", "macro mode"});
  CHECK(snap.selector == 0);
  rig.machine.check_invariants();

  rig.machine.dispatch_event({states::kPlaybackMenu, {}});
  CHECK(rig.machine.snapshot().option_ids == std::vector<std::string>{"none", "delete", "back"});
}

TEST_CASE("every state binds at most four handler slots") {
  Rig rig;
  for (const auto& [id, s] : rig.machine.states()) {
    CHECK(s.transition_count() <= 4);
    CHECK(s.transition_count() == s.handlers.size());
  }
  CHECK(rig.machine.states().size() == 10);

  Machine m(rig.store, rig.port);
  FsmState five{"x", StateKind::action, "x", {}, 0, {}};
  for (int k = 1; k <= 4; ++k) five.handlers[k] = {TransitionKind::stop_back};
  five.handlers[5] = {TransitionKind::stop_back};
  CHECK_THROWS_AS(m.add_state(five), std::logic_error);
  FsmState zero{"y", StateKind::action, "y", {}, 0, {{0, {TransitionKind::stop_back}}}};
  CHECK_THROWS_AS(m.add_state(zero), std::logic_error);
  FsmState empty_menu{"z", StateKind::menu, "z", {}, 0, {}};
  CHECK_THROWS_AS(m.add_state(empty_menu), std::logic_error);
}

TEST_CASE("playback menu lists the tasks then delete") {
  Rig rig(false);
  rig.store.save_task({"t1", {}, 0.0});
  rig.store.save_task({"t2", {}, 0.0});
  rig.machine.dispatch_event({states::kPlaybackMenu, {}});
  CHECK(rig.machine.snapshot().option_ids == std::vector<std::string>{"task:t1", "task:t2", "delete", "back"});

  SUBCASE("deleting a task rebuilds the list") {
    rig.machine.dispatch_event({states::kPlaybackMenu, OptionArg{2}});
    CHECK(rig.machine.snapshot().context == "delete");
    rig.machine.dispatch_event({states::kPlaybackMenu, OptionArg{0}});
    CHECK_FALSE(rig.store.has_task("t1"));
    CHECK(rig.machine.snapshot().option_ids == std::vector<std::string>{"task:t2", "delete", "back"});
    CHECK(rig.machine.snapshot().context.empty());
  }
}

TEST_CASE("selector moves down and up and saturates at both ends") {
  Rig rig;
  CHECK(rig.machine.dispatch_signal(make_signal(2)).kind == OutcomeKind::selector_moved);
  CHECK(rig.machine.snapshot().selector == 1);
  for (int i = 0; i < 10; ++i) rig.signal(2);
  CHECK(rig.machine.snapshot().selector == 3);
  CHECK(rig.machine.dispatch_signal(make_signal(2)).kind == OutcomeKind::ignored);
  for (int i = 0; i < 10; ++i) rig.signal(3);
  CHECK(rig.machine.snapshot().selector == 0);
  CHECK(rig.machine.dispatch_signal(make_signal(3)).kind == OutcomeKind::ignored);
}

TEST_CASE("make_signal rejects slots outside 1..4") {
  CHECK_THROWS_AS(make_signal(0), std::invalid_argument);
  CHECK_THROWS_AS(make_signal(5), std::invalid_argument);
  CHECK(make_signal(4, 2.5) == Signal{4, 2.5});
}

TEST_CASE("G4 is inert in every menu state and selector position") {
  for (const auto& setup : menu_setups()) {
    CAPTURE(setup.name);
    Rig probe;
    setup.apply(probe);
    const std::size_t n = probe.machine.snapshot().options.size();
    for (std::size_t sel = 0; sel < n; ++sel) {
      Rig rig;
      setup.apply(rig);
      for (std::size_t k = 0; k < sel; ++k) rig.signal(2);
      const auto before = rig.machine.snapshot();
      const auto ctx = rig.machine.context();
      const auto seq = rig.machine.working_sequence();
      CHECK(rig.machine.dispatch_signal(make_signal(4)).kind == OutcomeKind::ignored);
      CHECK(rig.machine.snapshot() == before);
      CHECK(rig.machine.context() == ctx);
      CHECK(rig.machine.working_sequence() == seq);
    }
  }
}

TEST_CASE("planned signals and the single event reach the same state for every option") {
  for (const auto& setup : menu_setups()) {
    Rig probe;
    setup.apply(probe);
    const std::size_t n = probe.machine.snapshot().options.size();
    for (std::size_t i = 0; i < n; ++i) {
      CAPTURE(setup.name);
      CAPTURE(i);
      Rig by_signal, by_event;
      setup.apply(by_signal);
      setup.apply(by_event);
      for (const auto& s : harness::plan_signal_sequence(by_signal.machine.snapshot(), i)) {
        by_signal.machine.dispatch_signal(s);
      }
      try {
        by_event.machine.dispatch_event(by_event.machine.activation_event(i));
      } catch (const EventRejected&) {
        // A rejected event must match a selection that did nothing.
        CHECK(by_signal.machine.current() == probe.machine.current());
        continue;
      }
      require_same(by_signal, by_event);
    }
  }
}

TEST_CASE("events jump directly to any state") {
  Rig rig;
  rig.machine.dispatch_event({states::kRecordMenu, {}});
  rig.machine.dispatch_event({states::kMacroMenu, {}});
  CHECK(rig.machine.current() == states::kMacroMenu);

  rig.machine.dispatch_event({states::kPlaybackAction, TaskArg{robot::kMoveAB}});
  CHECK(rig.machine.current() == states::kPlaybackAction);
  CHECK(rig.sim.status() == robot::PlaybackStatus::playing);
  CHECK(rig.machine.snapshot().context == "playing MOVE_A_B");
}

TEST_CASE("rejected events leave the machine unchanged") {
  Rig rig;
  rig.signal(2);
  const auto before = rig.machine.snapshot();
  CHECK_THROWS_AS(rig.machine.dispatch_event({"nonexistent", {}}), EventRejected);
  CHECK_THROWS_AS(rig.machine.dispatch_event({states::kPlaybackAction, {}}), EventRejected);
  CHECK_THROWS_AS(rig.machine.dispatch_event({states::kPlaybackAction, TaskArg{"missing"}}), EventRejected);
  CHECK_THROWS_AS(rig.machine.dispatch_event({states::kRecordAction, {}}), EventRejected);
  CHECK_THROWS_AS(rig.machine.dispatch_event({states::kMacroSlotSubmenu, MacroSlotArg{4}}), EventRejected);
  CHECK_THROWS_AS(rig.machine.dispatch_event({states::kMainMenu, OptionArg{9}}), EventRejected);
  CHECK_THROWS_AS(rig.machine.dispatch_event({states::kPlaybackAction, SequenceArg{"default"}}), EventRejected);
  CHECK(rig.machine.snapshot() == before);
  CHECK(rig.machine.current() == states::kMainMenu);
}

TEST_CASE("system transitions") {
  Rig rig;
  SUBCASE("playback finished returns to the playback menu") {
    rig.machine.dispatch_event({states::kPlaybackAction, TaskArg{robot::kAction1}});
    rig.settle();
    CHECK(rig.machine.current() == states::kPlaybackMenu);
  }
  SUBCASE("a finished sequence item advances to the next") {
    rig.store.save_sequence({"pair", {robot::kAction1, robot::kMoveAB}});
    rig.machine.dispatch_event({states::kPlaybackAction, SequenceArg{"pair"}});
    CHECK(rig.machine.snapshot().context == "playing ACTION_1 (1/2)");
    rig.sim.stop();  // stands in for the robot reaching the end of ACTION_1
    CHECK(rig.machine.system_transition(SystemTrigger::playback_finished).kind == OutcomeKind::action_effect);
    CHECK(rig.machine.current() == states::kPlaybackAction);
    CHECK(rig.machine.snapshot().context == "playing MOVE_A_B (2/2)");
  }
  SUBCASE("incompatible triggers are ignored") {
    const auto before = rig.machine.snapshot();
    CHECK(rig.machine.system_transition(SystemTrigger::playback_finished).kind == OutcomeKind::ignored);
    CHECK(rig.machine.system_transition(SystemTrigger::record_saved).kind == OutcomeKind::ignored);
    CHECK(rig.machine.system_transition(SystemTrigger::sequence_finished).kind == OutcomeKind::ignored);
    CHECK(rig.machine.snapshot() == before);
  }
  SUBCASE("record saved returns to the record menu") {
    rig.machine.dispatch_event({states::kRecordAction, TaskArg{"T"}});
    CHECK(rig.machine.system_transition(SystemTrigger::record_saved).kind == OutcomeKind::state_changed);
    CHECK(rig.machine.current() == states::kRecordMenu);
  }
}

TEST_CASE("G4 in record_action finalizes the recording") {
  Rig rig;
  rig.machine.dispatch_event({states::kRecordMenu, {}});
  rig.machine.dispatch_event({states::kRecordMenu, OptionArg{option_index(rig.machine.snapshot(), "new")}});
  CHECK(rig.machine.current() == states::kRecordAction);
  CHECK(rig.machine.snapshot().context == "recording TASK_1");
  rig.sim.feed_guidance({{0.5, 0.0, 0.2}, robot::Gripper::open}, 1.0);
  rig.sim.feed_guidance({{0.5, 0.1, 0.2}, robot::Gripper::closed}, 1.5);
  CHECK(rig.machine.dispatch_signal(make_signal(4, 2.0)).kind == OutcomeKind::state_changed);
  CHECK(rig.machine.current() == states::kRecordMenu);
  REQUIRE(rig.store.has_task("TASK_1"));
  const auto task = rig.store.load_task("TASK_1");
  REQUIRE(task.tracks.size() == 1);
  CHECK(task.tracks[0].waypoints.size() == 2);
  CHECK(task.tracks[0].waypoints[1].t == doctest::Approx(0.5));
  CHECK(rig.machine.snapshot().option_ids.back() == "back");
  CHECK(option_index(rig.machine.snapshot(), "task:TASK_1") < rig.machine.snapshot().options.size());
}

TEST_CASE("playback action toggles pause on slot 2 and stops on slot 4") {
  Rig rig;
  rig.machine.dispatch_event({states::kPlaybackAction, TaskArg{robot::kMoveAB}});
  CHECK(rig.machine.dispatch_signal(make_signal(2)).detail == "paused");
  CHECK(rig.machine.snapshot().context == "paused");
  CHECK(rig.sim.status() == robot::PlaybackStatus::paused);
  CHECK(rig.machine.dispatch_signal(make_signal(2)).detail == "resumed");
  CHECK(rig.sim.status() == robot::PlaybackStatus::playing);
  CHECK(rig.machine.dispatch_signal(make_signal(1)).kind == OutcomeKind::ignored);
  CHECK(rig.machine.dispatch_signal(make_signal(4)).kind == OutcomeKind::state_changed);
  CHECK(rig.machine.current() == states::kPlaybackMenu);
  CHECK_FALSE(rig.sim.busy());
}

TEST_CASE("macro action fires bound slots 1..3 and exits on slot 4") {
  Rig rig;
  rig.machine.dispatch_event({states::kMacroSlotSubmenu, MacroSlotArg{2}});
  rig.machine.dispatch_event(
      {states::kMacroSlotSubmenu, OptionArg{option_index(rig.machine.snapshot(), "task:ACTION_1")}});
  CHECK(rig.machine.current() == states::kMacroMenu);
  CHECK(rig.machine.macro().slots[1] == std::optional<std::string>("ACTION_1"));
  CHECK(rig.store.load_macro("default").slots[1] == std::optional<std::string>("ACTION_1"));
  CHECK(rig.machine.snapshot().options[1] == "G2: ACTION_1");

  rig.machine.dispatch_event({states::kMacroAction, {}});
  CHECK(rig.machine.dispatch_signal(make_signal(1)).kind == OutcomeKind::ignored);  // unbound
  CHECK(rig.machine.dispatch_signal(make_signal(2)).kind == OutcomeKind::action_effect);
  CHECK(rig.machine.snapshot().context == "playing G2");
  CHECK(rig.machine.dispatch_signal(make_signal(2)).kind == OutcomeKind::ignored);  // busy
  rig.settle();
  CHECK(rig.machine.snapshot().context == "waiting");
  CHECK(rig.machine.dispatch_signal(make_signal(4)).kind == OutcomeKind::state_changed);
  CHECK(rig.machine.current() == states::kMacroMenu);
}

TEST_CASE("sequence run plays each element and returns to the sequence menu") {
  Rig rig;
  rig.machine.dispatch_event({states::kAddTaskSubmenu, {}});
  rig.machine.dispatch_event({states::kAddTaskSubmenu, OptionArg{option_index(rig.machine.snapshot(), "task:ACTION_1")}});
  rig.machine.dispatch_event({states::kAddTaskSubmenu, {}});
  rig.machine.dispatch_event({states::kAddTaskSubmenu, OptionArg{option_index(rig.machine.snapshot(), "task:ACTION_2")}});
  CHECK(rig.machine.working_sequence().tasks == std::vector<std::string>{"ACTION_1", "ACTION_2"});
  CHECK(rig.machine.snapshot().option_ids == std::vector<std::string>{"slot:1", "slot:2", "add", "run", "back"});
  rig.machine.dispatch_event({states::kSequenceMenu, OptionArg{3}});
  CHECK(rig.machine.current() == states::kPlaybackAction);
  rig.settle();
  CHECK(rig.machine.current() == states::kSequenceMenu);
}

TEST_CASE("snapshots are pure projections") {
  Rig rig;
  rig.signal(2);
  rig.signal(2);
  const auto a = rig.machine.snapshot();
  const auto b = rig.machine.snapshot();
  CHECK(a == b);
  CHECK(a.selector == 2);
  CHECK(a.options == std::vector<std::string>{"record", "playback", "sequential playback", "macro mode"});
}

TEST_CASE("random signal fuzz keeps the machine valid and unbound slots are no-ops") {
  Rig rig;
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> slot(1, 4), action(0, 19);
  for (int step = 0; step < 10'000; ++step) {
    const int a = action(rng);
    if (a == 0) {
      rig.sim.step(0.5);
      for (const auto& e : rig.sim.drain_events()) {
        if (e.kind == robot::SimEventKind::playback_finished) {
          rig.machine.system_transition(SystemTrigger::playback_finished);
        }
      }
    } else {
      const int s = slot(rng);
      const bool bound = rig.machine.active().handlers.contains(s);
      const auto before = rig.machine.snapshot();
      const auto ctx = rig.machine.context();
      const auto outcome = rig.machine.dispatch_signal(make_signal(s));
      if (!bound) {
        REQUIRE(outcome.kind == OutcomeKind::ignored);
        REQUIRE(rig.machine.snapshot() == before);
        REQUIRE(rig.machine.context() == ctx);
      }
    }
    rig.machine.check_invariants();
  }
}
