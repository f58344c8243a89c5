#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "hri/analytics/analytics.hpp"
#include "hri/fsm/robot_port.hpp"
#include "hri/harness/harness.hpp"
#include "hri/robot/fixtures.hpp"

namespace hri::harness {

using fsm::Button;
using fsm::OutcomeKind;
using fsm::StateId;
using fsm::TransitionOutcome;
namespace states = fsm::states;

std::vector<fsm::Signal> plan_signal_sequence(const fsm::GuiStateSnapshot& snapshot, std::size_t target) {
  if (snapshot.kind != fsm::StateKind::menu) throw std::invalid_argument("planning needs a menu snapshot");
  if (target >= snapshot.options.size()) {
    throw std::invalid_argument("target option " + std::to_string(target) + " out of range");
  }
  std::vector<fsm::Signal> out;
  const int move = target > snapshot.selector ? 2 : 3;
  const std::size_t steps = target > snapshot.selector ? target - snapshot.selector : snapshot.selector - target;
  out.assign(steps, fsm::Signal{move, 0.0});
  out.push_back({1, 0.0});
  return out;
}

void VirtualUserModel::validate() const {
  for (const TimeModel* t : {&touch, &gesture, &decision}) {
    if (!(t->mean > 0.0)) throw std::invalid_argument("virtual user durations must be positive");
    if (!(t->jitter >= 0.0 && t->jitter < 1.0)) throw std::invalid_argument("jitter must lie in [0, 1)");
  }
  recognizer.validate();
}

namespace {

class NavigationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

bool is_plain_menu(const StateId& id) {
  return id == states::kMainMenu || id == states::kRecordMenu || id == states::kPlaybackMenu ||
         id == states::kSequenceMenu || id == states::kMacroMenu;
}

std::string main_option_for(const StateId& id) {
  if (id == states::kRecordMenu) return "record";
  if (id == states::kPlaybackMenu) return "playback";
  if (id == states::kSequenceMenu) return "sequence";
  return "macro";
}

/// One virtual participant working through the protocol on a virtual clock.
class SessionDriver {
 public:
  SessionDriver(const Scenario& scenario, const VirtualUserModel& user, std::uint64_t seed)
      : scenario_(scenario),
        user_(user),
        rng_(seed),
        store_(store::TaskStore::in_memory()),
        sim_(scenario.sim),
        port_(sim_),
        machine_(load_and_build()) {}

  SessionLog run(std::size_t index, std::uint64_t seed) {
    SessionLog log;
    log.session = index;
    log.modality = user_.modality;
    log.seed = seed;
    for (std::size_t k = 0; k < analytics::kStudyTasks; ++k) {
      // Experimenter gate: checked only between tasks.
      if (clock_ >= scenario_.soft_limit) break;
      auto& result = log.tasks[k];
      result.attempted = true;
      task_ = &result;
      const double start = clock_;
      try {
        switch (k) {
          case 0: task_playback(); break;
          case 1: task_record(); break;
          case 2: task_macro(); break;
          case 3: task_sequence(); break;
        }
        result.completed = true;
      } catch (const NavigationError&) {
        result.completed = false;
      }
      result.duration = clock_ - start;
      if (!result.completed) break;
    }
    log.elapsed = clock_;
    return log;
  }

 private:
  fsm::Machine load_and_build() {
    const auto fixtures = scenario_.fixtures.empty() ? robot::fixture_tasks(scenario_.sim) : scenario_.fixtures;
    for (const auto& t : fixtures) store_.save_task(t);
    for (const char* name : {robot::kMoveAB, robot::kAction1, robot::kAction2}) {
      if (!store_.has_task(name)) throw StartupError(std::string("missing fixture task ") + name);
    }
    return fsm::build_interface_fsm(store_, port_);
  }

  double draw(const TimeModel& t) {
    if (t.jitter == 0.0) return t.mean;
    return std::uniform_real_distribution<double>(t.mean * (1.0 - t.jitter), t.mean * (1.0 + t.jitter))(rng_);
  }

  void handle_events() {
    for (const auto& ev : sim_.drain_events()) {
      if (ev.kind == robot::SimEventKind::playback_finished) {
        machine_.system_transition(fsm::SystemTrigger::playback_finished);
      } else if (ev.kind == robot::SimEventKind::record_saved) {
        machine_.system_transition(fsm::SystemTrigger::record_saved);
      }
    }
  }

  /// Advances the virtual clock, stepping the robot at its tick rate.
  void wait(double dt) {
    const double tick = 1.0 / scenario_.sim.tick_rate;
    while (dt > 0.0) {
      double step = dt;
      if (sim_.status() == robot::PlaybackStatus::playing) {
        step = std::min({dt, tick, sim_.remaining() > 0.0 ? sim_.remaining() : tick});
      }
      sim_.step(step);
      clock_ += step;
      dt -= step;
      handle_events();
    }
  }

  /// Waits until the robot is idle, following sequences to their end.
  void settle() {
    const double tick = 1.0 / scenario_.sim.tick_rate;
    handle_events();
    while (sim_.status() != robot::PlaybackStatus::idle) {
      const double r = sim_.remaining();
      const double step = r > 0.0 ? std::min(tick, r) : tick;
      sim_.step(step);
      clock_ += step;
      handle_events();
    }
  }

  void count_input() {
    ++task_->inputs;
    if (++inputs_ > scenario_.max_inputs) throw NavigationError("input budget exhausted");
  }

  TransitionOutcome touch(const std::function<TransitionOutcome()>& press) {
    wait(draw(user_.decision) + draw(user_.touch));
    count_input();
    TransitionOutcome out;
    try {
      out = press();
    } catch (const fsm::EventRejected& e) {
      out = {OutcomeKind::ignored, e.what()};
    }
    landed_ = machine_.current();
    handle_events();
    return out;
  }

  TransitionOutcome touch_option(std::size_t index) {
    return touch([&] { return machine_.dispatch_event(machine_.activation_event(index, clock_)); });
  }

  TransitionOutcome touch_button(Button b) {
    return touch([&] { return machine_.press_button(b, clock_); });
  }

  /// Performs gesture `slot` until the recognizer reports something, then
  /// dispatches what was recognized. Returns the recognized slot.
  int gesture(int slot, TransitionOutcome* outcome = nullptr) {
    const auto truth = gesture::kAllLabels[static_cast<std::size_t>(slot - 1)];
    for (;;) {
      wait(draw(user_.decision) + draw(user_.gesture));
      auto detection = gesture::stochastic_recognize(truth, user_.recognizer, rng_, clock_);
      if (!detection) {
        ++task_->gesture_misses;
        if (++inputs_ > scenario_.max_inputs) throw NavigationError("input budget exhausted");
        continue;
      }
      wait(detection->timestamp - clock_);
      count_input();
      const fsm::Signal signal = gesture::gesture_to_signal(*detection);
      TransitionOutcome out = machine_.dispatch_signal(signal);
      landed_ = machine_.current();
      handle_events();
      if (outcome) *outcome = out;
      return signal.slot;
    }
  }

  bool gesture_mode() const { return user_.modality == Modality::gesture; }

  std::optional<std::size_t> find_option(const std::string& id) const {
    const auto snap = machine_.snapshot();
    auto it = std::find(snap.option_ids.begin(), snap.option_ids.end(), id);
    if (it == snap.option_ids.end()) return std::nullopt;
    return static_cast<std::size_t>(it - snap.option_ids.begin());
  }

  /// Selects option `id` of menu `state`. Plain menus are re-entered after a
  /// slip; for submenus a slip returns false so the caller can start over.
  bool select(const StateId& state, const std::string& id) {
    for (;;) {
      if (machine_.current() != state) {
        if (!is_plain_menu(state)) return false;
        reach(state);
      }
      const auto index = find_option(id);
      if (!index) throw NavigationError("option " + id + " missing in " + state);
      if (!gesture_mode()) {
        touch_option(*index);
        return true;
      }
      const int slot = plan_signal_sequence(machine_.snapshot(), *index).front().slot;
      if (gesture(slot) == slot && slot == 1) return true;
    }
  }

  /// Leaves the current state towards the main menu.
  void step_back() {
    const StateId cur = machine_.current();
    if (machine_.active().kind == fsm::StateKind::action) {
      if (gesture_mode()) {
        gesture(4);
      } else {
        touch_button(Button::stop);
      }
      return;
    }
    select(cur, "back");
  }

  void reach(const StateId& target) {
    while (machine_.current() != target) {
      if (machine_.current() == states::kMainMenu) {
        select(states::kMainMenu, main_option_for(target));
      } else {
        step_back();
      }
    }
  }

  void task_playback() {
    while (!(select(states::kPlaybackMenu, std::string("task:") + robot::kMoveAB) &&
             landed_ == states::kPlaybackAction)) {
    }
    settle();
  }

  void task_record() {
    while (!(select(states::kRecordMenu, "new") && landed_ == states::kRecordAction)) {
    }
    recorded_ = machine_.context().task.value_or("");

    // Kinesthetic demonstration: the participant drags the right arm from B
    // back to A along a pick-and-place arc of jittered length.
    const double length =
        std::uniform_real_distribution<double>(scenario_.guidance_min, scenario_.guidance_max)(rng_);
    const auto& cfg = scenario_.sim;
    const robot::Trajectory arc = robot::pick_and_place(cfg, robot::Arm::right, cfg.position_b, cfg.position_a);
    const double scale = length / arc.duration();
    const auto samples = static_cast<std::size_t>(std::floor(length * scenario_.guidance_rate));
    const double start = clock_;
    for (std::size_t i = 0; i <= samples; ++i) {
      const double t = std::min(static_cast<double>(i) / scenario_.guidance_rate, length);
      wait(start + t - clock_);
      sim_.feed_guidance(arc.sample(t / scale), clock_);
    }
    if (clock_ < start + length) {
      wait(start + length - clock_);
      sim_.feed_guidance(arc.sample(arc.duration()), clock_);
    }
    while (machine_.current() == states::kRecordAction) step_back();
  }

  void bind(int slot, const std::string& task) {
    const auto k = static_cast<std::size_t>(slot - 1);
    while (machine_.macro().slots[k] != task) {
      if (!select(states::kMacroMenu, "slot:" + std::to_string(slot))) continue;
      select(states::kMacroSlotSubmenu, "task:" + task);
    }
  }

  void fire(int slot) {
    for (;;) {
      while (machine_.current() != states::kMacroAction) select(states::kMacroMenu, "run");
      TransitionOutcome out;
      int fired = slot;
      if (gesture_mode()) {
        fired = gesture(slot, &out);
      } else {
        out = touch_button(slot == 1 ? Button::g1 : Button::g2);
      }
      const bool started = out.kind == OutcomeKind::action_effect && out.detail.starts_with("playing");
      settle();
      if (started && fired == slot) return;
    }
  }

  void task_macro() {
    bind(1, robot::kMoveAB);
    bind(2, recorded_);
    fire(1);
    fire(2);
  }

  void task_sequence() {
    const std::vector<std::string> want{robot::kAction1, robot::kAction2};
    for (;;) {
      const auto& have = machine_.working_sequence().tasks;
      if (have == want) break;
      std::size_t prefix = 0;
      while (prefix < have.size() && prefix < want.size() && have[prefix] == want[prefix]) ++prefix;
      if (prefix == have.size()) {
        if (select(states::kSequenceMenu, "add")) select(states::kAddTaskSubmenu, "task:" + want[prefix]);
      } else {
        const std::string slot = "slot:" + std::to_string(have.size());
        if (select(states::kSequenceMenu, slot)) select(states::kAddTaskSubmenu, "remove");
      }
    }
    while (!(select(states::kSequenceMenu, "run") && landed_ == states::kPlaybackAction)) {
    }
    settle();
  }

  const Scenario& scenario_;
  const VirtualUserModel& user_;
  std::mt19937_64 rng_;
  store::TaskStore store_;
  robot::Simulator sim_;
  fsm::SimulatorPort port_;
  fsm::Machine machine_;
  double clock_ = 0.0;
  std::size_t inputs_ = 0;
  analytics::TaskResult* task_ = nullptr;
  std::string recorded_;
  StateId landed_;  // state right after the last input, before robot events
};

}  // namespace

SessionLog run_session(const Scenario& scenario, const VirtualUserModel& user, std::uint64_t seed,
                       std::size_t session_index) {
  user.validate();
  SessionDriver driver(scenario, user, seed);
  return driver.run(session_index, seed);
}

std::uint64_t session_seed(std::uint64_t master, Modality modality, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(modality), static_cast<std::uint32_t>(index)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::vector<SessionLog> run_study(const StudyConfig& config) {
  std::vector<SessionLog> logs;
  for (Modality m : config.modalities) {
    VirtualUserModel user = config.user;
    user.modality = m;
    for (std::size_t i = 0; i < config.sessions; ++i) {
      logs.push_back(run_session(config.scenario, user, session_seed(config.seed, m, i), i));
    }
  }
  return logs;
}

std::optional<double> median_gap(const std::vector<SessionLog>& logs, const std::vector<std::size_t>& tasks) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t k : tasks) {
    auto g = analytics::task_durations(logs, Modality::gesture, k);
    auto t = analytics::task_durations(logs, Modality::touchscreen, k);
    if (g.empty() || t.empty()) continue;
    sum += analytics::boxplot_stats(g).median - analytics::boxplot_stats(t).median;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace hri::harness
