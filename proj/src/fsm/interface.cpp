#include <stdexcept>

#include "hri/fsm/machine.hpp"

namespace hri::fsm {

Signal make_signal(int slot, double timestamp) {
  if (slot < 1 || slot > kHandlerSlots) throw std::invalid_argument("handler slot must be 1..4");
  return Signal{slot, timestamp};
}

std::string_view to_string(SystemTrigger trigger) {
  switch (trigger) {
    case SystemTrigger::playback_finished: return "playback-finished";
    case SystemTrigger::sequence_finished: return "sequence-finished";
    case SystemTrigger::record_saved: return "record-saved";
  }
  return "";
}

std::optional<SystemTrigger> parse_trigger(std::string_view text) {
  for (auto t : {SystemTrigger::playback_finished, SystemTrigger::sequence_finished,
                 SystemTrigger::record_saved}) {
    if (to_string(t) == text) return t;
  }
  return std::nullopt;
}

std::string_view to_string(Button button) {
  switch (button) {
    case Button::pause: return "pause";
    case Button::stop: return "stop";
    case Button::g1: return "g1";
    case Button::g2: return "g2";
    case Button::g3: return "g3";
  }
  return "";
}

std::optional<Button> parse_button(std::string_view text) {
  for (auto b : {Button::pause, Button::stop, Button::g1, Button::g2, Button::g3}) {
    if (to_string(b) == text) return b;
  }
  return std::nullopt;
}

namespace {

MenuOption go(std::string id, std::string label, StateId target) {
  return {std::move(id), std::move(label), option::GoTo{std::move(target)}};
}

MenuOption back_to(StateId target) { return go("back", "back", std::move(target)); }

MenuOption placeholder() { return {"none", "(no tasks)", option::Placeholder{}}; }

std::map<int, TransitionSpec> menu_handlers() {
  return {{1, {TransitionKind::select_current}},
          {2, {TransitionKind::selector_down}},
          {3, {TransitionKind::selector_up}}};
}

}  // namespace

std::string Machine::fresh_task_name() const {
  for (int n = 1;; ++n) {
    std::string name = "TASK_" + std::to_string(n);
    if (!store_->has_task(name)) return name;
  }
}

std::string Machine::build_title(const StateId& id, const PendingContext& ctx) const {
  if (id == states::kMainMenu) return "Main menu";
  if (id == states::kRecordMenu) return "Record";
  if (id == states::kPlaybackMenu) return ctx.delete_mode ? "Playback: choose a task to delete" : "Playback";
  if (id == states::kSequenceMenu) return "Sequential playback";
  if (id == states::kAddTaskSubmenu) {
    return ctx.sequence_slot ? "Replace task " + std::to_string(*ctx.sequence_slot + 1) : "Add task";
  }
  if (id == states::kMacroMenu) return "Macro mode";
  if (id == states::kMacroSlotSubmenu) return "Bind G" + std::to_string(ctx.macro_slot.value_or(1));
  if (id == states::kRecordAction) return "Recording";
  if (id == states::kPlaybackAction) return "Playback";
  if (id == states::kMacroAction) return "Macro";
  return id;
}

std::vector<MenuOption> Machine::build_options(const StateId& id, const PendingContext& ctx) const {
  std::vector<MenuOption> out;
  const std::vector<std::string> tasks = store_->list_tasks();

  if (id == states::kMainMenu) {
    out.push_back(go("record", "record", states::kRecordMenu));
    out.push_back(go("playback", "playback", states::kPlaybackMenu));
    out.push_back(go("sequence", "sequential playback", states::kSequenceMenu));
    out.push_back(go("macro", "macro mode", states::kMacroMenu));
  } else if (id == states::kRecordMenu) {
    for (const auto& t : tasks) {
      option::GoTo g{states::kRecordAction};
      g.task = t;
      out.push_back({"task:" + t, t, g});
    }
    option::GoTo fresh{states::kRecordAction};
    fresh.task = fresh_task_name();
    out.push_back({"new", "new task", fresh});
    out.push_back(back_to(states::kMainMenu));
  } else if (id == states::kPlaybackMenu) {
    if (tasks.empty()) out.push_back(placeholder());
    for (const auto& t : tasks) {
      if (ctx.delete_mode) {
        out.push_back({"task:" + t, t, option::DeleteTask{t}});
      } else {
        option::GoTo g{states::kPlaybackAction};
        g.task = t;
        out.push_back({"task:" + t, t, g});
      }
    }
    out.push_back({"delete", ctx.delete_mode ? "cancel delete" : "delete", option::ToggleDelete{}});
    out.push_back(back_to(states::kMainMenu));
  } else if (id == states::kSequenceMenu) {
    for (std::size_t i = 0; i < sequence_.tasks.size(); ++i) {
      option::GoTo g{states::kAddTaskSubmenu};
      g.sequence_slot = i;
      out.push_back({"slot:" + std::to_string(i + 1), std::to_string(i + 1) + ". " + sequence_.tasks[i], g});
    }
    out.push_back(go("add", "add", states::kAddTaskSubmenu));
    option::GoTo run{states::kPlaybackAction};
    run.sequence = kWorkingSequence;
    out.push_back({"run", "run", run});
    out.push_back(back_to(states::kMainMenu));
  } else if (id == states::kAddTaskSubmenu) {
    if (tasks.empty()) out.push_back(placeholder());
    for (const auto& t : tasks) {
      if (ctx.sequence_slot) {
        out.push_back({"task:" + t, t, option::ReplaceTask{*ctx.sequence_slot, t}});
      } else {
        out.push_back({"task:" + t, t, option::AppendTask{t}});
      }
    }
    if (ctx.sequence_slot) out.push_back({"remove", "remove", option::RemoveSlot{*ctx.sequence_slot}});
    out.push_back(back_to(states::kSequenceMenu));
  } else if (id == states::kMacroMenu) {
    for (int k = 1; k <= 3; ++k) {
      option::GoTo g{states::kMacroSlotSubmenu};
      g.macro_slot = k;
      const auto& bound = macro_.slots[static_cast<std::size_t>(k - 1)];
      out.push_back({"slot:" + std::to_string(k), "G" + std::to_string(k) + ": " + bound.value_or("-"), g});
    }
    out.push_back(go("run", "run", states::kMacroAction));
    out.push_back(back_to(states::kMainMenu));
  } else if (id == states::kMacroSlotSubmenu) {
    const int slot = ctx.macro_slot.value_or(1);
    if (tasks.empty()) out.push_back(placeholder());
    for (const auto& t : tasks) out.push_back({"task:" + t, t, option::BindMacro{slot, t}});
    out.push_back({"clear", "clear", option::BindMacro{slot, std::nullopt}});
    out.push_back(back_to(states::kMacroMenu));
  }
  return out;
}

Machine build_interface_fsm(store::TaskStore& store, RobotPort& robot) {
  Machine m(store, robot);
  if (auto seq = store.find_sequence(kWorkingSequence)) m.sequence_ = *seq;
  if (auto macro = store.find_macro(kWorkingMacro)) m.macro_ = *macro;

  const PendingContext none;
  for (const StateId& id : {states::kMainMenu, states::kRecordMenu, states::kPlaybackMenu,
                            states::kSequenceMenu, states::kAddTaskSubmenu, states::kMacroMenu,
                            states::kMacroSlotSubmenu}) {
    m.add_state({id, StateKind::menu, m.build_title(id, none), m.build_options(id, none), 0,
                 menu_handlers()});
  }
  m.add_state({states::kRecordAction, StateKind::action, m.build_title(states::kRecordAction, none), {}, 0,
               {{4, {TransitionKind::stop_back}}}});
  m.add_state({states::kPlaybackAction, StateKind::action, m.build_title(states::kPlaybackAction, none), {}, 0,
               {{2, {TransitionKind::pause_resume}}, {4, {TransitionKind::stop_back}}}});
  m.add_state({states::kMacroAction, StateKind::action, m.build_title(states::kMacroAction, none), {}, 0,
               {{1, {TransitionKind::macro_fire, 1}},
                {2, {TransitionKind::macro_fire, 2}},
                {3, {TransitionKind::macro_fire, 3}},
                {4, {TransitionKind::stop_back}}}});
  m.set_initial(states::kMainMenu);
  return m;
}

}  // namespace hri::fsm
