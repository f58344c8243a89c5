#include "hri/fsm/machine.hpp"

#include <algorithm>
#include <stdexcept>

namespace hri::fsm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

TransitionOutcome outcome(OutcomeKind kind, std::string detail = {}) {
  return {kind, std::move(detail)};
}

}  // namespace

std::string_view to_string(StateKind kind) { return kind == StateKind::menu ? "menu" : "action"; }

std::string_view to_string(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::state_changed: return "state-changed";
    case OutcomeKind::selector_moved: return "selector-moved";
    case OutcomeKind::ignored: return "ignored";
    case OutcomeKind::action_effect: return "action-effect";
  }
  return "ignored";
}

Machine::Machine(store::TaskStore& store, RobotPort& robot) : store_(&store), robot_(&robot) {
  sequence_.name = kWorkingSequence;
  macro_.name = kWorkingMacro;
}

void Machine::add_state(FsmState state) {
  if (state.handlers.size() > static_cast<std::size_t>(kHandlerSlots)) {
    throw std::logic_error("state '" + state.id + "' installs more than four handlers");
  }
  for (const auto& [slot, spec] : state.handlers) {
    if (slot < 1 || slot > kHandlerSlots) {
      throw std::logic_error("state '" + state.id + "' binds handler slot out of range");
    }
  }
  if (state.kind == StateKind::menu &&
      (state.options.empty() || state.selector >= state.options.size())) {
    throw std::logic_error("menu state '" + state.id + "' needs options and a valid selector");
  }
  const StateId id = state.id;
  if (!states_.emplace(id, std::move(state)).second) {
    throw std::logic_error("duplicate state '" + id + "'");
  }
}

void Machine::set_initial(const StateId& id) {
  if (!has_state(id)) throw std::logic_error("unknown initial state '" + id + "'");
  current_ = id;
  context_ = {};
  auto& s = states_.at(id);
  s.selector = 0;
}

const FsmState& Machine::active() const { return states_.at(current_); }
FsmState& Machine::mutable_active() { return states_.at(current_); }

const FsmState& Machine::state(const StateId& id) const {
  auto it = states_.find(id);
  if (it == states_.end()) throw std::out_of_range("unknown state '" + id + "'");
  return it->second;
}

// ---------------------------------------------------------------------------
// Dispatch

TransitionOutcome Machine::dispatch_signal(const Signal& signal) {
  if (signal.slot < 1 || signal.slot > kHandlerSlots) {
    return outcome(OutcomeKind::ignored, "handler slot out of range");
  }
  const auto& handlers = active().handlers;
  auto it = handlers.find(signal.slot);
  if (it == handlers.end()) {
    return outcome(OutcomeKind::ignored,
                   "slot " + std::to_string(signal.slot) + " unbound in " + current_);
  }
  now_ = signal.timestamp;
  return apply(it->second);
}

TransitionOutcome Machine::apply(const TransitionSpec& spec) {
  FsmState& s = mutable_active();
  switch (spec.kind) {
    case TransitionKind::selector_up:
      if (s.selector == 0) return outcome(OutcomeKind::ignored, "selector at top");
      --s.selector;
      return outcome(OutcomeKind::selector_moved);
    case TransitionKind::selector_down:
      if (s.selector + 1 >= s.options.size()) {
        return outcome(OutcomeKind::ignored, "selector at bottom");
      }
      ++s.selector;
      return outcome(OutcomeKind::selector_moved);
    case TransitionKind::select_current:
      return select(s.selector);
    case TransitionKind::pause_resume:
      if (current_ != states::kPlaybackAction) return outcome(OutcomeKind::ignored);
      if (context_.paused) {
        robot_->resume();
        context_.paused = false;
        return outcome(OutcomeKind::action_effect, "resumed");
      }
      robot_->pause();
      context_.paused = true;
      return outcome(OutcomeKind::action_effect, "paused");
    case TransitionKind::stop_back: {
      StateId back = states::kMainMenu;
      if (current_ == states::kRecordAction) back = states::kRecordMenu;
      if (current_ == states::kPlaybackAction) back = origin_menu();
      if (current_ == states::kMacroAction) back = states::kMacroMenu;
      transition(back, {});
      return outcome(OutcomeKind::state_changed);
    }
    case TransitionKind::macro_fire:
      return fire_macro(spec.macro_slot);
  }
  return outcome(OutcomeKind::ignored);
}

TransitionOutcome Machine::select(std::size_t index) {
  const FsmState& s = active();
  if (s.kind != StateKind::menu || index >= s.options.size()) {
    return outcome(OutcomeKind::ignored, "no option " + std::to_string(index));
  }
  const OptionAction action = s.options[index].action;

  return std::visit(
      overloaded{
          [&](const option::GoTo& go) {
            PendingContext ctx;
            ctx.task = go.task;
            ctx.sequence = go.sequence;
            ctx.sequence_slot = go.sequence_slot;
            ctx.macro_slot = go.macro_slot;
            try {
              validate_entry(go.target, ctx);
            } catch (const EventRejected& e) {
              return outcome(OutcomeKind::ignored, e.what());
            }
            transition(go.target, std::move(ctx));
            return outcome(OutcomeKind::state_changed);
          },
          [&](const option::AppendTask& a) {
            sequence_.tasks.push_back(a.task);
            save_sequence();
            transition(states::kSequenceMenu, {});
            return outcome(OutcomeKind::state_changed);
          },
          [&](const option::ReplaceTask& r) {
            if (r.slot < sequence_.tasks.size()) sequence_.tasks[r.slot] = r.task;
            save_sequence();
            transition(states::kSequenceMenu, {});
            return outcome(OutcomeKind::state_changed);
          },
          [&](const option::RemoveSlot& r) {
            if (r.slot < sequence_.tasks.size()) {
              sequence_.tasks.erase(sequence_.tasks.begin() + static_cast<std::ptrdiff_t>(r.slot));
            }
            save_sequence();
            transition(states::kSequenceMenu, {});
            return outcome(OutcomeKind::state_changed);
          },
          [&](const option::BindMacro& b) {
            macro_.slots.at(static_cast<std::size_t>(b.slot - 1)) = b.task;
            save_macro();
            transition(states::kMacroMenu, {});
            return outcome(OutcomeKind::state_changed);
          },
          [&](const option::ToggleDelete&) {
            context_.delete_mode = !context_.delete_mode;
            refresh();
            mutable_active().selector = 0;
            return outcome(OutcomeKind::action_effect,
                           context_.delete_mode ? "delete mode on" : "delete mode off");
          },
          [&](const option::DeleteTask& d) {
            store_->delete_task(d.task);
            context_.delete_mode = false;
            refresh();
            mutable_active().selector = 0;
            return outcome(OutcomeKind::action_effect, "deleted " + d.task);
          },
          [&](const option::Placeholder&) { return outcome(OutcomeKind::ignored, "placeholder"); },
      },
      action);
}

TransitionOutcome Machine::fire_macro(int slot) {
  if (current_ != states::kMacroAction || slot < 1 || slot > 3) {
    return outcome(OutcomeKind::ignored);
  }
  const auto& bound = macro_.slots[static_cast<std::size_t>(slot - 1)];
  if (!bound) return outcome(OutcomeKind::ignored, "G" + std::to_string(slot) + " unbound");
  if (robot_->busy()) return outcome(OutcomeKind::ignored, "robot busy");
  store::Task task;
  try {
    task = store_->load_task(*bound);
  } catch (const store::StoreError& e) {
    return outcome(OutcomeKind::ignored, e.what());
  }
  if (!robot_->play(task)) return outcome(OutcomeKind::ignored, "robot busy");
  context_.firing = slot;
  return outcome(OutcomeKind::action_effect, "playing " + *bound);
}

TransitionOutcome Machine::dispatch_event(const Event& event) {
  if (!has_state(event.target)) {
    throw EventRejected("unknown state '" + event.target + "'");
  }
  const FsmState& target = states_.at(event.target);
  const bool self = event.target == current_;

  if (const auto* opt = std::get_if<OptionArg>(&event.argument)) {
    if (target.kind != StateKind::menu) {
      throw EventRejected("option argument not accepted by '" + event.target + "'");
    }
    if (self) {
      if (opt->index >= target.options.size()) throw EventRejected("option index out of range");
      now_ = event.timestamp;
      return select(opt->index);
    }
    PendingContext ctx;
    validate_entry(event.target, ctx);
    if (opt->index >= build_options(event.target, ctx).size()) {
      throw EventRejected("option index out of range");
    }
    now_ = event.timestamp;
    transition(event.target, ctx);
    select(opt->index);
    return outcome(OutcomeKind::state_changed);
  }

  if (const auto* ms = std::get_if<MacroSlotArg>(&event.argument);
      ms && event.target == states::kMacroAction) {
    if (ms->slot < 1 || ms->slot > 3) throw EventRejected("macro slot must be 1..3");
    now_ = event.timestamp;
    if (self) return fire_macro(ms->slot);
    transition(states::kMacroAction, {});
    fire_macro(ms->slot);
    return outcome(OutcomeKind::state_changed);
  }

  PendingContext ctx = context_from(event.target, event.argument);
  validate_entry(event.target, ctx);
  now_ = event.timestamp;
  transition(event.target, std::move(ctx));
  return outcome(OutcomeKind::state_changed);
}

TransitionOutcome Machine::system_transition(SystemTrigger trigger) {
  switch (trigger) {
    case SystemTrigger::playback_finished:
      if (current_ == states::kPlaybackAction) {
        if (!context_.queue.empty() && context_.position + 1 < context_.queue.size()) {
          ++context_.position;
          context_.paused = false;
          context_.task = context_.queue[context_.position];
          try {
            if (robot_->play(store_->load_task(*context_.task))) {
              return outcome(OutcomeKind::action_effect, "playing " + *context_.task);
            }
          } catch (const store::StoreError&) {
          }
        }
        transition(origin_menu(), {});
        return outcome(OutcomeKind::state_changed);
      }
      if (current_ == states::kMacroAction && context_.firing) {
        context_.firing.reset();
        return outcome(OutcomeKind::action_effect, "macro task finished");
      }
      break;
    case SystemTrigger::sequence_finished:
      if (current_ == states::kPlaybackAction && !context_.queue.empty()) {
        transition(origin_menu(), {});
        return outcome(OutcomeKind::state_changed);
      }
      break;
    case SystemTrigger::record_saved:
      if (current_ == states::kRecordAction) {
        transition(states::kRecordMenu, {});
        return outcome(OutcomeKind::state_changed);
      }
      break;
  }
  return outcome(OutcomeKind::ignored, std::string("trigger ") + std::string(to_string(trigger)) +
                                           " incompatible with " + current_);
}

TransitionOutcome Machine::press_button(Button button, double timestamp) {
  switch (button) {
    case Button::pause:
      if (current_ != states::kPlaybackAction) break;
      now_ = timestamp;
      return apply({TransitionKind::pause_resume});
    case Button::stop:
      if (current_ == states::kRecordAction) return dispatch_event({states::kRecordMenu, {}, timestamp});
      if (current_ == states::kPlaybackAction) return dispatch_event({origin_menu(), {}, timestamp});
      if (current_ == states::kMacroAction) return dispatch_event({states::kMacroMenu, {}, timestamp});
      break;
    case Button::g1:
    case Button::g2:
    case Button::g3:
      if (current_ != states::kMacroAction) break;
      return dispatch_event(
          {states::kMacroAction, MacroSlotArg{static_cast<int>(button) - static_cast<int>(Button::g1) + 1},
           timestamp});
  }
  return outcome(OutcomeKind::ignored, "button " + std::string(to_string(button)) +
                                           " not available in " + current_);
}

Event Machine::activation_event(std::size_t index, double timestamp) const {
  const FsmState& s = active();
  if (s.kind != StateKind::menu || index >= s.options.size()) {
    throw std::out_of_range("no option " + std::to_string(index) + " in " + current_);
  }
  if (const auto* go = std::get_if<option::GoTo>(&s.options[index].action)) {
    EventArgument arg;
    if (go->task) {
      arg = TaskArg{*go->task};
    } else if (go->sequence) {
      arg = SequenceArg{*go->sequence};
    } else if (go->sequence_slot) {
      arg = SequenceSlotArg{*go->sequence_slot};
    } else if (go->macro_slot) {
      arg = MacroSlotArg{*go->macro_slot};
    }
    return Event{go->target, std::move(arg), timestamp};
  }
  return Event{current_, OptionArg{index}, timestamp};
}

// ---------------------------------------------------------------------------
// Entry and exit

PendingContext Machine::context_from(const StateId& target, const EventArgument& argument) const {
  PendingContext ctx;
  auto reject = [&] {
    throw EventRejected("argument not accepted by '" + target + "'");
  };
  std::visit(overloaded{
                 [](const std::monostate&) {},
                 [&](const TaskArg& a) {
                   if (target != states::kRecordAction && target != states::kPlaybackAction) reject();
                   ctx.task = a.name;
                 },
                 [&](const SequenceArg& a) {
                   if (target != states::kPlaybackAction) reject();
                   ctx.sequence = a.name;
                 },
                 [&](const MacroSlotArg& a) {
                   if (target != states::kMacroSlotSubmenu) reject();
                   ctx.macro_slot = a.slot;
                 },
                 [&](const SequenceSlotArg& a) {
                   if (target != states::kAddTaskSubmenu) reject();
                   ctx.sequence_slot = a.index;
                 },
                 [&](const OptionArg&) { reject(); },
             },
             argument);
  return ctx;
}

void Machine::validate_entry(const StateId& id, const PendingContext& ctx) const {
  if (id == states::kRecordAction) {
    if (!ctx.task) throw EventRejected("record_action requires a task name");
    if (!store::is_valid_name(*ctx.task)) throw EventRejected("invalid task name '" + *ctx.task + "'");
  } else if (id == states::kPlaybackAction) {
    if (ctx.task) {
      if (!store_->has_task(*ctx.task)) throw EventRejected("task '" + *ctx.task + "' not found");
    } else if (ctx.sequence) {
      std::optional<store::SequenceDef> seq;
      if (*ctx.sequence == kWorkingSequence) {
        seq = sequence_;
      } else {
        seq = store_->find_sequence(*ctx.sequence);
      }
      if (!seq) throw EventRejected("sequence '" + *ctx.sequence + "' not found");
      if (seq->tasks.empty()) throw EventRejected("sequence '" + *ctx.sequence + "' is empty");
      for (const auto& name : seq->tasks) {
        if (!store_->has_task(name)) throw EventRejected(store::MissingTaskError(seq->name, name).what());
      }
    } else {
      throw EventRejected("playback_action requires a task or sequence");
    }
  } else if (id == states::kMacroSlotSubmenu) {
    if (!ctx.macro_slot || *ctx.macro_slot < 1 || *ctx.macro_slot > 3) {
      throw EventRejected("macro_slot_submenu requires a macro slot 1..3");
    }
  } else if (id == states::kAddTaskSubmenu) {
    if (ctx.sequence_slot && *ctx.sequence_slot >= sequence_.tasks.size()) {
      throw EventRejected("sequence slot out of range");
    }
  }
}

void Machine::transition(const StateId& id, PendingContext ctx) {
  exit_current();
  enter(id, std::move(ctx));
}

void Machine::exit_current() {
  if (current_ == states::kRecordAction) {
    if (robot_->recording()) {
      robot::Recording rec = robot_->stop_recording();
      if (context_.task) {
        store_->save_task(store::Task{*context_.task, {std::move(rec.trajectory)}, now_});
      }
    }
  } else if (current_ == states::kPlaybackAction || current_ == states::kMacroAction) {
    if (robot_->busy()) robot_->stop();
  }
}

void Machine::enter(const StateId& id, PendingContext ctx) {
  current_ = id;
  context_ = std::move(ctx);
  FsmState& s = states_.at(id);
  s.selector = 0;
  s.title = build_title(id, context_);
  s.options = build_options(id, context_);

  if (id == states::kRecordAction) {
    robot_->start_recording(robot::Arm::right);
  } else if (id == states::kPlaybackAction) {
    if (context_.sequence) {
      const store::SequenceDef seq = *context_.sequence == kWorkingSequence
                                         ? sequence_
                                         : store_->load_sequence(*context_.sequence);
      context_.queue = seq.tasks;
      context_.position = 0;
      context_.task = context_.queue.front();
    }
    robot_->play(store_->load_task(*context_.task));
  }
}

StateId Machine::origin_menu() const {
  if (current_ == states::kPlaybackAction && context_.sequence) return states::kSequenceMenu;
  return states::kPlaybackMenu;
}

void Machine::save_sequence() { store_->save_sequence(sequence_); }
void Machine::save_macro() { store_->save_macro(macro_); }

void Machine::refresh() {
  FsmState& s = mutable_active();
  s.title = build_title(current_, context_);
  s.options = build_options(current_, context_);
  if (s.kind == StateKind::menu && s.selector >= s.options.size()) s.selector = s.options.size() - 1;
}

// ---------------------------------------------------------------------------
// Projection and checks

GuiStateSnapshot Machine::snapshot() const {
  const FsmState& s = active();
  GuiStateSnapshot snap;
  snap.state = s.id;
  snap.kind = s.kind;
  snap.title = s.title;
  for (const auto& o : s.options) {
    snap.options.push_back(o.label);
    snap.option_ids.push_back(o.id);
  }
  snap.selector = s.selector;

  const PendingContext& c = context_;
  if (current_ == states::kRecordAction) {
    snap.context = "recording " + c.task.value_or("?");
  } else if (current_ == states::kPlaybackAction) {
    if (c.paused) {
      snap.context = "paused";
    } else if (!c.queue.empty()) {
      snap.context = "playing " + c.task.value_or("?") + " (" + std::to_string(c.position + 1) + "/" +
                     std::to_string(c.queue.size()) + ")";
    } else {
      snap.context = "playing " + c.task.value_or("?");
    }
  } else if (current_ == states::kMacroAction) {
    snap.context = c.firing ? "playing G" + std::to_string(*c.firing) : "waiting";
  } else if (current_ == states::kAddTaskSubmenu) {
    snap.context = c.sequence_slot ? "replace " + std::to_string(*c.sequence_slot + 1) : "append";
  } else if (current_ == states::kMacroSlotSubmenu) {
    snap.context = "bind G" + std::to_string(c.macro_slot.value_or(0));
  } else if (c.delete_mode) {
    snap.context = "delete";
  }
  return snap;
}

void Machine::check_invariants() const {
  if (!has_state(current_)) throw std::logic_error("current state '" + current_ + "' not installed");
  for (const auto& [id, s] : states_) {
    if (s.handlers.size() > static_cast<std::size_t>(kHandlerSlots)) {
      throw std::logic_error("state '" + id + "' has more than four handlers");
    }
    for (const auto& [slot, spec] : s.handlers) {
      if (slot < 1 || slot > kHandlerSlots) throw std::logic_error("slot out of range in '" + id + "'");
    }
    if (s.kind == StateKind::menu && (s.options.empty() || s.selector >= s.options.size())) {
      throw std::logic_error("menu '" + id + "' has an invalid selector");
    }
  }
}

}  // namespace hri::fsm
