#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hri/fsm/commands.hpp"
#include "hri/fsm/robot_port.hpp"
#include "hri/store/task_store.hpp"

namespace hri::fsm {

enum class StateKind { menu, action };
std::string_view to_string(StateKind kind);

/// What a handler slot does when its signal arrives.
enum class TransitionKind {
  selector_up,
  selector_down,
  select_current,
  pause_resume,
  stop_back,
  macro_fire,
};

struct TransitionSpec {
  TransitionKind kind = TransitionKind::select_current;
  int macro_slot = 0;  // macro_fire only

  friend bool operator==(const TransitionSpec&, const TransitionSpec&) = default;
};

// Option actions. Each menu option carries exactly one.
namespace option {
/// Activates another state; the optional fields become its pending context.
struct GoTo {
  StateId target;
  std::optional<std::string> task{};
  std::optional<std::string> sequence{};
  std::optional<std::size_t> sequence_slot{};
  std::optional<int> macro_slot{};
  friend bool operator==(const GoTo&, const GoTo&) = default;
};
struct AppendTask {
  std::string task;
  friend bool operator==(const AppendTask&, const AppendTask&) = default;
};
struct ReplaceTask {
  std::size_t slot = 0;
  std::string task;
  friend bool operator==(const ReplaceTask&, const ReplaceTask&) = default;
};
struct RemoveSlot {
  std::size_t slot = 0;
  friend bool operator==(const RemoveSlot&, const RemoveSlot&) = default;
};
struct BindMacro {
  int slot = 1;
  std::optional<std::string> task;  // nullopt clears the slot
  friend bool operator==(const BindMacro&, const BindMacro&) = default;
};
struct ToggleDelete {
  friend bool operator==(const ToggleDelete&, const ToggleDelete&) = default;
};
struct DeleteTask {
  std::string task;
  friend bool operator==(const DeleteTask&, const DeleteTask&) = default;
};
/// Shown in place of an empty task list; selecting it does nothing.
struct Placeholder {
  friend bool operator==(const Placeholder&, const Placeholder&) = default;
};
}  // namespace option

using OptionAction = std::variant<option::GoTo, option::AppendTask, option::ReplaceTask,
                                  option::RemoveSlot, option::BindMacro, option::ToggleDelete,
                                  option::DeleteTask, option::Placeholder>;

struct MenuOption {
  std::string id;
  std::string label;
  OptionAction action;

  friend bool operator==(const MenuOption&, const MenuOption&) = default;
};

struct FsmState {
  StateId id;
  StateKind kind = StateKind::menu;
  std::string title;
  std::vector<MenuOption> options;
  std::size_t selector = 0;
  /// Slot 1..4 -> transition. Absent slots are inert.
  std::map<int, TransitionSpec> handlers;

  std::size_t transition_count() const { return handlers.size(); }
};

/// Payload carried by the active state.
struct PendingContext {
  std::optional<std::string> task;
  std::optional<std::string> sequence;
  std::vector<std::string> queue;  // sequence being played
  std::size_t position = 0;        // index into queue
  std::optional<std::size_t> sequence_slot;
  std::optional<int> macro_slot;
  std::optional<int> firing;  // macro slot currently playing
  bool paused = false;
  bool delete_mode = false;

  friend bool operator==(const PendingContext&, const PendingContext&) = default;
};

/// Renderable projection of the active state.
struct GuiStateSnapshot {
  StateId state;
  StateKind kind = StateKind::menu;
  std::string title;
  std::vector<std::string> options;
  std::vector<std::string> option_ids;
  std::size_t selector = 0;
  std::string context;

  friend bool operator==(const GuiStateSnapshot&, const GuiStateSnapshot&) = default;
};

enum class OutcomeKind { state_changed, selector_moved, ignored, action_effect };
std::string_view to_string(OutcomeKind kind);

struct TransitionOutcome {
  OutcomeKind kind = OutcomeKind::ignored;
  std::string detail;
};

inline constexpr const char* kWorkingSequence = "default";
inline constexpr const char* kWorkingMacro = "default";

/// The interaction FSM: menu and action states, four handler slots per state,
/// signal and event dispatch, and system-triggered transitions. The store and
/// robot must outlive the machine.
class Machine {
 public:
  Machine(store::TaskStore& store, RobotPort& robot);

  /// Installs a state. Throws std::logic_error when it breaks a structural
  /// invariant (more than four handlers, slot out of range, empty menu).
  void add_state(FsmState state);
  void set_initial(const StateId& id);

  const StateId& current() const { return current_; }
  const FsmState& active() const;
  const FsmState& state(const StateId& id) const;
  bool has_state(const StateId& id) const { return states_.contains(id); }
  const std::map<StateId, FsmState>& states() const { return states_; }
  const PendingContext& context() const { return context_; }
  const store::SequenceDef& working_sequence() const { return sequence_; }
  const store::MacroBinding& macro() const { return macro_; }

  TransitionOutcome dispatch_signal(const Signal& signal);
  /// Throws EventRejected for unknown targets or invalid arguments; the
  /// machine is unchanged in that case.
  TransitionOutcome dispatch_event(const Event& event);
  TransitionOutcome system_transition(SystemTrigger trigger);
  /// Named touch button of an action state. Unknown for the state: ignored.
  TransitionOutcome press_button(Button button, double timestamp = 0.0);

  /// The single event equivalent to selecting option `index` of the active
  /// menu.
  Event activation_event(std::size_t index, double timestamp = 0.0) const;

  GuiStateSnapshot snapshot() const;

  /// Recomputes the active menu's options from the store.
  void refresh();

  /// Checks every structural invariant; throws std::logic_error on violation.
  void check_invariants() const;

 private:
  friend Machine build_interface_fsm(store::TaskStore&, RobotPort&);

  FsmState& mutable_active();
  std::vector<MenuOption> build_options(const StateId& id, const PendingContext& ctx) const;
  std::string build_title(const StateId& id, const PendingContext& ctx) const;
  std::string fresh_task_name() const;
  StateId origin_menu() const;

  TransitionOutcome select(std::size_t index);
  TransitionOutcome apply(const TransitionSpec& spec);
  TransitionOutcome fire_macro(int slot);
  void validate_entry(const StateId& id, const PendingContext& ctx) const;
  void transition(const StateId& id, PendingContext ctx);
  void exit_current();
  void enter(const StateId& id, PendingContext ctx);
  PendingContext context_from(const StateId& target, const EventArgument& argument) const;
  void save_sequence();
  void save_macro();

  store::TaskStore* store_;
  RobotPort* robot_;
  std::map<StateId, FsmState> states_;
  StateId current_;
  PendingContext context_;
  store::SequenceDef sequence_;
  store::MacroBinding macro_;
  double now_ = 0.0;  // timestamp of the last input
};

/// Builds the full interface: main menu, record/playback/sequence/macro menus
/// with their submenus, and the three action states. Starts in main_menu.
Machine build_interface_fsm(store::TaskStore& store, RobotPort& robot);

}  // namespace hri::fsm
