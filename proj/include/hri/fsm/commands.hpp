#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

namespace hri::fsm {

using StateId = std::string;

namespace states {
inline const StateId kMainMenu = "main_menu";
inline const StateId kRecordMenu = "record_menu";
inline const StateId kPlaybackMenu = "playback_menu";
inline const StateId kSequenceMenu = "sequence_menu";
inline const StateId kAddTaskSubmenu = "add_task_submenu";
inline const StateId kMacroMenu = "macro_menu";
inline const StateId kMacroSlotSubmenu = "macro_slot_submenu";
inline const StateId kRecordAction = "record_action";
inline const StateId kPlaybackAction = "playback_action";
inline const StateId kMacroAction = "macro_action";
}  // namespace states

inline constexpr int kHandlerSlots = 4;

/// A discrete command routed through the active state's handler slot 1..4.
struct Signal {
  int slot = 1;
  double timestamp = 0.0;

  friend bool operator==(const Signal&, const Signal&) = default;
};

/// Throws std::invalid_argument for slots outside 1..4.
Signal make_signal(int slot, double timestamp = 0.0);

struct TaskArg {
  std::string name;
  friend bool operator==(const TaskArg&, const TaskArg&) = default;
};
struct SequenceArg {
  std::string name;
  friend bool operator==(const SequenceArg&, const SequenceArg&) = default;
};
/// Selects an option of the target menu right after activating it.
struct OptionArg {
  std::size_t index = 0;
  friend bool operator==(const OptionArg&, const OptionArg&) = default;
};
/// Macro slot 1..3 (G1..G3).
struct MacroSlotArg {
  int slot = 1;
  friend bool operator==(const MacroSlotArg&, const MacroSlotArg&) = default;
};
/// Position in the working sequence, used to open the replace submenu.
struct SequenceSlotArg {
  std::size_t index = 0;
  friend bool operator==(const SequenceSlotArg&, const SequenceSlotArg&) = default;
};

using EventArgument =
    std::variant<std::monostate, TaskArg, SequenceArg, OptionArg, MacroSlotArg, SequenceSlotArg>;

/// A valued command that directly activates a target state.
struct Event {
  StateId target;
  EventArgument argument;
  double timestamp = 0.0;

  friend bool operator==(const Event&, const Event&) = default;
};

enum class SystemTrigger { playback_finished, sequence_finished, record_saved };

std::string_view to_string(SystemTrigger trigger);
std::optional<SystemTrigger> parse_trigger(std::string_view text);

/// Named touchscreen buttons shown in action states.
enum class Button { pause, stop, g1, g2, g3 };

std::string_view to_string(Button button);
std::optional<Button> parse_button(std::string_view text);

class EventRejected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hri::fsm
