#pragma once

#include <functional>
#include <string>
#include <vector>

#include "common/rig.hpp"

namespace hri::test {

struct MenuSetup {
  std::string name;
  std::function<void(Rig&)> apply;
};

/// Every menu state, reached with each context it can carry.
inline std::vector<MenuSetup> menu_setups() {
  auto with_sequence = [](Rig& r) {
    r.machine.dispatch_event({fsm::states::kAddTaskSubmenu, {}});
    r.machine.dispatch_event({fsm::states::kAddTaskSubmenu, fsm::OptionArg{0}});
  };
  return {
      {"main", [](Rig&) {}},
      {"record", [](Rig& r) { r.machine.dispatch_event({fsm::states::kRecordMenu, {}}); }},
      {"playback", [](Rig& r) { r.machine.dispatch_event({fsm::states::kPlaybackMenu, {}}); }},
      {"playback-delete",
       [](Rig& r) {
         r.machine.dispatch_event({fsm::states::kPlaybackMenu, {}});
         r.machine.dispatch_event({fsm::states::kPlaybackMenu, fsm::OptionArg{option_index(r.machine.snapshot(), "delete")}});
       }},
      {"sequence-empty", [](Rig& r) { r.machine.dispatch_event({fsm::states::kSequenceMenu, {}}); }},
      {"sequence-one",
       [=](Rig& r) {
         with_sequence(r);
         r.machine.dispatch_event({fsm::states::kSequenceMenu, {}});
       }},
      {"add-append", [](Rig& r) { r.machine.dispatch_event({fsm::states::kAddTaskSubmenu, {}}); }},
      {"add-replace",
       [=](Rig& r) {
         with_sequence(r);
         r.machine.dispatch_event({fsm::states::kAddTaskSubmenu, fsm::SequenceSlotArg{0}});
       }},
      {"macro", [](Rig& r) { r.machine.dispatch_event({fsm::states::kMacroMenu, {}}); }},
      {"macro-slot-1", [](Rig& r) { r.machine.dispatch_event({fsm::states::kMacroSlotSubmenu, fsm::MacroSlotArg{1}}); }},
      {"macro-slot-3", [](Rig& r) { r.machine.dispatch_event({fsm::states::kMacroSlotSubmenu, fsm::MacroSlotArg{3}}); }},
  };
}

}  // namespace hri::test
