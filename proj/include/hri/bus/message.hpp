#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hri/fsm/commands.hpp"
#include "hri/fsm/machine.hpp"
#include "hri/robot/types.hpp"

namespace hri::bus {

enum class Channel { imu, touch, signal, event, gui, robot, guidance, session };

inline constexpr Channel kAllChannels[] = {Channel::imu, Channel::touch,  Channel::signal,   Channel::event,
                                           Channel::gui, Channel::robot, Channel::guidance, Channel::session};

std::string_view to_string(Channel channel);
std::optional<Channel> parse_channel(std::string_view text);

struct ImuPayload {
  robot::Vec3 accel{};
  robot::Vec3 gyro{};
  friend bool operator==(const ImuPayload&, const ImuPayload&) = default;
};

/// A touchscreen press. Exactly one of option / button is set; the press time
/// is the envelope timestamp.
struct TouchMessage {
  std::optional<std::uint64_t> option;
  std::optional<fsm::Button> button;
  friend bool operator==(const TouchMessage&, const TouchMessage&) = default;
};

struct SignalPayload {
  int slot = 1;
  std::optional<std::string> gesture;  // "G1".."G4" when produced by a recognizer
  std::optional<double> confidence;
  friend bool operator==(const SignalPayload&, const SignalPayload&) = default;
};

struct EventPayload {
  fsm::StateId target;
  fsm::EventArgument argument;
  friend bool operator==(const EventPayload&, const EventPayload&) = default;
};

using GuiPayload = fsm::GuiStateSnapshot;

struct RobotStatePayload {
  robot::Pose left;
  robot::Pose right;
  robot::Vec3 cube{};
  std::optional<robot::Arm> attached;
  std::string status = "idle";  // idle | playing | paused | recording
  friend bool operator==(const RobotStatePayload&, const RobotStatePayload&) = default;
};

struct RobotEventPayload {
  std::string kind;  // playback_finished | record_saved | attached | detached
  std::optional<robot::Arm> arm;
  friend bool operator==(const RobotEventPayload&, const RobotEventPayload&) = default;
};

struct GuidancePayload {
  robot::Vec3 position{};
  robot::Gripper gripper = robot::Gripper::open;
  friend bool operator==(const GuidancePayload&, const GuidancePayload&) = default;
};

/// Connection control and diagnostics.
struct SessionPayload {
  std::string op;  // subscribe | unsubscribe | hello | warning | error | trigger
  std::vector<Channel> channels;
  std::string text;
  friend bool operator==(const SessionPayload&, const SessionPayload&) = default;
};

using Payload = std::variant<ImuPayload, TouchMessage, SignalPayload, EventPayload, GuiPayload, RobotStatePayload,
                             RobotEventPayload, GuidancePayload, SessionPayload>;

/// Channel a payload type travels on.
Channel channel_of(const Payload& payload);

struct BusMessage {
  std::string source;  // producer id
  std::uint64_t seq = 0;
  double timestamp = 0.0;
  Payload payload;

  Channel channel() const { return channel_of(payload); }
  friend bool operator==(const BusMessage&, const BusMessage&) = default;
};

class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EncodeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One newline-terminated line in canonical form. Throws EncodeError for
/// payloads that would not decode (touch with both or neither field, slot out
/// of range, non-finite numbers).
std::string encode_message(const BusMessage& message);

/// Strict inverse of encode_message. Accepts the line with or without its
/// trailing newline. Throws DecodeError naming the first violation.
BusMessage decode_message(std::string_view line);

/// Per-producer seq audit. A regression is reported but does not block
/// delivery.
class SequenceTracker {
 public:
  /// Returns a warning when seq does not exceed the producer's last seq.
  std::optional<std::string> observe(const std::string& source, std::uint64_t seq);
  void forget(const std::string& source) { last_.erase(source); }

 private:
  std::map<std::string, std::uint64_t> last_;
};

}  // namespace hri::bus
