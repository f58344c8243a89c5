#include <cmath>
#include <initializer_list>

#include "json.hpp"

#include "hri/bus/message.hpp"

namespace hri::bus {

using json = nlohmann::ordered_json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void fail(const std::string& what) { throw DecodeError(what); }

/// Rejects keys outside `allowed` and reports the first absent `required` key.
void check_fields(const json& obj, std::string_view where, std::initializer_list<std::string_view> required,
                  std::initializer_list<std::string_view> optional = {}) {
  if (!obj.is_object()) fail(std::string(where) + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (auto k : required) known = known || k == key;
    for (auto k : optional) known = known || k == key;
    if (!known) fail("unexpected field '" + key + "' in " + std::string(where));
  }
  for (auto k : required) {
    if (!obj.contains(k)) fail("missing field '" + std::string(k) + "' in " + std::string(where));
  }
}

double get_number(const json& obj, const char* key) {
  const json& v = obj.at(key);
  if (!v.is_number()) fail(std::string("field '") + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(std::string("field '") + key + "' must be finite");
  return d;
}

std::string get_string(const json& obj, const char* key) {
  const json& v = obj.at(key);
  if (!v.is_string()) fail(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

std::uint64_t get_unsigned(const json& obj, const char* key) {
  const json& v = obj.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    fail(std::string("field '") + key + "' must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

robot::Vec3 get_vec3(const json& obj, const char* key) {
  const json& v = obj.at(key);
  if (!v.is_array() || v.size() != 3) fail(std::string("field '") + key + "' must be an array of 3 numbers");
  robot::Vec3 out{};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!v[i].is_number()) fail(std::string("field '") + key + "' must be an array of 3 numbers");
    out[i] = v[i].get<double>();
    if (!std::isfinite(out[i])) fail(std::string("field '") + key + "' must be finite");
  }
  return out;
}

robot::Gripper get_gripper(const json& obj, const char* key) {
  auto g = robot::parse_gripper(get_string(obj, key));
  if (!g) fail(std::string("field '") + key + "' must be \"open\" or \"closed\"");
  return *g;
}

robot::Arm get_arm(const json& obj, const char* key) {
  auto a = robot::parse_arm(get_string(obj, key));
  if (!a) fail(std::string("field '") + key + "' must be \"left\" or \"right\"");
  return *a;
}

void require_finite(double d, const char* what) {
  if (!std::isfinite(d)) throw EncodeError(std::string(what) + " must be finite");
}

void require_finite(const robot::Vec3& v, const char* what) {
  for (double d : v) require_finite(d, what);
}

json vec(const robot::Vec3& v) { return json::array({v[0], v[1], v[2]}); }

json pose_json(const robot::Pose& p) {
  require_finite(p.position, "position");
  json out;
  out["position"] = vec(p.position);
  out["gripper"] = std::string(robot::to_string(p.gripper));
  return out;
}

robot::Pose parse_pose(const json& obj, const char* where) {
  check_fields(obj, where, {"position", "gripper"});
  return {get_vec3(obj, "position"), get_gripper(obj, "gripper")};
}

json argument_json(const fsm::EventArgument& arg) {
  return std::visit(overloaded{
                        [](std::monostate) { return json(nullptr); },
                        [](const fsm::TaskArg& a) { return json{{"task", a.name}}; },
                        [](const fsm::SequenceArg& a) { return json{{"sequence", a.name}}; },
                        [](const fsm::OptionArg& a) { return json{{"option", a.index}}; },
                        [](const fsm::MacroSlotArg& a) { return json{{"macro_slot", a.slot}}; },
                        [](const fsm::SequenceSlotArg& a) { return json{{"sequence_slot", a.index}}; },
                    },
                    arg);
}

fsm::EventArgument parse_argument(const json& v) {
  if (v.is_null()) return std::monostate{};
  if (!v.is_object() || v.size() != 1) fail("field 'arg' must be null or an object with exactly one field");
  const std::string key = v.begin().key();
  if (key == "task") return fsm::TaskArg{get_string(v, "task")};
  if (key == "sequence") return fsm::SequenceArg{get_string(v, "sequence")};
  if (key == "option") return fsm::OptionArg{static_cast<std::size_t>(get_unsigned(v, "option"))};
  if (key == "sequence_slot") return fsm::SequenceSlotArg{static_cast<std::size_t>(get_unsigned(v, "sequence_slot"))};
  if (key == "macro_slot") {
    const auto slot = get_unsigned(v, "macro_slot");
    if (slot < 1 || slot > 3) fail("field 'macro_slot' must be 1..3");
    return fsm::MacroSlotArg{static_cast<int>(slot)};
  }
  fail("unexpected field '" + key + "' in arg");
}

std::optional<robot::Arm> parse_optional_arm(const json& obj, const char* key) {
  if (obj.at(key).is_null()) return std::nullopt;
  return get_arm(obj, key);
}

json optional_arm(const std::optional<robot::Arm>& arm) {
  return arm ? json(std::string(robot::to_string(*arm))) : json(nullptr);
}

std::vector<std::string> get_strings(const json& obj, const char* key) {
  const json& v = obj.at(key);
  if (!v.is_array()) fail(std::string("field '") + key + "' must be an array of strings");
  std::vector<std::string> out;
  for (const auto& s : v) {
    if (!s.is_string()) fail(std::string("field '") + key + "' must be an array of strings");
    out.push_back(s.get<std::string>());
  }
  return out;
}

bool valid_robot_event(std::string_view kind) {
  return kind == "playback_finished" || kind == "record_saved" || kind == "attached" || kind == "detached";
}

bool valid_robot_status(std::string_view s) {
  return s == "idle" || s == "playing" || s == "paused" || s == "recording";
}

bool valid_session_op(std::string_view op) {
  return op == "subscribe" || op == "unsubscribe" || op == "hello" || op == "warning" || op == "error" ||
         op == "trigger";
}

json payload_json(const Payload& payload) {
  return std::visit(
      overloaded{
          [](const ImuPayload& p) {
            require_finite(p.accel, "accel");
            require_finite(p.gyro, "gyro");
            json out;
            out["accel"] = vec(p.accel);
            out["gyro"] = vec(p.gyro);
            return out;
          },
          [](const TouchMessage& p) {
            if (p.option.has_value() == p.button.has_value()) {
              throw EncodeError("touch needs exactly one of option and button");
            }
            json out;
            if (p.option) out["option"] = *p.option;
            if (p.button) out["button"] = std::string(fsm::to_string(*p.button));
            return out;
          },
          [](const SignalPayload& p) {
            if (p.slot < 1 || p.slot > fsm::kHandlerSlots) throw EncodeError("signal slot must be 1..4");
            json out;
            out["slot"] = p.slot;
            if (p.gesture) out["gesture"] = *p.gesture;
            if (p.confidence) {
              require_finite(*p.confidence, "confidence");
              out["confidence"] = *p.confidence;
            }
            return out;
          },
          [](const EventPayload& p) {
            if (p.target.empty()) throw EncodeError("event target must not be empty");
            json out;
            out["target"] = p.target;
            out["arg"] = argument_json(p.argument);
            return out;
          },
          [](const GuiPayload& p) {
            if (p.options.size() != p.option_ids.size()) throw EncodeError("gui options and ids differ in length");
            json out;
            out["state"] = p.state;
            out["kind"] = std::string(fsm::to_string(p.kind));
            out["title"] = p.title;
            out["options"] = p.options;
            out["option_ids"] = p.option_ids;
            out["selector"] = p.selector;
            out["context"] = p.context;
            return out;
          },
          [](const RobotStatePayload& p) {
            if (!valid_robot_status(p.status)) throw EncodeError("unknown robot status '" + p.status + "'");
            require_finite(p.cube, "cube");
            json out;
            out["type"] = "state";
            out["left"] = pose_json(p.left);
            out["right"] = pose_json(p.right);
            out["cube"] = vec(p.cube);
            out["attached"] = optional_arm(p.attached);
            out["status"] = p.status;
            return out;
          },
          [](const RobotEventPayload& p) {
            if (!valid_robot_event(p.kind)) throw EncodeError("unknown robot event '" + p.kind + "'");
            json out;
            out["type"] = "event";
            out["event"] = p.kind;
            out["arm"] = optional_arm(p.arm);
            return out;
          },
          [](const GuidancePayload& p) {
            require_finite(p.position, "position");
            json out;
            out["position"] = vec(p.position);
            out["gripper"] = std::string(robot::to_string(p.gripper));
            return out;
          },
          [](const SessionPayload& p) {
            if (!valid_session_op(p.op)) throw EncodeError("unknown session op '" + p.op + "'");
            json out;
            out["op"] = p.op;
            json channels = json::array();
            for (Channel c : p.channels) channels.push_back(std::string(to_string(c)));
            out["channels"] = channels;
            out["text"] = p.text;
            return out;
          },
      },
      payload);
}

Payload parse_payload(Channel channel, const json& p) {
  switch (channel) {
    case Channel::imu:
      check_fields(p, "imu payload", {"accel", "gyro"});
      return ImuPayload{get_vec3(p, "accel"), get_vec3(p, "gyro")};
    case Channel::touch: {
      check_fields(p, "touch payload", {}, {"option", "button"});
      if (p.contains("option") == p.contains("button")) fail("touch payload needs exactly one of option and button");
      TouchMessage t;
      if (p.contains("option")) t.option = get_unsigned(p, "option");
      if (p.contains("button")) {
        t.button = fsm::parse_button(get_string(p, "button"));
        if (!t.button) fail("unknown button '" + p.at("button").get<std::string>() + "'");
      }
      return t;
    }
    case Channel::signal: {
      check_fields(p, "signal payload", {"slot"}, {"gesture", "confidence"});
      SignalPayload s;
      const auto slot = get_unsigned(p, "slot");
      if (slot < 1 || slot > static_cast<std::uint64_t>(fsm::kHandlerSlots)) fail("field 'slot' must be 1..4");
      s.slot = static_cast<int>(slot);
      if (p.contains("gesture")) s.gesture = get_string(p, "gesture");
      if (p.contains("confidence")) s.confidence = get_number(p, "confidence");
      return s;
    }
    case Channel::event: {
      check_fields(p, "event payload", {"target", "arg"});
      EventPayload e{get_string(p, "target"), parse_argument(p.at("arg"))};
      if (e.target.empty()) fail("field 'target' must not be empty");
      return e;
    }
    case Channel::gui: {
      check_fields(p, "gui payload", {"state", "kind", "title", "options", "option_ids", "selector", "context"});
      GuiPayload g;
      g.state = get_string(p, "state");
      const std::string kind = get_string(p, "kind");
      if (kind == "menu") {
        g.kind = fsm::StateKind::menu;
      } else if (kind == "action") {
        g.kind = fsm::StateKind::action;
      } else {
        fail("field 'kind' must be \"menu\" or \"action\"");
      }
      g.title = get_string(p, "title");
      g.options = get_strings(p, "options");
      g.option_ids = get_strings(p, "option_ids");
      if (g.options.size() != g.option_ids.size()) fail("fields 'options' and 'option_ids' differ in length");
      g.selector = static_cast<std::size_t>(get_unsigned(p, "selector"));
      g.context = get_string(p, "context");
      return g;
    }
    case Channel::robot: {
      if (!p.is_object() || !p.contains("type")) fail("missing field 'type' in robot payload");
      const std::string type = get_string(p, "type");
      if (type == "state") {
        check_fields(p, "robot payload", {"type", "left", "right", "cube", "attached", "status"});
        RobotStatePayload r;
        r.left = parse_pose(p.at("left"), "left");
        r.right = parse_pose(p.at("right"), "right");
        r.cube = get_vec3(p, "cube");
        r.attached = parse_optional_arm(p, "attached");
        r.status = get_string(p, "status");
        if (!valid_robot_status(r.status)) fail("unknown robot status '" + r.status + "'");
        return r;
      }
      if (type == "event") {
        check_fields(p, "robot payload", {"type", "event", "arm"});
        RobotEventPayload r{get_string(p, "event"), parse_optional_arm(p, "arm")};
        if (!valid_robot_event(r.kind)) fail("unknown robot event '" + r.kind + "'");
        return r;
      }
      fail("field 'type' must be \"state\" or \"event\"");
    }
    case Channel::guidance:
      check_fields(p, "guidance payload", {"position", "gripper"});
      return GuidancePayload{get_vec3(p, "position"), get_gripper(p, "gripper")};
    case Channel::session: {
      check_fields(p, "session payload", {"op"}, {"channels", "text"});
      SessionPayload s;
      s.op = get_string(p, "op");
      if (!valid_session_op(s.op)) fail("unknown session op '" + s.op + "'");
      if (p.contains("channels")) {
        for (const auto& name : get_strings(p, "channels")) {
          auto c = parse_channel(name);
          if (!c) fail("unknown channel '" + name + "'");
          s.channels.push_back(*c);
        }
      }
      if (p.contains("text")) s.text = get_string(p, "text");
      return s;
    }
  }
  fail("unknown channel");
}

}  // namespace

std::string_view to_string(Channel channel) {
  switch (channel) {
    case Channel::imu: return "imu";
    case Channel::touch: return "touch";
    case Channel::signal: return "signal";
    case Channel::event: return "event";
    case Channel::gui: return "gui";
    case Channel::robot: return "robot";
    case Channel::guidance: return "guidance";
    case Channel::session: return "session";
  }
  return "";
}

std::optional<Channel> parse_channel(std::string_view text) {
  for (Channel c : kAllChannels) {
    if (to_string(c) == text) return c;
  }
  return std::nullopt;
}

Channel channel_of(const Payload& payload) {
  return std::visit(overloaded{
                        [](const ImuPayload&) { return Channel::imu; },
                        [](const TouchMessage&) { return Channel::touch; },
                        [](const SignalPayload&) { return Channel::signal; },
                        [](const EventPayload&) { return Channel::event; },
                        [](const GuiPayload&) { return Channel::gui; },
                        [](const RobotStatePayload&) { return Channel::robot; },
                        [](const RobotEventPayload&) { return Channel::robot; },
                        [](const GuidancePayload&) { return Channel::guidance; },
                        [](const SessionPayload&) { return Channel::session; },
                    },
                    payload);
}

std::string encode_message(const BusMessage& message) {
  if (message.source.empty()) throw EncodeError("source must not be empty");
  require_finite(message.timestamp, "timestamp");
  json out;
  out["ch"] = std::string(to_string(message.channel()));
  out["src"] = message.source;
  out["seq"] = message.seq;
  out["t"] = message.timestamp;
  out["p"] = payload_json(message.payload);
  return out.dump() + "\n";
}

BusMessage decode_message(std::string_view line) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  if (line.empty()) fail("empty line");
  if (line.find('\n') != std::string_view::npos) fail("embedded newline");

  json root;
  try {
    root = json::parse(line);
  } catch (const json::parse_error& e) {
    fail(std::string("malformed line: ") + e.what());
  }
  if (!root.is_object()) fail("message must be an object");
  if (root.contains("ch")) {
    const json& ch = root.at("ch");
    if (!ch.is_string() || !parse_channel(ch.get<std::string>())) fail("unknown channel");
  }
  check_fields(root, "message", {"ch", "src", "seq", "t", "p"});

  BusMessage m;
  const Channel channel = *parse_channel(root.at("ch").get<std::string>());
  m.source = get_string(root, "src");
  if (m.source.empty()) fail("field 'src' must not be empty");
  m.seq = get_unsigned(root, "seq");
  m.timestamp = get_number(root, "t");
  m.payload = parse_payload(channel, root.at("p"));
  return m;
}

std::optional<std::string> SequenceTracker::observe(const std::string& source, std::uint64_t seq) {
  auto it = last_.find(source);
  std::optional<std::string> warning;
  if (it != last_.end() && seq <= it->second) {
    warning = "non-monotonic seq from '" + source + "': " + std::to_string(seq) + " after " +
              std::to_string(it->second);
  }
  last_[source] = seq;
  return warning;
}

}  // namespace hri::bus
