#include <chrono>
#include <fstream>
#include <random>

#include "json.hpp"

#include "hri/fsm/robot_port.hpp"
#include "hri/harness/live.hpp"
#include "hri/robot/fixtures.hpp"

namespace hri::harness {

// ---------------------------------------------------------------------------
// ScriptedRobot

void ScriptedRobot::start_recording(robot::Arm arm) { recording_ = robot::Trajectory{arm, {}}; }

robot::Recording ScriptedRobot::stop_recording() {
  robot::Recording out{recording_.value_or(robot::Trajectory{}), false};
  out.empty = out.trajectory.waypoints.empty();
  recording_.reset();
  return out;
}

bool ScriptedRobot::play(const store::Task&) {
  if (busy()) return false;
  playing_ = true;
  return true;
}

void ScriptedRobot::guide(const robot::Pose& pose, double t) {
  if (!recording_) return;
  auto& w = recording_->waypoints;
  if (w.empty()) first_t_ = t;
  const double rebased = t - first_t_;
  if (!w.empty() && !(rebased > w.back().t)) return;
  w.push_back({rebased, pose});
}

// ---------------------------------------------------------------------------
// InteractionCore

InteractionCore::InteractionCore(store::TaskStore& store, fsm::RobotPort& robot)
    : machine_(fsm::build_interface_fsm(store, robot)), robot_(robot) {}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

robot::SimConfig sim_config(double tick_rate) {
  robot::SimConfig c;
  c.tick_rate = tick_rate;
  return c;
}

bus::Payload warning(std::string text) { return bus::SessionPayload{"warning", {}, std::move(text)}; }

}  // namespace

std::vector<bus::Payload> InteractionCore::consume(const bus::BusMessage& message) {
  const double t = message.timestamp;
  fsm::TransitionOutcome out;
  try {
    out = std::visit(
        overloaded{
            [&](const bus::TouchMessage& touch) {
              if (touch.button) return machine_.press_button(*touch.button, t);
              const auto& active = machine_.active();
              if (active.kind != fsm::StateKind::menu || *touch.option >= active.options.size()) {
                return fsm::TransitionOutcome{fsm::OutcomeKind::ignored, "no such option"};
              }
              return machine_.dispatch_event(machine_.activation_event(static_cast<std::size_t>(*touch.option), t));
            },
            [&](const bus::SignalPayload& s) { return machine_.dispatch_signal({s.slot, t}); },
            [&](const bus::EventPayload& e) { return machine_.dispatch_event({e.target, e.argument, t}); },
            [&](const bus::RobotEventPayload& r) {
              if (r.kind == "playback_finished") return machine_.system_transition(fsm::SystemTrigger::playback_finished);
              if (r.kind == "record_saved") return machine_.system_transition(fsm::SystemTrigger::record_saved);
              return fsm::TransitionOutcome{};
            },
            [&](const bus::SessionPayload& s) {
              if (s.op != "trigger") return fsm::TransitionOutcome{};
              auto trigger = fsm::parse_trigger(s.text);
              if (!trigger) throw fsm::EventRejected("unknown trigger '" + s.text + "'");
              return machine_.system_transition(*trigger);
            },
            [&](const bus::GuidancePayload& g) {
              if (on_guidance) on_guidance(g, t);
              return fsm::TransitionOutcome{};
            },
            [](const auto&) { return fsm::TransitionOutcome{}; },
        },
        message.payload);
  } catch (const fsm::EventRejected& e) {
    return {warning(std::string("rejected: ") + e.what())};
  }
  if (out.kind == fsm::OutcomeKind::ignored) return {};
  return {machine_.snapshot()};
}

// ---------------------------------------------------------------------------
// Recognizer

std::optional<bus::SignalPayload> RecognizerStage::consume(const bus::ImuPayload& imu, double t) {
  auto detection = recognizer_->ingest({t, imu.accel, imu.gyro});
  if (!detection) return std::nullopt;
  const fsm::Signal s = gesture::gesture_to_signal(*detection);
  return bus::SignalPayload{s.slot, std::string(gesture::to_string(detection->label)), detection->confidence};
}

gesture::TemplateSet default_templates(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amplitude(0.85, 1.15);
  std::vector<gesture::LabeledTrial> trials;
  for (int performer = 0; performer < 11; ++performer) {
    for (int rep = 0; rep < 5; ++rep) {
      for (auto label : gesture::kAllLabels) {
        gesture::SynthesisOptions opts;
        opts.noise = 0.05;
        opts.amplitude = amplitude(rng);
        trials.push_back({label, gesture::synthesize_gesture(label, 0.0, rng, opts)});
      }
    }
  }
  return gesture::calibrate_templates(trials);
}

// ---------------------------------------------------------------------------
// Store summaries

StoreSummary summarize(const store::TaskStore& store) {
  StoreSummary s;
  s.tasks = store.list_tasks();
  if (auto seq = store.find_sequence(fsm::kWorkingSequence)) s.sequence = seq->tasks;
  if (auto macro = store.find_macro(fsm::kWorkingMacro)) s.macro = macro->slots;
  return s;
}

std::string format_summary(const StoreSummary& summary) {
  nlohmann::ordered_json j;
  j["tasks"] = summary.tasks;
  j["sequence"] = summary.sequence;
  nlohmann::ordered_json macro = nlohmann::ordered_json::array();
  for (const auto& slot : summary.macro) macro.push_back(slot ? nlohmann::ordered_json(*slot) : nullptr);
  j["macro"] = macro;
  return j.dump();
}

StoreSummary parse_summary(const std::string& text) {
  StoreSummary s;
  try {
    const auto j = nlohmann::json::parse(text);
    s.tasks = j.at("tasks").get<std::vector<std::string>>();
    s.sequence = j.at("sequence").get<std::vector<std::string>>();
    const auto& macro = j.at("macro");
    if (!macro.is_array() || macro.size() != 3) throw std::invalid_argument("macro must list three slots");
    for (std::size_t i = 0; i < 3; ++i) {
      if (!macro[i].is_null()) s.macro[i] = macro[i].get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed store summary: ") + e.what());
  }
  return s;
}

// ---------------------------------------------------------------------------
// LiveStack

LiveStack::LiveStack(ServeConfig config)
    : config_(std::move(config)), hub_(bus::HubConfig{config_.queue_limit}), sim_(sim_config(config_.tick_rate)) {}

LiveStack::~LiveStack() { stop(); }

std::uint16_t LiveStack::port() const { return server_ ? server_->port() : 0; }

void LiveStack::publish(bus::Payload payload) {
  const double t = sim_.clock();
  switch (bus::channel_of(payload)) {
    case bus::Channel::robot:
      hub_.publish(sim_out_.make(std::move(payload), t));
      break;
    case bus::Channel::signal:
      hub_.publish(recognizer_out_.make(std::move(payload), t));
      break;
    default:
      hub_.publish(core_out_.make(std::move(payload), t));
  }
}

void LiveStack::start() {
  if (running_) return;
  try {
    if (config_.store_dir.empty()) {
      store_ = std::make_unique<store::TaskStore>(store::TaskStore::in_memory());
      robot::load_fixture_tasks(sim_.config(), *store_);
    } else {
      store_ = std::make_unique<store::TaskStore>(store::TaskStore::open(config_.store_dir));
      if (store_->list_tasks().empty()) robot::load_fixture_tasks(sim_.config(), *store_);
    }
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("task store: ") + e.what());
  }
  port_ = std::make_unique<fsm::SimulatorPort>(sim_);
  core_ = std::make_unique<InteractionCore>(*store_, *port_);
  core_->on_guidance = [this](const bus::GuidancePayload& g, double t) {
    if (sim_.recording()) sim_.feed_guidance({g.position, g.gripper}, t);
  };
  if (config_.recognizer) {
    try {
      recognizer_ = std::make_unique<RecognizerStage>(std::make_unique<gesture::TemplateRecognizer>(default_templates()));
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string("recognizer: ") + e.what());
    }
  }
  if (!config_.log_path.empty()) {
    log_ = std::make_unique<std::ofstream>(config_.log_path);
    if (!*log_) throw std::runtime_error("session log: cannot open " + config_.log_path);
    bus::Producer header("serve");
    *log_ << bus::encode_message(header.make(bus::SessionPayload{"hello", {}, format_summary(summarize(*store_))}, 0.0));
    hub_.set_observer([this](const bus::Delivery& d) {
      *log_ << d.line;
      log_->flush();
    });
  }
  inbox_ = hub_.attach("core", {bus::Channel::imu, bus::Channel::touch, bus::Channel::signal, bus::Channel::event,
                                bus::Channel::guidance, bus::Channel::robot, bus::Channel::session});
  server_ = std::make_unique<bus::Server>(hub_, config_.server);
  server_->start();
  running_ = true;
  publish(core_->snapshot());
  thread_ = std::thread([this] { loop(); });
}

void LiveStack::stop() {
  if (!running_.exchange(false)) return;
  if (thread_.joinable()) thread_.join();
  if (server_) server_->stop();
  hub_.detach(inbox_);
  hub_.set_observer(nullptr);
}

void LiveStack::loop() {
  using clock = std::chrono::steady_clock;
  const auto tick = std::chrono::microseconds(static_cast<long>(1e6 / config_.tick_rate));
  auto last = clock::now();
  auto next_state = last;
  while (running_) {
    if (auto d = inbox_->pop(std::chrono::duration_cast<std::chrono::milliseconds>(tick))) {
      const bus::BusMessage& m = (*d)->message;
      if (const auto* imu = std::get_if<bus::ImuPayload>(&m.payload)) {
        if (recognizer_) {
          try {
            if (auto s = recognizer_->consume(*imu, m.timestamp)) publish(*s);
          } catch (const gesture::OutOfOrderSample& e) {
            publish(bus::SessionPayload{"warning", {}, e.what()});
          }
        }
      } else if (!std::holds_alternative<bus::RobotStatePayload>(m.payload)) {
        for (auto& p : core_->consume(m)) publish(std::move(p));
      }
    }
    const auto now = clock::now();
    const double dt = std::chrono::duration<double>(now - last).count();
    if (dt > 0.0) {
      sim_.step(dt);
      last = now;
      sim_.clear_executed();
      for (const auto& ev : sim_.drain_events()) {
        static constexpr const char* names[] = {"playback_finished", "record_saved", "attached", "detached"};
        publish(bus::RobotEventPayload{names[static_cast<int>(ev.kind)], ev.arm});
      }
    }
    if (now >= next_state) {
      const auto& w = sim_.world();
      std::string status = "idle";
      if (sim_.recording()) status = "recording";
      if (sim_.status() == robot::PlaybackStatus::playing) status = "playing";
      if (sim_.status() == robot::PlaybackStatus::paused) status = "paused";
      publish(bus::RobotStatePayload{w.left, w.right, w.cube, w.attached, status});
      next_state = now + std::chrono::microseconds(static_cast<long>(1e6 / config_.state_rate));
    }
  }
}

// ---------------------------------------------------------------------------
// Replay

ReplayResult replay_session(std::istream& log, const ReplayOptions& options) {
  std::vector<bus::BusMessage> messages;
  std::string line;
  while (std::getline(log, line)) {
    if (!line.empty()) messages.push_back(bus::decode_message(line));
  }

  auto store = store::TaskStore::in_memory();
  std::size_t first = 0;
  const auto* hello = messages.empty() ? nullptr : std::get_if<bus::SessionPayload>(&messages.front().payload);
  if (hello && hello->op == "hello" && !hello->text.empty()) {
    const StoreSummary summary = parse_summary(hello->text);
    for (const auto& name : summary.tasks) store.save_task({name, {}, 0.0});
    if (!summary.sequence.empty()) store.save_sequence({fsm::kWorkingSequence, summary.sequence});
    store::MacroBinding macro;
    macro.slots = summary.macro;
    store.save_macro(macro);
    first = 1;
  } else {
    robot::load_fixture_tasks(robot::SimConfig{}, store);
  }

  ScriptedRobot robot;
  InteractionCore core(store, robot);
  core.on_guidance = [&](const bus::GuidancePayload& g, double t) { robot.guide({g.position, g.gripper}, t); };
  std::optional<RecognizerStage> stage;
  if (options.reprocess_imu) {
    stage.emplace(std::make_unique<gesture::TemplateRecognizer>(options.templates.value_or(default_templates())));
  }

  ReplayResult result;
  result.produced.push_back(core.snapshot());
  auto apply = [&](const bus::BusMessage& m) {
    for (auto& p : core.consume(m)) {
      if (auto* gui = std::get_if<bus::GuiPayload>(&p)) result.produced.push_back(*gui);
    }
  };
  bus::Producer recognizer("recognizer");
  for (std::size_t i = first; i < messages.size(); ++i) {
    const bus::BusMessage& m = messages[i];
    std::visit(overloaded{
                   [&](const bus::GuiPayload& g) {
                     if (m.source == "core") result.logged.push_back(g);
                   },
                   [&](const bus::ImuPayload& imu) {
                     if (!stage) return;
                     if (auto s = stage->consume(imu, m.timestamp)) apply(recognizer.make(*s, m.timestamp));
                   },
                   [&](const bus::SignalPayload&) {
                     if (stage && m.source == "recognizer") return;
                     apply(m);
                   },
                   [&](const bus::RobotEventPayload& r) {
                     if (r.kind == "playback_finished") robot.finish();
                     apply(m);
                   },
                   [&](const bus::RobotStatePayload&) {},
                   [&](const auto&) { apply(m); },
               },
               m.payload);
  }
  return result;
}

}  // namespace hri::harness
