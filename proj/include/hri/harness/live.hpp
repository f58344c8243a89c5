#pragma once

#include <atomic>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "hri/bus/hub.hpp"
#include "hri/bus/server.hpp"
#include "hri/fsm/machine.hpp"
#include "hri/gesture/gesture.hpp"
#include "hri/robot/simulator.hpp"
#include "hri/store/task_store.hpp"

namespace hri::harness {

/// Robot double whose busy flag follows the completion events it is told
/// about. Used to replay a session without re-running motion.
class ScriptedRobot : public fsm::RobotPort {
 public:
  void start_recording(robot::Arm arm) override;
  robot::Recording stop_recording() override;
  bool recording() const override { return recording_.has_value(); }
  bool play(const store::Task& task) override;
  bool busy() const override { return playing_ || recording(); }
  void pause() override {}
  void resume() override {}
  void stop() override { playing_ = false; }

  void finish() { playing_ = false; }
  void guide(const robot::Pose& pose, double t);

 private:
  std::optional<robot::Trajectory> recording_;
  double first_t_ = 0.0;
  bool playing_ = false;
};

/// The FSM core as a bus participant. Every inbound message is applied in
/// arrival order; the returned payloads are what the core publishes in
/// response (a gui snapshot after every outcome other than ignored, a
/// session warning for rejected events).
class InteractionCore {
 public:
  InteractionCore(store::TaskStore& store, fsm::RobotPort& robot);

  std::vector<bus::Payload> consume(const bus::BusMessage& message);
  bus::GuiPayload snapshot() const { return machine_.snapshot(); }
  fsm::Machine& machine() { return machine_; }

  /// Receives guidance samples; set by whoever owns the simulator.
  std::function<void(const bus::GuidancePayload&, double t)> on_guidance;

 private:
  fsm::Machine machine_;
  fsm::RobotPort& robot_;
};

/// Online recognizer stage: IMU payloads in, signal payloads out.
class RecognizerStage {
 public:
  explicit RecognizerStage(std::unique_ptr<gesture::Recognizer> recognizer) : recognizer_(std::move(recognizer)) {}
  /// Throws gesture::OutOfOrderSample for non-increasing timestamps.
  std::optional<bus::SignalPayload> consume(const bus::ImuPayload& imu, double t);

 private:
  std::unique_ptr<gesture::Recognizer> recognizer_;
};

/// Templates calibrated from synthetic trials (11 performers x 5 repetitions
/// x 4 gestures), deterministic for the seed.
gesture::TemplateSet default_templates(std::uint64_t seed = 7);

/// What a store holds that shapes menus: names only.
struct StoreSummary {
  std::vector<std::string> tasks;
  std::vector<std::string> sequence;
  std::array<std::optional<std::string>, 3> macro;
};
StoreSummary summarize(const store::TaskStore& store);
std::string format_summary(const StoreSummary& summary);
StoreSummary parse_summary(const std::string& text);

struct ServeConfig {
  bus::ServerConfig server;
  std::size_t queue_limit = 10'000;
  std::string log_path;   // empty disables logging
  std::string store_dir;  // empty: in-memory store seeded with the fixtures
  double tick_rate = 50.0;
  double state_rate = 10.0;  // robot state broadcasts per second
  bool recognizer = true;
};

/// Bus, FSM core, simulator and recognizer wired together. The core consumes
/// one serialized queue fed by its hub subscription.
class LiveStack {
 public:
  explicit LiveStack(ServeConfig config);
  ~LiveStack();

  /// Throws bus::StartupError (port busy) or std::runtime_error naming the
  /// failing component.
  void start();
  void stop();
  std::uint16_t port() const;
  bus::Hub& hub() { return hub_; }
  robot::Simulator& simulator() { return sim_; }

 private:
  void loop();
  void publish(bus::Payload payload);

  ServeConfig config_;
  bus::Hub hub_;
  std::unique_ptr<store::TaskStore> store_;
  robot::Simulator sim_;
  std::unique_ptr<fsm::SimulatorPort> port_;
  std::unique_ptr<InteractionCore> core_;
  std::unique_ptr<RecognizerStage> recognizer_;
  std::unique_ptr<bus::Server> server_;
  std::shared_ptr<bus::Subscription> inbox_;
  bus::Producer core_out_{"core"};
  bus::Producer sim_out_{"sim"};
  bus::Producer recognizer_out_{"recognizer"};
  std::unique_ptr<std::ofstream> log_;
  std::atomic<bool> running_{false};
  std::thread thread_;
};

struct ReplayOptions {
  /// Re-run logged IMU samples through a recognizer instead of trusting the
  /// logged recognizer signals.
  bool reprocess_imu = false;
  std::optional<gesture::TemplateSet> templates;
};

struct ReplayResult {
  std::vector<bus::GuiPayload> produced;
  std::vector<bus::GuiPayload> logged;  // gui messages the core published live
  bool matches() const { return produced == logged; }
};

/// Feeds a session log back through a fresh core. The first line must be the
/// session hello carrying the initial store summary; without it the standard
/// fixtures are assumed.
ReplayResult replay_session(std::istream& log, const ReplayOptions& options = {});

}  // namespace hri::harness
