#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hri/analytics/session_log.hpp"
#include "hri/fsm/machine.hpp"
#include "hri/gesture/gesture.hpp"
#include "hri/robot/simulator.hpp"
#include "hri/store/task_store.hpp"

namespace hri::harness {

using analytics::Modality;
using analytics::SessionLog;

/// Minimal signal sequence reaching and selecting `target`: |target - selector|
/// moves (slot 2 down, slot 3 up) then slot 1. Throws std::invalid_argument
/// for action snapshots or an out-of-range target.
std::vector<fsm::Signal> plan_signal_sequence(const fsm::GuiStateSnapshot& snapshot, std::size_t target);

/// A duration drawn uniformly from mean * [1 - jitter, 1 + jitter].
struct TimeModel {
  double mean = 1.0;
  double jitter = 0.2;
};

struct VirtualUserModel {
  Modality modality = Modality::touchscreen;
  TimeModel touch{0.7, 0.2};
  TimeModel gesture{1.2, 0.2};
  TimeModel decision{0.5, 0.2};  // taken before every input, retries included
  gesture::StochasticRecognizerModel recognizer = gesture::StochasticRecognizerModel::defaults();

  /// Throws std::invalid_argument for non-positive means, jitter outside
  /// [0, 1) or an invalid recognizer model.
  void validate() const;
};

struct Scenario {
  robot::SimConfig sim;
  double soft_limit = 300.0;  // seconds, checked between tasks only
  double guidance_min = 8.0;  // kinesthetic demonstration length, uniform
  double guidance_max = 15.0;
  double guidance_rate = 10.0;  // Hz
  /// Pre-recorded tasks; empty means the standard fixtures.
  std::vector<store::Task> fixtures;
  /// Upper bound on inputs per session, guarding against a stuck user.
  std::size_t max_inputs = 100'000;
};

class StartupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runs the four ordered tasks: play MOVE_A_B, record the B-to-A move by
/// guidance, bind both moves to macro slots 1 and 2 and fire them, then build
/// and run the sequence [ACTION_1, ACTION_2]. Deterministic for a seed.
/// Throws StartupError when a fixture is missing.
SessionLog run_session(const Scenario& scenario, const VirtualUserModel& user, std::uint64_t seed,
                       std::size_t session_index = 0);

struct StudyConfig {
  std::size_t sessions = 25;  // per modality
  std::uint64_t seed = 1;
  std::vector<Modality> modalities{Modality::gesture, Modality::touchscreen};
  VirtualUserModel user;  // modality field is overridden per run
  Scenario scenario;
};

/// Independent seeded sessions, gesture sessions first. Session seeds derive
/// from the master seed, modality and index only.
std::vector<SessionLog> run_study(const StudyConfig& config);

std::uint64_t session_seed(std::uint64_t master, Modality modality, std::size_t index);

/// Reads a JSON study configuration. Unknown keys are rejected. Throws
/// std::invalid_argument naming the offending key.
StudyConfig parse_study_config(const std::string& json_text);
StudyConfig load_study_config(const std::string& path);

/// Mean over tasks of (gesture median - touch median). Tasks lacking samples
/// in either modality are skipped; nullopt when none remain.
std::optional<double> median_gap(const std::vector<SessionLog>& logs, const std::vector<std::size_t>& tasks);

}  // namespace hri::harness
