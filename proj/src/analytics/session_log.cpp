#include <istream>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

#include "hri/analytics/session_log.hpp"

namespace hri::analytics {

using json = nlohmann::ordered_json;

std::string_view to_string(Modality modality) {
  return modality == Modality::gesture ? "gesture" : "touchscreen";
}

std::optional<Modality> parse_modality(std::string_view text) {
  if (text == "gesture") return Modality::gesture;
  if (text == "touchscreen") return Modality::touchscreen;
  return std::nullopt;
}

bool SessionLog::completed_all() const {
  for (const auto& t : tasks) {
    if (!t.completed) return false;
  }
  return true;
}

std::string format_session_log(const SessionLog& log) {
  json out;
  out["session"] = log.session;
  out["modality"] = std::string(to_string(log.modality));
  out["seed"] = log.seed;
  out["elapsed"] = log.elapsed;
  json tasks = json::array();
  for (std::size_t k = 0; k < kStudyTasks; ++k) {
    const auto& t = log.tasks[k];
    json j;
    j["task"] = k + 1;
    j["attempted"] = t.attempted;
    j["completed"] = t.completed;
    j["duration"] = t.duration;
    j["inputs"] = t.inputs;
    j["gesture_misses"] = t.gesture_misses;
    tasks.push_back(j);
  }
  out["tasks"] = tasks;
  return out.dump();
}

SessionLog parse_session_log(std::string_view line) {
  SessionLog log;
  try {
    const json j = json::parse(line);
    log.session = j.at("session").get<std::size_t>();
    auto m = parse_modality(j.at("modality").get<std::string>());
    if (!m) throw std::invalid_argument("unknown modality");
    log.modality = *m;
    log.seed = j.at("seed").get<std::uint64_t>();
    log.elapsed = j.at("elapsed").get<double>();
    const json& tasks = j.at("tasks");
    if (!tasks.is_array() || tasks.size() != kStudyTasks) throw std::invalid_argument("expected 4 tasks");
    for (std::size_t k = 0; k < kStudyTasks; ++k) {
      const json& t = tasks[k];
      if (t.at("task").get<std::size_t>() != k + 1) throw std::invalid_argument("tasks out of order");
      auto& r = log.tasks[k];
      r.attempted = t.at("attempted").get<bool>();
      r.completed = t.at("completed").get<bool>();
      r.duration = t.at("duration").get<double>();
      r.inputs = t.at("inputs").get<std::uint64_t>();
      r.gesture_misses = t.at("gesture_misses").get<std::uint64_t>();
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed session log: ") + e.what());
  }
  if (log.elapsed < 0.0) throw std::invalid_argument("negative elapsed time");
  for (std::size_t k = 0; k < kStudyTasks; ++k) {
    const auto& t = log.tasks[k];
    if (t.duration < 0.0) throw std::invalid_argument("negative task duration");
    if (t.completed && !t.attempted) throw std::invalid_argument("task completed but not attempted");
    if (k > 0 && t.attempted && !log.tasks[k - 1].attempted) {
      throw std::invalid_argument("task " + std::to_string(k + 1) + " attempted out of order");
    }
  }
  return log;
}

void write_dataset(std::ostream& out, const std::vector<SessionLog>& logs) {
  for (const auto& log : logs) out << format_session_log(log) << '\n';
}

std::vector<SessionLog> read_dataset(std::istream& in) {
  std::vector<SessionLog> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(parse_session_log(line));
  }
  return out;
}

}  // namespace hri::analytics
