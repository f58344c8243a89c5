#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hri::analytics {

enum class Modality { gesture, touchscreen };
std::string_view to_string(Modality modality);
std::optional<Modality> parse_modality(std::string_view text);

inline constexpr std::size_t kStudyTasks = 4;

struct TaskResult {
  bool attempted = false;
  bool completed = false;
  double duration = 0.0;  // seconds, from the end of the previous task to this one's end
  std::uint64_t inputs = 0;         // commands that reached the interface
  std::uint64_t gesture_misses = 0;  // gesture attempts the recognizer missed

  friend bool operator==(const TaskResult&, const TaskResult&) = default;
};

/// One participant run of the four ordered tasks.
struct SessionLog {
  std::size_t session = 0;
  Modality modality = Modality::touchscreen;
  std::uint64_t seed = 0;
  double elapsed = 0.0;
  std::array<TaskResult, kStudyTasks> tasks{};

  bool completed_all() const;
  friend bool operator==(const SessionLog&, const SessionLog&) = default;
};

/// One JSON object per line; numbers in shortest round-trip form.
std::string format_session_log(const SessionLog& log);
/// Throws std::invalid_argument on malformed lines or broken invariants
/// (negative durations, a task attempted after an unattempted one).
SessionLog parse_session_log(std::string_view line);

void write_dataset(std::ostream& out, const std::vector<SessionLog>& logs);
std::vector<SessionLog> read_dataset(std::istream& in);

}  // namespace hri::analytics
