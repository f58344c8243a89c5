#include "hri/store/task_store.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace hri::store {

namespace fs = std::filesystem;

namespace {

constexpr const char* kTaskHeader = "hri-task 1";
constexpr const char* kSequenceHeader = "hri-sequence 1";
constexpr const char* kMacroHeader = "hri-macro 1";

std::string task_key(const std::string& name) { return "tasks/" + name + ".task"; }
std::string sequence_key(const std::string& name) { return "sequences/" + name + ".seq"; }
std::string macro_key(const std::string& name) { return "macros/" + name + ".macro"; }

void require_name(const std::string& name) {
  if (!is_valid_name(name)) throw StoreError("invalid name '" + name + "'");
}

std::vector<std::string> split_words(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string word; in >> word;) out.push_back(word);
  return out;
}

class LineReader {
 public:
  explicit LineReader(const std::string& text) : in_(text) {}

  std::optional<std::vector<std::string>> next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++number_;
      if (line.empty() || line[0] == '#') continue;
      return split_words(line);
    }
    return std::nullopt;
  }

  std::vector<std::string> expect(const std::string& keyword, std::size_t arity) {
    auto words = next();
    if (!words || words->empty() || (*words)[0] != keyword || words->size() != arity + 1) {
      fail("expected '" + keyword + "'");
    }
    return *words;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw StoreError("parse error at line " + std::to_string(number_) + ": " + what);
  }

 private:
  std::istringstream in_;
  int number_ = 0;
};

void expect_header(LineReader& reader, const std::string& header) {
  auto words = reader.next();
  std::string joined;
  if (words) {
    for (const auto& w : *words) joined += (joined.empty() ? "" : " ") + w;
  }
  if (joined != header) reader.fail("missing header '" + header + "'");
}

std::string key_stem(const std::string& key, const std::string& suffix) {
  auto slash = key.rfind('/');
  std::string file = slash == std::string::npos ? key : key.substr(slash + 1);
  if (file.size() <= suffix.size() || file.compare(file.size() - suffix.size(), suffix.size(), suffix) != 0) {
    return {};
  }
  return file.substr(0, file.size() - suffix.size());
}

}  // namespace

MissingTaskError::MissingTaskError(std::string sequence, std::string task)
    : StoreError("sequence '" + sequence + "' references missing task '" + task + "'"),
      task_(std::move(task)) {}

double Task::duration() const {
  double d = 0.0;
  for (const auto& track : tracks) d = std::max(d, track.duration());
  return d;
}

bool is_valid_name(const std::string& name) {
  if (name.empty() || name.size() > 128 || name[0] == '.') return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '-' || c == '.';
  });
}

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) throw StoreError("cannot format number");
  return std::string(buf, end);
}

double parse_double(const std::string& text) {
  double value = 0.0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || end != text.data() + text.size()) {
    throw StoreError("invalid number '" + text + "'");
  }
  return value;
}

// ---------------------------------------------------------------------------
// Formats

std::string format_task(const Task& task) {
  std::string out;
  out += kTaskHeader;
  out += "\nname " + task.name + "\ncreated_at " + format_double(task.created_at) + "\n";
  for (const auto& track : task.tracks) {
    out += "track ";
    out += robot::to_string(track.arm);
    out += " " + std::to_string(track.waypoints.size()) + "\n# t x y z gripper\n";
    for (const auto& w : track.waypoints) {
      out += format_double(w.t);
      for (double c : w.pose.position) out += " " + format_double(c);
      out += " ";
      out += robot::to_string(w.pose.gripper);
      out += "\n";
    }
  }
  out += "end\n";
  return out;
}

Task parse_task(const std::string& text) {
  LineReader reader(text);
  expect_header(reader, kTaskHeader);
  Task task;
  task.name = reader.expect("name", 1)[1];
  task.created_at = parse_double(reader.expect("created_at", 1)[1]);
  for (;;) {
    auto words = reader.next();
    if (!words) reader.fail("missing 'end'");
    if (words->size() == 1 && (*words)[0] == "end") break;
    if (words->size() != 3 || (*words)[0] != "track") reader.fail("expected 'track'");
    auto arm = robot::parse_arm((*words)[1]);
    if (!arm) reader.fail("unknown arm '" + (*words)[1] + "'");
    std::size_t count = 0;
    auto [ptr, ec] = std::from_chars((*words)[2].data(), (*words)[2].data() + (*words)[2].size(), count);
    if (ec != std::errc{}) reader.fail("invalid waypoint count");
    robot::Trajectory track{*arm, {}};
    track.waypoints.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      auto row = reader.next();
      if (!row || row->size() != 5) reader.fail("expected waypoint row 't x y z gripper'");
      auto gripper = robot::parse_gripper((*row)[4]);
      if (!gripper) reader.fail("unknown gripper state '" + (*row)[4] + "'");
      robot::Waypoint w;
      w.t = parse_double((*row)[0]);
      for (int k = 0; k < 3; ++k) w.pose.position[k] = parse_double((*row)[k + 1]);
      w.pose.gripper = *gripper;
      track.waypoints.push_back(w);
    }
    try {
      robot::validate(track);
    } catch (const std::invalid_argument& e) {
      reader.fail(e.what());
    }
    task.tracks.push_back(std::move(track));
  }
  return task;
}

std::string format_sequence(const SequenceDef& sequence) {
  std::string out = std::string(kSequenceHeader) + "\nname " + sequence.name + "\n";
  for (const auto& t : sequence.tasks) out += "task " + t + "\n";
  return out;
}

SequenceDef parse_sequence(const std::string& text) {
  LineReader reader(text);
  expect_header(reader, kSequenceHeader);
  SequenceDef seq;
  seq.name = reader.expect("name", 1)[1];
  while (auto words = reader.next()) {
    if (words->size() != 2 || (*words)[0] != "task") reader.fail("expected 'task <name>'");
    seq.tasks.push_back((*words)[1]);
  }
  return seq;
}

std::string format_macro(const MacroBinding& macro) {
  std::string out = std::string(kMacroHeader) + "\nname " + macro.name + "\n";
  for (std::size_t i = 0; i < macro.slots.size(); ++i) {
    out += "G" + std::to_string(i + 1) + " " + macro.slots[i].value_or("-") + "\n";
  }
  return out;
}

MacroBinding parse_macro(const std::string& text) {
  LineReader reader(text);
  expect_header(reader, kMacroHeader);
  MacroBinding macro;
  macro.name = reader.expect("name", 1)[1];
  for (std::size_t i = 0; i < macro.slots.size(); ++i) {
    auto words = reader.expect("G" + std::to_string(i + 1), 1);
    if (words[1] != "-") macro.slots[i] = words[1];
  }
  if (reader.next()) reader.fail("unexpected trailing content");
  return macro;
}

// ---------------------------------------------------------------------------
// Backends

FileBackend::FileBackend(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw StoreError("cannot create store root " + root_.string() + ": " + ec.message());
}

std::optional<std::string> FileBackend::read(const std::string& key) const {
  std::ifstream in(root_ / key, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void FileBackend::write(const std::string& key, const std::string& content) {
  const fs::path target = root_ / key;
  std::error_code ec;
  fs::create_directories(target.parent_path(), ec);
  if (ec) throw StoreError("cannot create " + target.parent_path().string() + ": " + ec.message());

  fs::path temp = target;
  temp += ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw StoreError("cannot open " + temp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw StoreError("write to " + temp.string() + " failed");
  }
  if (before_rename) before_rename(temp);
  fs::rename(temp, target, ec);
  if (ec) throw StoreError("rename to " + target.string() + " failed: " + ec.message());
}

bool FileBackend::remove(const std::string& key) {
  std::error_code ec;
  return fs::remove(root_ / key, ec);
}

std::vector<std::string> FileBackend::list(const std::string& dir) const {
  std::vector<std::string> keys;
  std::error_code ec;
  fs::directory_iterator it(root_ / dir, ec);
  if (ec) return keys;
  for (const auto& entry : it) {
    if (!entry.is_regular_file()) continue;
    const std::string file = entry.path().filename().string();
    if (file.size() > 4 && file.ends_with(".tmp")) continue;
    keys.push_back(dir + "/" + file);
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

std::optional<std::string> MemoryBackend::read(const std::string& key) const {
  std::lock_guard lock(mutex_);
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  return std::nullopt;
}

void MemoryBackend::write(const std::string& key, const std::string& content) {
  std::lock_guard lock(mutex_);
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = content;
      return;
    }
  }
  entries_.emplace_back(key, content);
}

bool MemoryBackend::remove(const std::string& key) {
  std::lock_guard lock(mutex_);
  return std::erase_if(entries_, [&](const auto& e) { return e.first == key; }) > 0;
}

std::vector<std::string> MemoryBackend::list(const std::string& dir) const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> keys;
  const std::string prefix = dir + "/";
  for (const auto& [k, v] : entries_) {
    if (k.starts_with(prefix) && k.find('/', prefix.size()) == std::string::npos) keys.push_back(k);
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

// ---------------------------------------------------------------------------
// TaskStore

TaskStore::TaskStore(std::shared_ptr<StorageBackend> backend) : backend_(std::move(backend)) {
  if (!backend_) throw StoreError("null storage backend");
}

TaskStore TaskStore::open(const fs::path& root) {
  return TaskStore(std::make_shared<FileBackend>(root));
}

TaskStore TaskStore::in_memory() { return TaskStore(std::make_shared<MemoryBackend>()); }

void TaskStore::save_task(const Task& task) {
  require_name(task.name);
  for (const auto& track : task.tracks) robot::validate(track);
  backend_->write(task_key(task.name), format_task(task));
}

Task TaskStore::load_task(const std::string& name) const {
  require_name(name);
  auto text = backend_->read(task_key(name));
  if (!text) throw NotFoundError("task '" + name + "' not found");
  return parse_task(*text);
}

bool TaskStore::has_task(const std::string& name) const {
  return is_valid_name(name) && backend_->read(task_key(name)).has_value();
}

bool TaskStore::delete_task(const std::string& name) {
  require_name(name);
  return backend_->remove(task_key(name));
}

std::vector<std::string> TaskStore::list_tasks() const {
  std::vector<std::string> names;
  for (const auto& key : backend_->list("tasks")) {
    auto stem = key_stem(key, ".task");
    if (!stem.empty()) names.push_back(stem);
  }
  std::sort(names.begin(), names.end());
  return names;
}

void TaskStore::save_sequence(const SequenceDef& sequence) {
  require_name(sequence.name);
  for (const auto& t : sequence.tasks) require_name(t);
  backend_->write(sequence_key(sequence.name), format_sequence(sequence));
}

SequenceDef TaskStore::load_sequence(const std::string& name) const {
  auto seq = find_sequence(name);
  if (!seq) throw NotFoundError("sequence '" + name + "' not found");
  return *seq;
}

std::optional<SequenceDef> TaskStore::find_sequence(const std::string& name) const {
  require_name(name);
  auto text = backend_->read(sequence_key(name));
  if (!text) return std::nullopt;
  return parse_sequence(*text);
}

std::vector<Task> TaskStore::resolve_sequence(const SequenceDef& sequence) const {
  std::vector<Task> tasks;
  for (const auto& name : sequence.tasks) {
    auto text = is_valid_name(name) ? backend_->read(task_key(name)) : std::nullopt;
    if (!text) throw MissingTaskError(sequence.name, name);
    tasks.push_back(parse_task(*text));
  }
  return tasks;
}

void TaskStore::save_macro(const MacroBinding& macro) {
  require_name(macro.name);
  for (const auto& slot : macro.slots) {
    if (slot) require_name(*slot);
  }
  backend_->write(macro_key(macro.name), format_macro(macro));
}

MacroBinding TaskStore::load_macro(const std::string& name) const {
  auto macro = find_macro(name);
  if (!macro) throw NotFoundError("macro '" + name + "' not found");
  return *macro;
}

std::optional<MacroBinding> TaskStore::find_macro(const std::string& name) const {
  require_name(name);
  auto text = backend_->read(macro_key(name));
  if (!text) return std::nullopt;
  return parse_macro(*text);
}

}  // namespace hri::store
