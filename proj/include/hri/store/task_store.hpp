#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hri/robot/types.hpp"

namespace hri::store {

/// A named recorded robot behaviour. Most tasks carry one track; bimanual
/// fixtures carry one per arm, played concurrently.
struct Task {
  std::string name;
  std::vector<robot::Trajectory> tracks;
  double created_at = 0.0;

  double duration() const;
  friend bool operator==(const Task&, const Task&) = default;
};

struct SequenceDef {
  std::string name;
  std::vector<std::string> tasks;

  friend bool operator==(const SequenceDef&, const SequenceDef&) = default;
};

/// Tasks bound to the three firing gestures G1..G3. G4 is reserved for exit.
struct MacroBinding {
  std::string name = "default";
  std::array<std::optional<std::string>, 3> slots;

  friend bool operator==(const MacroBinding&, const MacroBinding&) = default;
};

class StoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotFoundError : public StoreError {
 public:
  using StoreError::StoreError;
};

class MissingTaskError : public StoreError {
 public:
  MissingTaskError(std::string sequence, std::string task);
  const std::string& task() const { return task_; }

 private:
  std::string task_;
};

/// Flat key/value storage where keys are relative paths such as
/// "tasks/MOVE_A_B.task".
class StorageBackend {
 public:
  virtual ~StorageBackend() = default;
  virtual std::optional<std::string> read(const std::string& key) const = 0;
  virtual void write(const std::string& key, const std::string& content) = 0;
  virtual bool remove(const std::string& key) = 0;
  /// Keys directly under dir, sorted.
  virtual std::vector<std::string> list(const std::string& dir) const = 0;
};

/// Files under a root directory. Writes go to a temporary sibling and are
/// renamed into place.
class FileBackend : public StorageBackend {
 public:
  explicit FileBackend(std::filesystem::path root);

  std::optional<std::string> read(const std::string& key) const override;
  void write(const std::string& key, const std::string& content) override;
  bool remove(const std::string& key) override;
  std::vector<std::string> list(const std::string& dir) const override;

  const std::filesystem::path& root() const { return root_; }

  /// Test hook invoked after the temporary file is complete and before the
  /// rename. Throwing from it simulates a crash mid-write.
  std::function<void(const std::filesystem::path& temp)> before_rename;

 private:
  std::filesystem::path root_;
};

class MemoryBackend : public StorageBackend {
 public:
  std::optional<std::string> read(const std::string& key) const override;
  void write(const std::string& key, const std::string& content) override;
  bool remove(const std::string& key) override;
  std::vector<std::string> list(const std::string& dir) const override;

 private:
  mutable std::mutex mutex_;
  std::vector<std::pair<std::string, std::string>> entries_;
};

bool is_valid_name(const std::string& name);

class TaskStore {
 public:
  explicit TaskStore(std::shared_ptr<StorageBackend> backend);

  static TaskStore open(const std::filesystem::path& root);
  static TaskStore in_memory();

  void save_task(const Task& task);
  Task load_task(const std::string& name) const;
  bool has_task(const std::string& name) const;
  bool delete_task(const std::string& name);
  std::vector<std::string> list_tasks() const;

  void save_sequence(const SequenceDef& sequence);
  SequenceDef load_sequence(const std::string& name) const;
  std::optional<SequenceDef> find_sequence(const std::string& name) const;
  /// Loads every task a sequence references; throws MissingTaskError naming
  /// the first absent one.
  std::vector<Task> resolve_sequence(const SequenceDef& sequence) const;

  void save_macro(const MacroBinding& macro);
  MacroBinding load_macro(const std::string& name) const;
  std::optional<MacroBinding> find_macro(const std::string& name) const;

  StorageBackend& backend() { return *backend_; }

 private:
  std::shared_ptr<StorageBackend> backend_;
};

// Text formats, exposed for tests and tooling.
std::string format_task(const Task& task);
Task parse_task(const std::string& text);
std::string format_sequence(const SequenceDef& sequence);
SequenceDef parse_sequence(const std::string& text);
std::string format_macro(const MacroBinding& macro);
MacroBinding parse_macro(const std::string& text);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
double parse_double(const std::string& text);

}  // namespace hri::store
