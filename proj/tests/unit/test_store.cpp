#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "hri/robot/fixtures.hpp"
#include "hri/store/task_store.hpp"

using namespace hri;
using namespace hri::store;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("hri-store-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path path;
};

Task random_task(std::mt19937_64& rng, const std::string& name) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), step(1e-9, 0.7);
  Task task{name, {}, std::abs(u(rng)) * 1e6};
  for (int k = 0; k < 2; ++k) {
    robot::Trajectory tr{k == 0 ? robot::Arm::right : robot::Arm::left, {}};
    double t = 0.0;
    for (int i = 0; i < 25; ++i) {
      tr.waypoints.push_back({t, {{u(rng), u(rng) / 3.0, u(rng) * 1e-7}, i % 2 ? robot::Gripper::closed : robot::Gripper::open}});
      t += step(rng);
    }
    task.tracks.push_back(tr);
  }
  return task;
}

}  // namespace

TEST_CASE("tasks round-trip bit-exactly through both backends") {
  TempDir dir;
  std::mt19937_64 rng(8);
  for (auto store : {TaskStore::open(dir.path), TaskStore::in_memory()}) {
    for (int i = 0; i < 20; ++i) {
      const auto task = random_task(rng, "t" + std::to_string(i));
      store.save_task(task);
      CHECK(store.load_task(task.name) == task);
    }
  }
}

TEST_CASE("numbers keep full precision") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0, 123456789.123456789, 5e-324}) {
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK_THROWS_AS(parse_double("1.5x"), StoreError);
  CHECK_THROWS_AS(parse_double(""), StoreError);
}

TEST_CASE("task lifecycle") {
  auto store = TaskStore::in_memory();
  robot::load_fixture_tasks(robot::SimConfig{}, store);
  CHECK(store.list_tasks() == std::vector<std::string>{"ACTION_1", "ACTION_2", "MOVE_A_B"});
  CHECK_THROWS_AS(store.load_task("t1"), NotFoundError);

  Task first{"t1", {{robot::Arm::right, {{0.0, {}}}}}, 1.0};
  Task second{"t1", {{robot::Arm::left, {{0.0, {}}, {2.0, {}}}}}, 2.0};
  store.save_task(first);
  store.save_task(second);
  CHECK(store.load_task("t1") == second);
  CHECK(store.delete_task("t1"));
  CHECK_FALSE(store.delete_task("t1"));
  CHECK_THROWS_AS(store.load_task("t1"), NotFoundError);
  CHECK_THROWS_AS(store.save_task({"../escape", {}, 0.0}), StoreError);
  CHECK_THROWS_AS(store.save_task({"", {}, 0.0}), StoreError);
}

TEST_CASE("sequences and macros round-trip") {
  TempDir dir;
  auto store = TaskStore::open(dir.path);
  robot::load_fixture_tasks(robot::SimConfig{}, store);
  const SequenceDef seq{"study", {"ACTION_1", "ACTION_2"}};
  store.save_sequence(seq);
  CHECK(store.load_sequence("study") == seq);
  CHECK(store.resolve_sequence(seq).size() == 2);

  MacroBinding macro;
  macro.slots = {"MOVE_A_B", "MOVE_B_A", std::nullopt};
  store.save_macro(macro);
  CHECK(store.load_macro("default") == macro);

  auto reopened = TaskStore::open(dir.path);
  CHECK(reopened.load_macro("default") == macro);
  CHECK(reopened.find_sequence("study") == seq);
  CHECK_FALSE(reopened.find_sequence("other").has_value());
  CHECK_THROWS_AS(reopened.load_sequence("other"), NotFoundError);
}

TEST_CASE("a sequence naming a deleted task fails when resolved") {
  auto store = TaskStore::in_memory();
  robot::load_fixture_tasks(robot::SimConfig{}, store);
  const SequenceDef seq{"s", {"ACTION_1", "ACTION_2"}};
  store.save_sequence(seq);
  store.delete_task("ACTION_2");
  CHECK(store.load_sequence("s") == seq);
  try {
    store.resolve_sequence(seq);
    FAIL("expected MissingTaskError");
  } catch (const MissingTaskError& e) {
    CHECK(e.task() == "ACTION_2");
    CHECK(std::string(e.what()).find("ACTION_2") != std::string::npos);
  }
}

TEST_CASE("an interrupted write leaves the previous version intact") {
  TempDir dir;
  auto backend = std::make_shared<FileBackend>(dir.path);
  TaskStore store(backend);
  std::mt19937_64 rng(12);
  const auto original = random_task(rng, "keep");
  store.save_task(original);

  backend->before_rename = [](const fs::path& temp) {
    CHECK(fs::exists(temp));
    throw std::runtime_error("simulated crash");
  };
  CHECK_THROWS_AS(store.save_task(random_task(rng, "keep")), std::runtime_error);
  backend->before_rename = nullptr;

  auto reopened = TaskStore::open(dir.path);
  CHECK(reopened.load_task("keep") == original);
  CHECK(reopened.list_tasks() == std::vector<std::string>{"keep"});
}

TEST_CASE("on-disk layout is one text file per entity") {
  TempDir dir;
  auto store = TaskStore::open(dir.path);
  store.save_task({"T", {{robot::Arm::right, {{0.0, {{0.5, 0.25, 0.125}, robot::Gripper::closed}}}}}, 1.5});
  store.save_sequence({"default", {"T"}});
  MacroBinding m;
  m.slots[0] = "T";
  store.save_macro(m);
  std::ifstream in(dir.path / "tasks" / "T.task");
  std::stringstream text;
  text << in.rdbuf();
  CHECK(text.str() == "hri-task 1\nname T\ncreated_at 1.5\ntrack right 1\n# t x y z gripper\n0 0.5 0.25 0.125 closed\nend\n");
  CHECK(fs::exists(dir.path / "sequences" / "default.seq"));
  CHECK(fs::exists(dir.path / "macros" / "default.macro"));
  CHECK(parse_sequence(format_sequence({"default", {"T"}})) == SequenceDef{"default", {"T"}});
  CHECK(parse_macro(format_macro(m)) == m);
}

TEST_CASE("malformed files are reported with a line number") {
  CHECK_THROWS_WITH_AS(parse_task("hri-task 1\nname T\n"), doctest::Contains("line"), StoreError);
  CHECK_THROWS_AS(parse_task("garbage"), StoreError);
  CHECK_THROWS_AS(parse_sequence("hri-sequence 1\nname s\ntask\nend\n"), StoreError);
  CHECK_THROWS_AS(parse_macro("hri-macro 1\n"), StoreError);
}
