#include <fstream>
#include <sstream>

#include "json.hpp"

#include "hri/harness/harness.hpp"

namespace hri::harness {

using json = nlohmann::json;

namespace {

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) throw std::invalid_argument(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    if (!known) throw std::invalid_argument("unknown config key '" + where + "." + key + "'");
  }
}

void read_time(const json& j, const std::string& where, TimeModel& t) {
  only_keys(j, where, {"mean", "jitter"});
  if (j.contains("mean")) t.mean = j.at("mean").get<double>();
  if (j.contains("jitter")) t.jitter = j.at("jitter").get<double>();
}

void read_recognizer(const json& j, gesture::StochasticRecognizerModel& m) {
  only_keys(j, "user.recognizer", {"recall", "confusion", "latency"});
  if (j.contains("recall")) {
    const json& r = j.at("recall");
    if (r.is_number()) {
      m.recall.fill(r.get<double>());
    } else {
      m.recall = r.get<std::array<double, gesture::kLabelCount>>();
    }
  }
  if (j.contains("confusion")) {
    m.confusion = j.at("confusion").get<std::array<std::array<double, gesture::kLabelCount>, gesture::kLabelCount>>();
  }
  if (j.contains("latency")) {
    const auto l = j.at("latency").get<std::array<double, 2>>();
    m.latency_min = l[0];
    m.latency_max = l[1];
  }
}

}  // namespace

StudyConfig parse_study_config(const std::string& json_text) {
  StudyConfig c;
  try {
    const json j = json::parse(json_text);
    only_keys(j, "config", {"sessions", "seed", "modalities", "user", "scenario", "serve"});
    if (j.contains("sessions")) c.sessions = j.at("sessions").get<std::size_t>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("modalities")) {
      c.modalities.clear();
      for (const auto& m : j.at("modalities")) {
        auto parsed = analytics::parse_modality(m.get<std::string>());
        if (!parsed) throw std::invalid_argument("unknown modality '" + m.get<std::string>() + "'");
        c.modalities.push_back(*parsed);
      }
    }
    if (j.contains("user")) {
      const json& u = j.at("user");
      only_keys(u, "user", {"touch", "gesture", "decision", "recognizer"});
      if (u.contains("touch")) read_time(u.at("touch"), "user.touch", c.user.touch);
      if (u.contains("gesture")) read_time(u.at("gesture"), "user.gesture", c.user.gesture);
      if (u.contains("decision")) read_time(u.at("decision"), "user.decision", c.user.decision);
      if (u.contains("recognizer")) read_recognizer(u.at("recognizer"), c.user.recognizer);
    }
    if (j.contains("scenario")) {
      const json& s = j.at("scenario");
      only_keys(s, "scenario", {"soft_limit", "guidance", "guidance_rate", "tick_rate"});
      if (s.contains("soft_limit")) c.scenario.soft_limit = s.at("soft_limit").get<double>();
      if (s.contains("guidance")) {
        const auto g = s.at("guidance").get<std::array<double, 2>>();
        c.scenario.guidance_min = g[0];
        c.scenario.guidance_max = g[1];
      }
      if (s.contains("guidance_rate")) c.scenario.guidance_rate = s.at("guidance_rate").get<double>();
      if (s.contains("tick_rate")) c.scenario.sim.tick_rate = s.at("tick_rate").get<double>();
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("invalid config: ") + e.what());
  }
  if (c.scenario.guidance_min <= 0.0 || c.scenario.guidance_max < c.scenario.guidance_min) {
    throw std::invalid_argument("invalid guidance duration range");
  }
  if (!(c.scenario.guidance_rate > 0.0) || !(c.scenario.sim.tick_rate > 0.0)) {
    throw std::invalid_argument("rates must be positive");
  }
  c.user.validate();
  return c;
}

StudyConfig load_study_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_study_config(text.str());
}

}  // namespace hri::harness
