#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "hri/analytics/analytics.hpp"
#include "hri/harness/harness.hpp"
#include "hri/harness/live.hpp"

using namespace hri;
using json = nlohmann::ordered_json;

namespace {

std::atomic<bool> interrupted{false};

std::ostream& output(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw std::runtime_error("cannot write " + path);
  return file;
}

json box_json(const analytics::BoxStats& b) {
  json j;
  j["n"] = b.n;
  j["min"] = b.min;
  j["q1"] = b.q1;
  j["median"] = b.median;
  j["q3"] = b.q3;
  j["max"] = b.max;
  j["whiskers"] = {b.lower_whisker, b.upper_whisker};
  j["outliers"] = b.outliers;
  return j;
}

json score_json(const analytics::ScaleScore& s) {
  json j;
  j["mean"] = s.mean;
  j["ci_half_width"] = s.ci_half_width ? json(*s.ci_half_width) : json(nullptr);
  j["evaluation"] = std::string(analytics::to_string(s.evaluation));
  return j;
}

json dataset_report(const std::vector<analytics::SessionLog>& logs) {
  json j;
  const auto summary = analytics::completion_summary(logs);
  const auto timing = analytics::timing_stats(logs);
  for (const auto& [modality, c] : summary) {
    json m;
    m["sessions"] = c.sessions;
    m["completed_all"] = c.completed_all;
    m["samples"] = c.samples;
    json tasks = json::array();
    for (std::size_t k = 0; k < analytics::kStudyTasks; ++k) {
      const auto& box = timing.at(modality)[k];
      tasks.push_back(box ? box_json(*box) : json(nullptr));
    }
    m["timing"] = tasks;
    j[std::string(analytics::to_string(modality))] = m;
  }
  return j;
}

json trials_report(const std::vector<analytics::TrialRecord>& trials) {
  const auto m = analytics::confusion_matrix(trials);
  json j;
  j["counts"] = m.counts;
  json recall, precision;
  for (auto label : gesture::kAllLabels) {
    const std::string name(gesture::to_string(label));
    recall[name] = m.recall(label) ? json(*m.recall(label)) : json(nullptr);
    precision[name] = m.precision(label) ? json(*m.precision(label)) : json(nullptr);
  }
  j["recall"] = recall;
  j["precision"] = precision;
  j["accuracy"] = m.accuracy();
  return j;
}

json ueq_report(const analytics::ItemMatrix& answers, const analytics::UeqLayout& layout) {
  const auto r = analytics::ueq_scale_report(answers, layout);
  json j;
  j["respondents"] = r.respondents;
  json scales;
  for (auto s : analytics::kUeqScales) {
    json entry = score_json(r.scales.at(s));
    // Reliability over the scale's items after polarity correction.
    analytics::ItemMatrix items(answers.size());
    for (std::size_t i = 0; i < answers.size(); ++i) {
      for (std::size_t k = 0; k < analytics::kUeqItems; ++k) {
        if (layout[k].scale == s) items[i].push_back(layout[k].reversed ? -answers[i][k] : answers[i][k]);
      }
    }
    try {
      const double alpha = analytics::cronbach_alpha(items);
      entry["alpha"] = alpha;
      entry["reliable"] = analytics::reliable(alpha);
    } catch (const std::invalid_argument&) {
      entry["alpha"] = nullptr;
    }
    scales[std::string(analytics::to_string(s))] = entry;
  }
  j["scales"] = scales;
  j["pragmatic"] = score_json(r.pragmatic);
  j["hedonic"] = score_json(r.hedonic);
  return j;
}

template <class T>
T read_file(const std::string& path, T (*reader)(std::istream&)) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return reader(in);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multimodal robot interaction: live stack, study simulation, analysis and replay"};
  app.require_subcommand(1);

  // serve
  auto* serve = app.add_subcommand("serve", "Run the live stack: bus, interaction core, simulator, recognizer");
  std::string serve_config, static_dir, store_dir, log_path, host = "127.0.0.1";
  int port = 8765;
  double duration = 0.0;
  bool no_recognizer = false;
  serve->add_option("--config", serve_config, "JSON config file (\"serve\" section)");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "TCP port; 0 picks a free one");
  serve->add_option("--static", static_dir, "Directory of console assets");
  serve->add_option("--store", store_dir, "Task store directory (default: in memory with fixtures)");
  serve->add_option("--out,--log", log_path, "Session log file (all channels, replayable)");
  serve->add_option("--duration", duration, "Stop after this many seconds; 0 runs until interrupted");
  serve->add_flag("--no-recognizer", no_recognizer, "Do not run the gesture recognizer");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Run scripted virtual-user sessions of the study protocol");
  std::string sim_config, sim_out, modality = "both";
  std::uint64_t seed = 1;
  std::size_t sessions = 25;
  double recall = -1.0;
  simulate->add_option("--config", sim_config, "JSON study configuration");
  simulate->add_option("--seed", seed, "Master seed");
  simulate->add_option("--sessions", sessions, "Sessions per modality");
  simulate->add_option("--modality", modality, "gesture, touchscreen or both")
      ->check(CLI::IsMember({"gesture", "touchscreen", "both"}));
  simulate->add_option("--recall", recall, "Detection probability applied to every gesture")
      ->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--out", sim_out, "Dataset file (JSON lines); default stdout");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Evaluate a study dataset and questionnaire or trial files");
  std::string dataset, trials_path, layout_path, analyze_out;
  std::vector<std::string> ueq_inputs;
  analyze->add_option("dataset", dataset, "Dataset of session logs (JSON lines)");
  analyze->add_option("--trials", trials_path, "Recognition trials CSV: truth,predicted");
  analyze->add_option("--ueq", ueq_inputs, "UEQ answers as modality=path (26 columns, -3..3)");
  analyze->add_option("--layout", layout_path, "UEQ item layout TSV (default: standard layout)");
  analyze->add_option("--out", analyze_out, "Report file (JSON); default stdout");

  // replay
  auto* replay = app.add_subcommand("replay", "Feed a session log back through the interaction core");
  std::string replay_log, replay_out;
  bool reprocess = false;
  replay->add_option("log", replay_log, "Session log written by serve")->required();
  replay->add_flag("--reprocess-imu", reprocess, "Recognize logged IMU samples again");
  replay->add_option("--out", replay_out, "State trace (JSON lines); default stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) {
      harness::ServeConfig cfg;
      if (!serve_config.empty()) {
        std::ifstream in(serve_config);
        if (!in) throw std::runtime_error("cannot open " + serve_config);
        const auto j = nlohmann::json::parse(in);
        if (j.contains("serve")) {
          const auto& s = j.at("serve");
          cfg.server.host = s.value("host", cfg.server.host);
          cfg.server.port = s.value("port", cfg.server.port);
          cfg.server.static_dir = s.value("static", cfg.server.static_dir);
          cfg.queue_limit = s.value("queue_limit", cfg.queue_limit);
          cfg.log_path = s.value("log", cfg.log_path);
          cfg.store_dir = s.value("store", cfg.store_dir);
        }
      }
      if (serve->count("--host")) cfg.server.host = host;
      if (serve->count("--port")) cfg.server.port = static_cast<std::uint16_t>(port);
      if (serve->count("--static")) cfg.server.static_dir = static_dir;
      if (serve->count("--store")) cfg.store_dir = store_dir;
      if (serve->count("--out")) cfg.log_path = log_path;
      cfg.recognizer = !no_recognizer;
      harness::LiveStack stack(cfg);
      stack.start();
      std::cerr << "listening on " << cfg.server.host << ":" << stack.port() << "\n";
      std::signal(SIGINT, [](int) { interrupted = true; });
      std::signal(SIGTERM, [](int) { interrupted = true; });
      const auto until = std::chrono::steady_clock::now() + std::chrono::duration<double>(duration);
      while (!interrupted && (duration <= 0.0 || std::chrono::steady_clock::now() < until)) {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
      }
      stack.stop();
      return 0;
    }

    if (*simulate) {
      harness::StudyConfig cfg = sim_config.empty() ? harness::StudyConfig{} : harness::load_study_config(sim_config);
      if (simulate->count("--seed")) cfg.seed = seed;
      if (simulate->count("--sessions")) cfg.sessions = sessions;
      if (simulate->count("--modality") && modality != "both") cfg.modalities = {*analytics::parse_modality(modality)};
      if (simulate->count("--recall")) cfg.user.recognizer.recall.fill(recall);
      const auto logs = harness::run_study(cfg);
      std::ofstream file;
      analytics::write_dataset(output(sim_out, file), logs);
      for (const auto& [m, c] : analytics::completion_summary(logs)) {
        if (c.sessions == 0) continue;
        std::cerr << analytics::to_string(m) << ": " << c.completed_all << "/" << c.sessions
                  << " sessions completed all tasks\n";
      }
      return 0;
    }

    if (*analyze) {
      json report;
      if (!dataset.empty()) report["dataset"] = dataset_report(read_file(dataset, analytics::read_dataset));
      if (!trials_path.empty()) report["trials"] = trials_report(read_file(trials_path, analytics::read_trials_csv));
      if (!ueq_inputs.empty()) {
        const auto layout = layout_path.empty() ? analytics::standard_ueq_layout() : analytics::load_ueq_layout(layout_path);
        json ueq;
        std::map<std::string, analytics::UeqScaleReport> reports;
        for (const auto& spec : ueq_inputs) {
          const auto eq = spec.find('=');
          const std::string name = eq == std::string::npos ? spec : spec.substr(0, eq);
          const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
          const auto answers = read_file(path, analytics::read_matrix_csv);
          ueq[name] = ueq_report(answers, layout);
          reports[name] = analytics::ueq_scale_report(answers, layout);
        }
        if (reports.size() == 2) {
          const auto& a = reports.begin()->second;
          const auto& b = std::next(reports.begin())->second;
          json sig;
          for (auto s : analytics::kUeqScales) {
            const auto d = analytics::significant_difference(a.scales.at(s), b.scales.at(s));
            sig[std::string(analytics::to_string(s))] = d ? json(*d) : json(nullptr);
          }
          const auto p = analytics::significant_difference(a.pragmatic, b.pragmatic);
          const auto h = analytics::significant_difference(a.hedonic, b.hedonic);
          sig["pragmatic"] = p ? json(*p) : json(nullptr);
          sig["hedonic"] = h ? json(*h) : json(nullptr);
          ueq["significant"] = sig;
        }
        report["ueq"] = ueq;
      }
      if (report.empty()) throw std::runtime_error("nothing to analyze: give a dataset, --trials or --ueq");
      std::ofstream file;
      output(analyze_out, file) << report.dump(2) << "\n";
      return 0;
    }

    if (*replay) {
      std::ifstream in(replay_log);
      if (!in) throw std::runtime_error("cannot open " + replay_log);
      harness::ReplayOptions opts;
      opts.reprocess_imu = reprocess;
      const auto result = harness::replay_session(in, opts);
      std::ofstream file;
      std::ostream& out = output(replay_out, file);
      bus::Producer producer("replay");
      for (const auto& snap : result.produced) out << bus::encode_message(producer.make(snap, 0.0));
      if (!result.logged.empty()) {
        std::cerr << (result.matches() ? "state trace matches the log\n" : "state trace differs from the log\n");
        return result.matches() ? 0 : 1;
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
