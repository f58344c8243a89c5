#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "hri/fsm/commands.hpp"
#include "hri/robot/types.hpp"

namespace hri::gesture {

/// The four gestures of the dictionary. Two further gestures a full
/// recognizer might report are outside the set and never produced.
enum class GestureLabel { G1 = 0, G2 = 1, G3 = 2, G4 = 3 };

inline constexpr std::array<GestureLabel, 4> kAllLabels{GestureLabel::G1, GestureLabel::G2,
                                                       GestureLabel::G3, GestureLabel::G4};
inline constexpr std::size_t kLabelCount = kAllLabels.size();

std::string_view to_string(GestureLabel label);
/// Human-readable motion name, e.g. "wrist-up".
std::string_view describe(GestureLabel label);
std::optional<GestureLabel> parse_label(std::string_view text);
inline std::size_t index_of(GestureLabel label) { return static_cast<std::size_t>(label); }

struct ImuSample {
  double t = 0.0;
  robot::Vec3 accel{};  // m/s^2
  robot::Vec3 gyro{};   // rad/s

  friend bool operator==(const ImuSample&, const ImuSample&) = default;
};

struct GestureDetection {
  GestureLabel label = GestureLabel::G1;
  double timestamp = 0.0;
  double confidence = 1.0;  // in [0, 1]
  double distance = 0.0;    // template distance; 0 for stochastic detections

  friend bool operator==(const GestureDetection&, const GestureDetection&) = default;
};

/// G1..G4 map onto handler slots 1..4; the timestamp is carried over.
fsm::Signal gesture_to_signal(const GestureDetection& detection);

// ---------------------------------------------------------------------------
// Dynamic time warping

/// Euclidean distance over the six IMU axes.
double sample_distance(const ImuSample& a, const ImuSample& b);

/// DTW with a caller-supplied per-step cost. Throws std::invalid_argument on
/// empty input.
template <class T, class Cost>
double dtw_distance(std::span<const T> a, std::span<const T> b, Cost&& cost) {
  if (a.empty() || b.empty()) throw std::invalid_argument("dtw of empty sequence");
  const std::size_t m = b.size();
  std::vector<double> prev(m), curr(m);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double c = cost(a[i], b[j]);
      double best;
      if (i == 0 && j == 0) {
        best = 0.0;
      } else if (i == 0) {
        best = curr[j - 1];
      } else if (j == 0) {
        best = prev[j];
      } else {
        best = std::min({prev[j], curr[j - 1], prev[j - 1]});
      }
      curr[j] = c + best;
    }
    std::swap(prev, curr);
  }
  return prev[m - 1];
}

double dtw_distance(std::span<const ImuSample> a, std::span<const ImuSample> b);

// ---------------------------------------------------------------------------
// Template recognizer

struct GestureTemplate {
  GestureLabel label = GestureLabel::G1;
  std::vector<ImuSample> samples;
};

struct LabeledTrial {
  GestureLabel label = GestureLabel::G1;
  std::vector<ImuSample> samples;
};

struct TemplateSet {
  std::vector<GestureTemplate> templates;
  double threshold = 0.0;

  std::size_t window() const { return templates.empty() ? 0 : templates.front().samples.size(); }
};

struct CalibrationOptions {
  double margin = 0.10;          // relative slack above the largest training distance
  double min_threshold = 1e-3;
};

/// One medoid template per label and a threshold covering every training
/// trial. Throws std::invalid_argument naming absent labels, or when trial
/// lengths differ.
TemplateSet calibrate_templates(std::span<const LabeledTrial> trials, CalibrationOptions options = {});

/// Pluggable online recognizer: one sample in, at most one detection out.
class Recognizer {
 public:
  virtual ~Recognizer() = default;
  virtual std::optional<GestureDetection> ingest(const ImuSample& sample) = 0;
  virtual void reset() = 0;
};

class OutOfOrderSample : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RecognizerConfig {
  double refractory = 1.0;  // seconds between detections
  double min_motion = 0.5;  // peak gyro norm (rad/s) a window must reach
};

/// Sliding-window DTW matcher against a calibrated template set.
class TemplateRecognizer : public Recognizer {
 public:
  TemplateRecognizer(TemplateSet templates, RecognizerConfig config = {});

  /// Throws OutOfOrderSample when t does not increase.
  std::optional<GestureDetection> ingest(const ImuSample& sample) override;
  void reset() override;

  const TemplateSet& templates() const { return set_; }

 private:
  TemplateSet set_;
  RecognizerConfig config_;
  std::vector<ImuSample> window_;
  std::optional<double> last_t_;
  std::optional<double> last_detection_;
};

// ---------------------------------------------------------------------------
// Stochastic recognizer model

/// Detection behaviour of a recognizer summarised by per-label recall, a
/// confusion row conditioned on detection, and a uniform latency.
struct StochasticRecognizerModel {
  std::array<double, kLabelCount> recall{1.0, 1.0, 1.0, 1.0};
  std::array<std::array<double, kLabelCount>, kLabelCount> confusion{{
      {1.0, 0.0, 0.0, 0.0},
      {0.0, 1.0, 0.0, 0.0},
      {0.0, 0.0, 1.0, 0.0},
      {0.0, 0.0, 0.0, 1.0},
  }};
  double latency_min = 0.0;
  double latency_max = 0.0;

  /// Throws std::invalid_argument when a recall is outside [0,1] or a row
  /// does not sum to 1.
  void validate() const;

  static StochasticRecognizerModel perfect();
  /// Default configuration: recall 0.40, 0.25, 0.30 and 0.50 for G1..G4, and
  /// 1% of detections land on the neighbouring label.
  static StochasticRecognizerModel defaults();
  /// defaults() with every recall replaced by p.
  static StochasticRecognizerModel with_recall(double p);
};

std::optional<GestureDetection> stochastic_recognize(GestureLabel truth,
                                                     const StochasticRecognizerModel& model,
                                                     std::mt19937_64& rng, double t = 0.0);

// ---------------------------------------------------------------------------
// Synthetic wrist motions

struct SynthesisOptions {
  double rate = 10.0;    // Hz
  std::size_t length = 10;
  double noise = 0.0;    // std-dev added to every axis
  double amplitude = 1.0;
};

/// A plausible IMU trace of a gesture starting at t0. Deterministic for a
/// given rng state; noise-free when options.noise == 0.
std::vector<ImuSample> synthesize_gesture(GestureLabel label, double t0, std::mt19937_64& rng,
                                          const SynthesisOptions& options = {});

/// A wrist at rest: gravity on z only.
std::vector<ImuSample> synthesize_rest(double t0, std::size_t count, double rate = 10.0);

}  // namespace hri::gesture
