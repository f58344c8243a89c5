#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hri/gesture/gesture.hpp"

namespace hri::gesture {

namespace {

double peak_gyro(std::span<const ImuSample> window) {
  double peak = 0.0;
  for (const auto& s : window) {
    peak = std::max(peak, std::sqrt(s.gyro[0] * s.gyro[0] + s.gyro[1] * s.gyro[1] + s.gyro[2] * s.gyro[2]));
  }
  return peak;
}

}  // namespace

TemplateSet calibrate_templates(std::span<const LabeledTrial> trials, CalibrationOptions options) {
  std::array<std::vector<const LabeledTrial*>, kLabelCount> by_label;
  for (const auto& trial : trials) by_label[index_of(trial.label)].push_back(&trial);

  std::string missing;
  for (GestureLabel label : kAllLabels) {
    if (by_label[index_of(label)].empty()) {
      missing += (missing.empty() ? "" : ", ") + std::string(to_string(label));
    }
  }
  if (!missing.empty()) throw std::invalid_argument("no calibration trials for " + missing);

  const std::size_t length = trials.front().samples.size();
  for (const auto& trial : trials) {
    if (trial.samples.empty() || trial.samples.size() != length) {
      throw std::invalid_argument("calibration trials must share one non-zero window length");
    }
  }

  TemplateSet set;
  double widest = 0.0;
  for (GestureLabel label : kAllLabels) {
    const auto& group = by_label[index_of(label)];
    const std::size_t n = group.size();
    std::vector<double> d(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        d[i * n + j] = d[j * n + i] = dtw_distance(std::span<const ImuSample>(group[i]->samples),
                                                   std::span<const ImuSample>(group[j]->samples));
      }
    }
    std::size_t medoid = 0;
    double best_sum = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < n; ++j) sum += d[i * n + j];
      if (sum < best_sum) {
        best_sum = sum;
        medoid = i;
      }
    }
    for (std::size_t j = 0; j < n; ++j) widest = std::max(widest, d[medoid * n + j]);
    set.templates.push_back({label, group[medoid]->samples});
  }
  set.threshold = std::max(widest * (1.0 + options.margin), options.min_threshold);
  return set;
}

TemplateRecognizer::TemplateRecognizer(TemplateSet templates, RecognizerConfig config)
    : set_(std::move(templates)), config_(config) {
  if (set_.templates.empty()) throw std::invalid_argument("recognizer needs at least one template");
  for (const auto& t : set_.templates) {
    if (t.samples.size() != set_.window()) {
      throw std::invalid_argument("templates must share one window length");
    }
  }
  if (!(set_.threshold > 0.0)) throw std::invalid_argument("threshold must be positive");
}

void TemplateRecognizer::reset() {
  window_.clear();
  last_t_.reset();
  last_detection_.reset();
}

std::optional<GestureDetection> TemplateRecognizer::ingest(const ImuSample& sample) {
  if (last_t_ && !(sample.t > *last_t_)) {
    throw OutOfOrderSample("IMU sample at t=" + std::to_string(sample.t) +
                           " not after t=" + std::to_string(*last_t_));
  }
  last_t_ = sample.t;
  window_.push_back(sample);
  if (window_.size() > set_.window()) window_.erase(window_.begin());
  if (window_.size() < set_.window()) return std::nullopt;
  if (last_detection_ && sample.t - *last_detection_ < config_.refractory) return std::nullopt;
  if (peak_gyro(window_) < config_.min_motion) return std::nullopt;

  double best = std::numeric_limits<double>::infinity();
  GestureLabel label = GestureLabel::G1;
  for (const auto& t : set_.templates) {
    const double d = dtw_distance(std::span<const ImuSample>(window_), std::span<const ImuSample>(t.samples));
    if (d < best) {
      best = d;
      label = t.label;
    }
  }
  if (!(best < set_.threshold)) return std::nullopt;
  last_detection_ = sample.t;
  return GestureDetection{label, sample.t, std::clamp(1.0 - best / set_.threshold, 0.0, 1.0), best};
}

}  // namespace hri::gesture
