#include <cmath>

#include "hri/gesture/gesture.hpp"

namespace hri::gesture {

std::string_view to_string(GestureLabel label) {
  switch (label) {
    case GestureLabel::G1: return "G1";
    case GestureLabel::G2: return "G2";
    case GestureLabel::G3: return "G3";
    case GestureLabel::G4: return "G4";
  }
  return "";
}

std::string_view describe(GestureLabel label) {
  switch (label) {
    case GestureLabel::G1: return "wrist-up";
    case GestureLabel::G2: return "wrist-down";
    case GestureLabel::G3: return "spike-clockwise";
    case GestureLabel::G4: return "spike-counter-clockwise";
  }
  return "";
}

std::optional<GestureLabel> parse_label(std::string_view text) {
  for (GestureLabel label : kAllLabels) {
    if (to_string(label) == text) return label;
  }
  return std::nullopt;
}

fsm::Signal gesture_to_signal(const GestureDetection& detection) {
  return fsm::Signal{static_cast<int>(index_of(detection.label)) + 1, detection.timestamp};
}

double sample_distance(const ImuSample& a, const ImuSample& b) {
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double da = a.accel[i] - b.accel[i];
    const double dg = a.gyro[i] - b.gyro[i];
    sum += da * da + dg * dg;
  }
  return std::sqrt(sum);
}

double dtw_distance(std::span<const ImuSample> a, std::span<const ImuSample> b) {
  return dtw_distance(a, b, sample_distance);
}

}  // namespace hri::gesture
