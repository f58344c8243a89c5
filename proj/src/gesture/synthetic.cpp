#include <cmath>
#include <numbers>

#include "hri/gesture/gesture.hpp"

namespace hri::gesture {

namespace {

constexpr double kGravity = 9.81;

}  // namespace

std::vector<ImuSample> synthesize_gesture(GestureLabel label, double t0, std::mt19937_64& rng,
                                          const SynthesisOptions& options) {
  using std::numbers::pi;
  const std::size_t n = options.length;
  const double duration = static_cast<double>(n - 1) / options.rate;
  std::normal_distribution<double> noise(0.0, options.noise > 0.0 ? options.noise : 1.0);

  std::vector<ImuSample> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = n > 1 ? static_cast<double>(k) / static_cast<double>(n - 1) : 0.0;
    ImuSample sample;
    sample.t = t0 + static_cast<double>(k) / options.rate;

    if (label == GestureLabel::G1 || label == GestureLabel::G2) {
      // Pitch the wrist up (G1) or down (G2) and back.
      const double sign = label == GestureLabel::G1 ? 1.0 : -1.0;
      const double amp = 0.9 * options.amplitude * sign;
      const double pitch = amp * std::sin(pi * s);
      sample.gyro = {0.0, amp * pi * std::cos(pi * s) / duration, 0.0};
      sample.accel = {kGravity * std::sin(pitch), 0.0, kGravity * std::cos(pitch)};
    } else {
      // Sharp roll spike, clockwise (G3) or counter-clockwise (G4).
      const double sign = label == GestureLabel::G3 ? -1.0 : 1.0;
      const double amp = 1.2 * options.amplitude * sign;
      const double x = (s - 0.5) / 0.18;
      const double roll = amp * std::exp(-x * x);
      const double roll_rate = roll * (-2.0 * x / 0.18) / duration;
      sample.gyro = {roll_rate, 0.0, 0.0};
      sample.accel = {0.0, kGravity * std::sin(roll), kGravity * std::cos(roll)};
    }
    if (options.noise > 0.0) {
      for (int i = 0; i < 3; ++i) {
        sample.accel[i] += noise(rng);
        sample.gyro[i] += noise(rng);
      }
    }
    out.push_back(sample);
  }
  return out;
}

std::vector<ImuSample> synthesize_rest(double t0, std::size_t count, double rate) {
  std::vector<ImuSample> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    out.push_back({t0 + static_cast<double>(k) / rate, {0.0, 0.0, kGravity}, {0.0, 0.0, 0.0}});
  }
  return out;
}

}  // namespace hri::gesture
