#include <cmath>
#include <string>

#include "hri/gesture/gesture.hpp"

namespace hri::gesture {

void StochasticRecognizerModel::validate() const {
  for (std::size_t i = 0; i < kLabelCount; ++i) {
    if (!(recall[i] >= 0.0 && recall[i] <= 1.0)) {
      throw std::invalid_argument("recall of " + std::string(to_string(kAllLabels[i])) + " outside [0,1]");
    }
    double sum = 0.0;
    for (double p : confusion[i]) {
      if (p < 0.0) throw std::invalid_argument("negative confusion probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw std::invalid_argument("confusion row of " + std::string(to_string(kAllLabels[i])) +
                                  " does not sum to 1");
    }
  }
  if (latency_min < 0.0 || latency_max < latency_min) throw std::invalid_argument("invalid latency range");
}

StochasticRecognizerModel StochasticRecognizerModel::perfect() { return {}; }

StochasticRecognizerModel StochasticRecognizerModel::defaults() {
  StochasticRecognizerModel m;
  m.recall = {0.40, 0.25, 0.30, 0.50};
  m.confusion = {{
      {0.99, 0.01, 0.00, 0.00},
      {0.01, 0.99, 0.00, 0.00},
      {0.00, 0.00, 0.99, 0.01},
      {0.00, 0.00, 0.01, 0.99},
  }};
  m.latency_min = 0.1;
  m.latency_max = 0.3;
  return m;
}

StochasticRecognizerModel StochasticRecognizerModel::with_recall(double p) {
  StochasticRecognizerModel m = defaults();
  m.recall.fill(p);
  return m;
}

std::optional<GestureDetection> stochastic_recognize(GestureLabel truth, const StochasticRecognizerModel& model,
                                                     std::mt19937_64& rng, double t) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t row = index_of(truth);
  if (!(unit(rng) < model.recall[row])) return std::nullopt;

  const double u = unit(rng);
  double cumulative = 0.0;
  GestureLabel predicted = truth;
  for (std::size_t k = 0; k < kLabelCount; ++k) {
    cumulative += model.confusion[row][k];
    if (u < cumulative) {
      predicted = kAllLabels[k];
      break;
    }
  }
  double latency = model.latency_min;
  if (model.latency_max > model.latency_min) {
    latency = std::uniform_real_distribution<double>(model.latency_min, model.latency_max)(rng);
  }
  return GestureDetection{predicted, t + latency, 1.0, 0.0};
}

}  // namespace hri::gesture
