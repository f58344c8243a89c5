#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

// Reference computations written independently of the library, in the most
// literal form of each textbook definition.
namespace hri::test::oracle {

inline long double mean(const std::vector<long double>& xs) {
  long double s = 0;
  for (auto x : xs) s += x;
  return s / static_cast<long double>(xs.size());
}

inline long double sample_variance(const std::vector<long double>& xs) {
  const long double m = mean(xs);
  long double s = 0;
  for (auto x : xs) s += (x - m) * (x - m);
  return s / static_cast<long double>(xs.size() - 1);
}

/// Cronbach's alpha, column by column as a spreadsheet would.
inline double alpha(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size(), k = rows.front().size();
  long double item_var_sum = 0;
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<long double> col;
    for (std::size_t i = 0; i < n; ++i) col.push_back(rows[i][j]);
    item_var_sum += sample_variance(col);
  }
  std::vector<long double> totals;
  for (const auto& r : rows) {
    long double t = 0;
    for (auto v : r) t += v;
    totals.push_back(t);
  }
  const long double kk = static_cast<long double>(k);
  return static_cast<double>(kk / (kk - 1) * (1 - item_var_sum / sample_variance(totals)));
}

/// Type-7 quantile: h = (n - 1) p, interpolate between floor(h) and ceil(h).
inline double quantile(std::vector<double> xs, double p) {
  std::sort(xs.begin(), xs.end());
  const double h = (static_cast<double>(xs.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = static_cast<std::size_t>(std::ceil(h));
  return xs[lo] + (h - std::floor(h)) * (xs[hi] - xs[lo]);
}

struct Box {
  double q1, median, q3, lower_whisker, upper_whisker;
  std::vector<double> outliers;
};

inline Box box(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  Box b{quantile(xs, 0.25), quantile(xs, 0.5), quantile(xs, 0.75), 0, 0, {}};
  const double lo = b.q1 - 1.5 * (b.q3 - b.q1), hi = b.q3 + 1.5 * (b.q3 - b.q1);
  std::vector<double> inliers;
  for (double x : xs) (x < lo || x > hi ? b.outliers : inliers).push_back(x);
  b.lower_whisker = inliers.front();
  b.upper_whisker = inliers.back();
  return b;
}

}  // namespace hri::test::oracle
