#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "hri/analytics/analytics.hpp"
#include "hri/store/task_store.hpp"

namespace hri::analytics {

// ---------------------------------------------------------------------------
// Confusion matrix

std::size_t ConfusionMatrix::row_sum(std::size_t truth) const {
  return std::accumulate(counts[truth].begin(), counts[truth].end(), std::size_t{0});
}

std::size_t ConfusionMatrix::column_sum(std::size_t column) const {
  std::size_t sum = 0;
  for (const auto& row : counts) sum += row[column];
  return sum;
}

std::size_t ConfusionMatrix::total() const {
  std::size_t sum = 0;
  for (std::size_t k = 0; k < kLabelCount; ++k) sum += row_sum(k);
  return sum;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t sum = 0;
  for (std::size_t k = 0; k < kLabelCount; ++k) sum += counts[k][k];
  return sum;
}

std::optional<double> ConfusionMatrix::recall(GestureLabel label) const {
  const std::size_t k = gesture::index_of(label);
  const std::size_t n = row_sum(k);
  if (n == 0) return std::nullopt;
  return static_cast<double>(counts[k][k]) / static_cast<double>(n);
}

std::optional<double> ConfusionMatrix::precision(GestureLabel label) const {
  const std::size_t k = gesture::index_of(label);
  const std::size_t n = column_sum(k);
  if (n == 0) return std::nullopt;
  return static_cast<double>(counts[k][k]) / static_cast<double>(n);
}

double ConfusionMatrix::accuracy() const {
  const std::size_t n = total();
  return n == 0 ? 0.0 : static_cast<double>(trace()) / static_cast<double>(n);
}

ConfusionMatrix confusion_matrix(std::span<const TrialRecord> trials) {
  if (trials.empty()) throw std::invalid_argument("confusion matrix of no trials");
  ConfusionMatrix m;
  for (const auto& t : trials) {
    const std::size_t col = t.predicted ? gesture::index_of(*t.predicted) : ConfusionMatrix::kMissed;
    ++m.counts[gesture::index_of(t.truth)][col];
  }
  return m;
}

// ---------------------------------------------------------------------------
// Cronbach's alpha

namespace {

double sample_variance(std::span<const double> xs) {
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / (n - 1.0);
}

double mean_of(std::span<const double> xs) { return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size()); }

}  // namespace

double cronbach_alpha(const ItemMatrix& items) {
  const std::size_t n = items.size();
  if (n < 2) throw std::invalid_argument("cronbach alpha needs at least two respondents");
  const std::size_t k = items.front().size();
  if (k < 2) throw std::invalid_argument("cronbach alpha needs at least two items");
  for (const auto& row : items) {
    if (row.size() != k) throw std::invalid_argument("ragged item matrix");
  }
  double item_var_sum = 0.0;
  std::vector<double> column(n), totals(n, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      column[i] = items[i][j];
      totals[i] += items[i][j];
    }
    item_var_sum += sample_variance(column);
  }
  const double total_var = sample_variance(totals);
  if (!(total_var > 0.0)) throw std::invalid_argument("cronbach alpha undefined: zero total variance");
  const double kd = static_cast<double>(k);
  return kd / (kd - 1.0) * (1.0 - item_var_sum / total_var);
}

// ---------------------------------------------------------------------------
// UEQ

std::string_view to_string(UeqScale scale) {
  switch (scale) {
    case UeqScale::attractiveness: return "attractiveness";
    case UeqScale::perspicuity: return "perspicuity";
    case UeqScale::efficiency: return "efficiency";
    case UeqScale::dependability: return "dependability";
    case UeqScale::stimulation: return "stimulation";
    case UeqScale::novelty: return "novelty";
  }
  return "";
}

std::optional<UeqScale> parse_ueq_scale(std::string_view text) {
  for (UeqScale s : kUeqScales) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

UeqLayout parse_ueq_layout(std::istream& in) {
  UeqLayout layout{};
  std::array<bool, kUeqItems> seen{};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#' || line.starts_with("item")) continue;
    std::istringstream row(line);
    std::size_t item = 0;
    std::string scale, polarity;
    if (!(row >> item >> scale >> polarity)) throw std::invalid_argument("malformed layout row: " + line);
    if (item < 1 || item > kUeqItems) throw std::invalid_argument("layout item out of range: " + line);
    auto s = parse_ueq_scale(scale);
    if (!s) throw std::invalid_argument("unknown scale '" + scale + "'");
    if (polarity != "normal" && polarity != "reversed") throw std::invalid_argument("unknown polarity '" + polarity + "'");
    if (seen[item - 1]) throw std::invalid_argument("layout item " + std::to_string(item) + " repeated");
    seen[item - 1] = true;
    layout[item - 1] = {*s, polarity == "reversed"};
  }
  for (std::size_t i = 0; i < kUeqItems; ++i) {
    if (!seen[i]) throw std::invalid_argument("layout item " + std::to_string(i + 1) + " missing");
  }
  return layout;
}

UeqLayout load_ueq_layout(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open layout file " + path);
  return parse_ueq_layout(in);
}

const UeqLayout& standard_ueq_layout() {
  using enum UeqScale;
  static const UeqLayout layout{{
      {attractiveness, false}, {perspicuity, false},   {novelty, true},         {perspicuity, true},
      {stimulation, true},     {stimulation, false},   {stimulation, false},    {dependability, false},
      {efficiency, true},      {novelty, true},        {dependability, false},  {attractiveness, true},
      {perspicuity, false},    {attractiveness, false}, {novelty, false},       {attractiveness, false},
      {dependability, true},   {stimulation, true},    {dependability, true},   {efficiency, false},
      {perspicuity, true},     {efficiency, false},    {efficiency, true},      {attractiveness, true},
      {attractiveness, true},  {novelty, false},
  }};
  return layout;
}

std::string_view to_string(Evaluation evaluation) {
  switch (evaluation) {
    case Evaluation::negative: return "negative";
    case Evaluation::neutral: return "neutral";
    case Evaluation::positive: return "positive";
  }
  return "";
}

Evaluation classify(double mean) {
  if (mean > 0.8) return Evaluation::positive;
  if (mean < -0.8) return Evaluation::negative;
  return Evaluation::neutral;
}

std::optional<Interval> ScaleScore::ci() const {
  if (!ci_half_width) return std::nullopt;
  return Interval{mean - *ci_half_width, mean + *ci_half_width};
}

namespace {

ScaleScore score(std::span<const double> per_respondent) {
  ScaleScore s;
  s.mean = mean_of(per_respondent);
  if (per_respondent.size() >= 2) {
    s.ci_half_width = 1.96 * std::sqrt(sample_variance(per_respondent)) /
                      std::sqrt(static_cast<double>(per_respondent.size()));
  }
  s.evaluation = classify(s.mean);
  return s;
}

}  // namespace

UeqScaleReport ueq_scale_report(const ItemMatrix& answers, const UeqLayout& layout) {
  if (answers.empty()) throw std::invalid_argument("no questionnaire responses");
  const std::size_t n = answers.size();
  std::map<UeqScale, std::vector<double>> per_scale;
  std::vector<double> pragmatic(n), hedonic(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto& row = answers[r];
    if (row.size() != kUeqItems) {
      throw std::invalid_argument("respondent " + std::to_string(r + 1) + " has " + std::to_string(row.size()) +
                                  " answers, expected 26");
    }
    std::map<UeqScale, std::pair<double, int>> acc;
    for (std::size_t i = 0; i < kUeqItems; ++i) {
      if (!(row[i] >= -3.0 && row[i] <= 3.0)) throw std::invalid_argument("answer outside [-3, 3]");
      const double v = layout[i].reversed ? -row[i] : row[i];
      acc[layout[i].scale].first += v;
      acc[layout[i].scale].second += 1;
    }
    std::map<UeqScale, double> scale_score;
    for (UeqScale s : kUeqScales) {
      const auto& [sum, count] = acc[s];
      if (count == 0) throw std::invalid_argument("layout has no items for " + std::string(to_string(s)));
      scale_score[s] = sum / count;
      per_scale[s].push_back(scale_score[s]);
    }
    pragmatic[r] = (scale_score[UeqScale::perspicuity] + scale_score[UeqScale::efficiency] +
                    scale_score[UeqScale::dependability]) / 3.0;
    hedonic[r] = (scale_score[UeqScale::stimulation] + scale_score[UeqScale::novelty]) / 2.0;
  }
  UeqScaleReport report;
  report.respondents = n;
  for (UeqScale s : kUeqScales) report.scales[s] = score(per_scale[s]);
  report.pragmatic = score(pragmatic);
  report.hedonic = score(hedonic);
  return report;
}

std::optional<bool> significant_difference(const ScaleScore& a, const ScaleScore& b) {
  const auto ia = a.ci();
  const auto ib = b.ci();
  if (!ia || !ib) return std::nullopt;
  return !overlaps(*ia, *ib);
}

// ---------------------------------------------------------------------------
// Timing

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty data");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

BoxStats boxplot_stats(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("box plot of no samples");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  BoxStats b;
  b.n = s.size();
  b.min = s.front();
  b.max = s.back();
  b.q1 = quantile_sorted(s, 0.25);
  b.median = quantile_sorted(s, 0.5);
  b.q3 = quantile_sorted(s, 0.75);
  const double iqr = b.q3 - b.q1;
  const double lo_fence = b.q1 - 1.5 * iqr;
  const double hi_fence = b.q3 + 1.5 * iqr;
  b.lower_whisker = b.q1;
  b.upper_whisker = b.q3;
  bool any_inlier = false;
  for (double x : s) {
    if (x < lo_fence || x > hi_fence) {
      b.outliers.push_back(x);
      continue;
    }
    if (!any_inlier) {
      b.lower_whisker = x;
      any_inlier = true;
    }
    b.upper_whisker = x;
  }
  return b;
}

CompletionSummary completion_summary(std::span<const SessionLog> logs) {
  CompletionSummary out;
  for (Modality m : {Modality::gesture, Modality::touchscreen}) out[m] = {};
  for (const auto& log : logs) {
    auto& c = out[log.modality];
    ++c.sessions;
    if (log.completed_all()) ++c.completed_all;
    for (std::size_t k = 0; k < kStudyTasks; ++k) {
      if (log.tasks[k].completed) ++c.samples[k];
    }
  }
  return out;
}

std::vector<double> task_durations(std::span<const SessionLog> logs, Modality modality, std::size_t task) {
  std::vector<double> out;
  for (const auto& log : logs) {
    if (log.modality == modality && log.tasks.at(task).completed) out.push_back(log.tasks[task].duration);
  }
  return out;
}

std::map<Modality, std::array<std::optional<BoxStats>, kStudyTasks>> timing_stats(std::span<const SessionLog> logs) {
  std::map<Modality, std::array<std::optional<BoxStats>, kStudyTasks>> out;
  for (Modality m : {Modality::gesture, Modality::touchscreen}) {
    for (std::size_t k = 0; k < kStudyTasks; ++k) {
      const auto d = task_durations(logs, m, k);
      if (!d.empty()) out[m][k] = boxplot_stats(d);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Delimited input

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    while (!cell.empty() && std::isspace(static_cast<unsigned char>(cell.back()))) cell.pop_back();
    std::size_t i = 0;
    while (i < cell.size() && std::isspace(static_cast<unsigned char>(cell[i]))) ++i;
    out.push_back(cell.substr(i));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::vector<TrialRecord> read_trials_csv(std::istream& in) {
  std::vector<TrialRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#' || line.starts_with("truth")) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 2) throw std::invalid_argument("trials line " + std::to_string(lineno) + ": expected 2 fields");
    auto truth = gesture::parse_label(cells[0]);
    if (!truth) throw std::invalid_argument("trials line " + std::to_string(lineno) + ": unknown label '" + cells[0] + "'");
    TrialRecord r{*truth, std::nullopt};
    if (!cells[1].empty() && cells[1] != "missed") {
      r.predicted = gesture::parse_label(cells[1]);
      if (!r.predicted) {
        throw std::invalid_argument("trials line " + std::to_string(lineno) + ": unknown label '" + cells[1] + "'");
      }
    }
    out.push_back(r);
  }
  return out;
}

ItemMatrix read_matrix_csv(std::istream& in) {
  ItemMatrix out;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<double> row;
    bool numeric = true;
    for (const auto& cell : split_csv(line)) {
      try {
        row.push_back(store::parse_double(cell));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      throw std::invalid_argument("matrix line " + std::to_string(lineno) + ": non-numeric cell");
    }
    first = false;
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace hri::analytics
