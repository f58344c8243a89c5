#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hri/analytics/session_log.hpp"
#include "hri/gesture/gesture.hpp"

namespace hri::analytics {

using gesture::GestureLabel;
using gesture::kLabelCount;

// ---------------------------------------------------------------------------
// Recognition accuracy

struct TrialRecord {
  GestureLabel truth = GestureLabel::G1;
  std::optional<GestureLabel> predicted;  // nullopt: missed
};

/// Rows are true labels; columns are the four predictions then "missed".
struct ConfusionMatrix {
  static constexpr std::size_t kMissed = kLabelCount;
  std::array<std::array<std::size_t, kLabelCount + 1>, kLabelCount> counts{};

  std::size_t row_sum(std::size_t truth) const;
  std::size_t column_sum(std::size_t column) const;
  std::size_t total() const;
  std::size_t trace() const;
  /// Absent for classes with no trials.
  std::optional<double> recall(GestureLabel label) const;
  /// Missed column excluded. Absent for classes never predicted.
  std::optional<double> precision(GestureLabel label) const;
  double accuracy() const;
};

/// Throws std::invalid_argument on empty input.
ConfusionMatrix confusion_matrix(std::span<const TrialRecord> trials);

// ---------------------------------------------------------------------------
// Questionnaires

/// Rows are respondents, columns are items.
using ItemMatrix = std::vector<std::vector<double>>;

inline constexpr double kReliabilityThreshold = 0.7;

/// k/(k-1) * (1 - sum of item variances / variance of totals), variances with
/// the n-1 denominator. Throws std::invalid_argument for fewer than two items
/// or respondents, ragged rows, or zero total variance.
double cronbach_alpha(const ItemMatrix& items);
inline bool reliable(double alpha) { return alpha >= kReliabilityThreshold; }

enum class UeqScale { attractiveness, perspicuity, efficiency, dependability, stimulation, novelty };
inline constexpr std::array<UeqScale, 6> kUeqScales{UeqScale::attractiveness, UeqScale::perspicuity,
                                                   UeqScale::efficiency,     UeqScale::dependability,
                                                   UeqScale::stimulation,    UeqScale::novelty};
inline constexpr std::size_t kUeqItems = 26;
std::string_view to_string(UeqScale scale);
std::optional<UeqScale> parse_ueq_scale(std::string_view text);

struct UeqItem {
  UeqScale scale = UeqScale::attractiveness;
  bool reversed = false;  // negative pole on the right
};

using UeqLayout = std::array<UeqItem, kUeqItems>;

/// Tab-separated `item scale polarity` rows, `#` comments allowed. Every item
/// 1..26 must appear exactly once. Throws std::invalid_argument otherwise.
UeqLayout parse_ueq_layout(std::istream& in);
UeqLayout load_ueq_layout(const std::string& path);
/// The standard published layout, identical to data/ueq_layout.tsv.
const UeqLayout& standard_ueq_layout();

enum class Evaluation { negative, neutral, positive };
std::string_view to_string(Evaluation evaluation);
/// Strictly above 0.8 is positive, strictly below -0.8 negative.
Evaluation classify(double mean);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

inline bool overlaps(const Interval& a, const Interval& b) { return a.low <= b.high && b.low <= a.high; }

struct ScaleScore {
  double mean = 0.0;
  std::optional<double> ci_half_width;  // absent for fewer than two respondents
  Evaluation evaluation = Evaluation::neutral;

  std::optional<Interval> ci() const;
};

struct UeqScaleReport {
  std::size_t respondents = 0;
  std::map<UeqScale, ScaleScore> scales;
  ScaleScore pragmatic;  // perspicuity, efficiency, dependability
  ScaleScore hedonic;    // stimulation, novelty
};

/// Answers are on the -3..+3 scale as ticked; reversed items are negated
/// before scoring. Throws std::invalid_argument for empty input, rows not
/// of 26 items, or scores outside [-3, 3].
UeqScaleReport ueq_scale_report(const ItemMatrix& answers, const UeqLayout& layout = standard_ueq_layout());

/// Significant when both intervals exist and do not overlap.
std::optional<bool> significant_difference(const ScaleScore& a, const ScaleScore& b);

// ---------------------------------------------------------------------------
// Timing

struct BoxStats {
  std::size_t n = 0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double lower_whisker = 0.0;
  double upper_whisker = 0.0;
  std::vector<double> outliers;  // ascending
};

/// Linear-interpolation quantile of sorted data, p in [0,1].
double quantile_sorted(std::span<const double> sorted, double p);
/// Outliers lie beyond 1.5 IQR from the quartiles; whiskers reach the most
/// extreme remaining points. Throws std::invalid_argument on empty input.
BoxStats boxplot_stats(std::span<const double> samples);

struct ModalityCompletion {
  std::size_t sessions = 0;
  std::size_t completed_all = 0;
  std::array<std::size_t, kStudyTasks> samples{};  // sessions that completed task k
};

using CompletionSummary = std::map<Modality, ModalityCompletion>;

CompletionSummary completion_summary(std::span<const SessionLog> logs);

/// Durations of completed task k (0-based) for one modality.
std::vector<double> task_durations(std::span<const SessionLog> logs, Modality modality, std::size_t task);

/// Per modality, per task box statistics; absent where no session completed
/// the task.
std::map<Modality, std::array<std::optional<BoxStats>, kStudyTasks>> timing_stats(std::span<const SessionLog> logs);

// ---------------------------------------------------------------------------
// Delimited input files

/// `truth,predicted` rows with labels G1..G4 and `missed` (or empty). A header
/// row starting with "truth" is skipped.
std::vector<TrialRecord> read_trials_csv(std::istream& in);
/// Comma-separated numeric rows, one respondent per row; `#` comments and a
/// non-numeric header row are skipped.
ItemMatrix read_matrix_csv(std::istream& in);

}  // namespace hri::analytics
