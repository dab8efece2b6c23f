#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "navisense/perception.hpp"
#include "navisense/trial_record.hpp"

namespace navisense::stats {

// ---------------------------------------------------------------------------
// Special functions. Series / continued-fraction evaluations with a relative
// tolerance of 1e-15 per term loop; overall accuracy is about 1e-12 in the
// ranges used here.

/// Regularized incomplete beta I_x(a, b) (Lentz continued fraction).
double incomplete_beta(double a, double b, double x);
/// Regularized lower incomplete gamma P(a, x).
double incomplete_gamma_p(double a, double x);
double normal_cdf(double z);
/// Inverse normal CDF (Wichura AS241, about 1e-16 relative).
double normal_quantile(double p);
/// Student t CDF with `df` degrees of freedom.
double student_t_cdf(double t, double df);
double chi_square_sf(double x, double df);
double f_sf(double f, double df1, double df2);

// ---------------------------------------------------------------------------
// Descriptive

double mean(std::span<const double> xs);
/// Sample standard deviation (n - 1); NaN for fewer than two values.
double sample_sd(std::span<const double> xs);

/// Average ranks (1-based) with ties sharing the mean of their positions.
std::vector<double> average_ranks(std::span<const double> xs);

// ---------------------------------------------------------------------------
// Intervals and tests

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Wilson score interval. Throws Error(kInvalidInput) when n = 0,
/// successes > n, or confidence is outside (0, 1).
Interval wilson_ci(long successes, long n, double confidence = 0.95);

struct TestResult {
  double statistic = 0.0;
  double p = 1.0;
  double df = 0.0;
  double df2 = 0.0;
  bool degenerate = false;
  bool exact = false;
};

/// Paired t-test on a - b. All-zero differences give a degenerate result
/// with p = 1. Throws Error(kInvalidInput) on length mismatch or n < 2.
TestResult paired_t(std::span<const double> a, std::span<const double> b);

/// Wilcoxon signed-rank on a - b. Zero differences are dropped, ties get
/// average ranks. W = min(W+, W-). Exact two-sided p from the full sign
/// distribution for n <= 12, normal approximation with continuity and tie
/// correction above.
TestResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

inline constexpr int kWilcoxonExactMaxN = 12;

/// Participant x method grid of one metric.
struct TrialMatrix {
  std::vector<std::string> methods;
  std::vector<std::string> participants;
  std::vector<std::vector<double>> values;  // [participant][method]

  std::size_t n() const { return participants.size(); }
  std::size_t k() const { return methods.size(); }
  std::vector<double> column(std::size_t method) const;
  /// Throws Error(kInvalidInput) unless every row has k finite values and
  /// the grid is at least 2 x 2.
  void validate() const;
};

struct FriedmanResult {
  double statistic = 0.0;
  double df = 0.0;
  double p = 1.0;             // exact when available, else asymptotic
  double p_asymptotic = 1.0;  // chi-square with k - 1 df
  bool exact = false;
};

/// Friedman rank test with average ranks on ties:
///   chi2 = 12 n / (k (k + 1)) * sum_j (Rbar_j - (k + 1) / 2)^2.
/// The exact permutation p is computed by convolving the per-row rank
/// permutation distributions when the state space is small enough.
FriedmanResult friedman(const TrialMatrix& matrix);

struct AnovaResult {
  double f = 0.0;
  double df_treatment = 0.0;
  double df_error = 0.0;
  double p = 1.0;
  double ss_total = 0.0;
  double ss_subjects = 0.0;
  double ss_treatment = 0.0;
  double ss_error = 0.0;
};

/// One-way repeated-measures ANOVA, no sphericity correction.
AnovaResult rm_anova_oneway(const TrialMatrix& matrix);

// ---------------------------------------------------------------------------
// Frame-level accuracy

struct FrameObservation {
  std::optional<std::string> truth;  // label of the target when present
  std::optional<perception::Detection2D> predicted;
};

struct FrameEvalResult {
  std::size_t n = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  Interval ci;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
};

/// Correct iff (present and the prediction carries the target label) or
/// (absent and nothing predicted). A prediction on an absent target or on
/// the wrong object is a false positive; a missed present target is a false
/// negative. Throws Error(kInvalidInput) on an empty list.
FrameEvalResult frame_eval(std::span<const FrameObservation> frames, double confidence = 0.95);

/// Single-target form: a frame's target is present iff its truth equals
/// `target`.
FrameEvalResult frame_eval(std::span<const FrameObservation> frames, const std::string& target,
                           double confidence = 0.95);

// ---------------------------------------------------------------------------
// Summaries

enum class Metric { kSearchTime, kGuidanceTime, kTotalTime, kUndesiredTouches, kSuccess };

/// Table order: search, guidance, total, undesired, accuracy.
inline constexpr Metric kTableMetrics[] = {Metric::kSearchTime, Metric::kGuidanceTime,
                                           Metric::kTotalTime, Metric::kUndesiredTouches,
                                           Metric::kSuccess};

std::string_view to_string(Metric m);
std::string_view display_name(Metric m);
Metric parse_metric(std::string_view name);  // throws Error(kInvalidInput)
double metric_value(const TrialRecord& r, Metric m);

struct MetricSummary {
  double mean = 0.0;
  double sd = 0.0;  // NaN when n < 2
};

struct GroupSummary {
  std::string key;
  std::size_t n = 0;
  std::vector<MetricSummary> metrics;  // parallel to kTableMetrics
  std::size_t successes = 0;
  Interval accuracy_ci;
  bool missing = false;  // requested group without records
};

using GroupKey = std::function<std::string(const TrialLogEntry&)>;

/// Mean and sample sd per metric per group, groups in first-appearance
/// order. Groups listed in `expected` but absent from `records` come back
/// as warning rows with `missing = true`.
std::vector<GroupSummary> summarize(std::span<const TrialLogEntry> records, const GroupKey& key,
                                    const std::vector<std::string>& expected = {});

/// Per-participant x method grid, each cell the mean over that
/// participant's trials. Throws Error(kInvalidInput) listing missing cells.
TrialMatrix build_matrix(std::span<const TrialLogEntry> records, Metric metric);

/// Metric rows x group columns, "mean ± sd" cells (accuracy as a percent
/// with its denominator).
void print_summary_table(std::ostream& os, const std::vector<GroupSummary>& groups);
void write_summary_csv(std::ostream& os, const std::vector<GroupSummary>& groups);

/// Method rows x object columns for one metric.
void print_method_object_table(std::ostream& os, std::span<const TrialLogEntry> records,
                               Metric metric);

struct PairwiseComparison {
  std::string a;
  std::string b;
  TestResult result;
  bool significant = false;
};

struct StatsReport {
  Metric metric = Metric::kTotalTime;
  std::vector<GroupSummary> summary;
  double alpha = 0.05;
  double corrected_alpha = 0.05;
  std::optional<AnovaResult> anova;
  std::optional<FriedmanResult> friedman;
  std::vector<PairwiseComparison> t_tests;
  std::vector<PairwiseComparison> wilcoxon;
  std::vector<std::string> notices;
};

struct StatsRequest {
  Metric metric = Metric::kTotalTime;
  bool anova = true;
  bool t_test = true;
  bool friedman = true;
  bool wilcoxon = true;
  double alpha = 0.05;
};

/// Summary plus the requested tests across methods. With a single method
/// only the summary is produced and a notice explains why.
StatsReport analyze(std::span<const TrialLogEntry> records, const StatsRequest& request);
void print_report(std::ostream& os, const StatsReport& report);

}  // namespace navisense::stats
