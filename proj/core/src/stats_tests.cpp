#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <fmt/format.h>

#include "navisense/error.hpp"
#include "navisense/stats.hpp"

namespace navisense::stats {

double mean(std::span<const double> xs) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double sample_sd(std::span<const double> xs) {
  if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

std::vector<double> average_ranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t m = i; m <= j; ++m) ranks[order[m]] = r;
    i = j + 1;
  }
  return ranks;
}

Interval wilson_ci(long successes, long n, double confidence) {
  if (n <= 0) throw Error(ErrorCode::kInvalidInput, "wilson_ci: n must be >= 1");
  if (successes < 0 || successes > n) {
    throw Error(ErrorCode::kInvalidInput, "wilson_ci: successes must be in [0, n]");
  }
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw Error(ErrorCode::kInvalidInput, "wilson_ci: confidence must be in (0, 1)");
  }
  const double z = normal_quantile(1.0 - 0.5 * (1.0 - confidence));
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(successes) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  Interval ci{std::max(0.0, center - half), std::min(1.0, center + half)};
  if (successes == 0) ci.lo = 0.0;
  if (successes == n) ci.hi = 1.0;
  return ci;
}

namespace {

void require_paired(std::span<const double> a, std::span<const double> b, const char* name) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kInvalidInput, fmt::format("{}: samples differ in length", name));
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i]) || !std::isfinite(b[i])) {
      throw Error(ErrorCode::kInvalidInput, fmt::format("{}: non-finite value", name));
    }
  }
}

}  // namespace

TestResult paired_t(std::span<const double> a, std::span<const double> b) {
  require_paired(a, b, "paired_t");
  if (a.size() < 2) throw Error(ErrorCode::kInvalidInput, "paired_t: needs at least 2 pairs");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  TestResult r;
  r.df = static_cast<double>(d.size() - 1);
  const double m = mean(d);
  const double sd = sample_sd(d);
  if (std::all_of(d.begin(), d.end(), [](double x) { return x == 0.0; })) {
    r.degenerate = true;
    r.p = 1.0;
    return r;
  }
  if (sd == 0.0) {
    r.statistic = m > 0.0 ? std::numeric_limits<double>::infinity()
                          : -std::numeric_limits<double>::infinity();
    r.p = 0.0;
    return r;
  }
  r.statistic = m / (sd / std::sqrt(static_cast<double>(d.size())));
  const double x = r.df / (r.df + r.statistic * r.statistic);
  r.p = std::clamp(incomplete_beta(0.5 * r.df, 0.5, x), 0.0, 1.0);
  return r;
}

TestResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  require_paired(a, b, "wilcoxon_signed_rank");
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) d.push_back(a[i] - b[i]);
  }
  TestResult r;
  if (d.empty()) {
    r.degenerate = true;
    r.p = 1.0;
    return r;
  }
  std::vector<double> abs_d(d.size());
  std::transform(d.begin(), d.end(), abs_d.begin(), [](double x) { return std::abs(x); });
  const auto ranks = average_ranks(abs_d);
  const std::size_t n = d.size();

  // Doubled ranks are integers even with ties.
  std::vector<int> r2(n);
  long w_plus2 = 0;
  long total2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    r2[i] = static_cast<int>(std::lround(2.0 * ranks[i]));
    total2 += r2[i];
    if (d[i] > 0.0) w_plus2 += r2[i];
  }
  const long w2 = std::min(w_plus2, total2 - w_plus2);
  r.statistic = 0.5 * static_cast<double>(w2);
  r.df = static_cast<double>(n);

  if (static_cast<int>(n) <= kWilcoxonExactMaxN) {
    // counts[s] = number of sign patterns whose positive doubled-rank sum is s.
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(total2) + 1, 0);
    counts[0] = 1;
    long reach = 0;
    for (int v : r2) {
      for (long s = reach; s >= 0; --s) {
        if (counts[static_cast<std::size_t>(s)] != 0) {
          counts[static_cast<std::size_t>(s + v)] += counts[static_cast<std::size_t>(s)];
        }
      }
      reach += v;
    }
    std::uint64_t at_most = 0;
    for (long s = 0; s <= w2; ++s) at_most += counts[static_cast<std::size_t>(s)];
    const double patterns = std::ldexp(1.0, static_cast<int>(n));
    r.p = std::min(1.0, static_cast<double>(2 * at_most) / patterns);
    r.exact = true;
    return r;
  }

  const double nn = static_cast<double>(n);
  const double mu = nn * (nn + 1.0) / 4.0;
  double tie_term = 0.0;
  std::vector<double> sorted = abs_d;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    tie_term += t * t * t - t;
    i = j + 1;
  }
  const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
  if (!(var > 0.0)) {
    r.p = 1.0;
    return r;
  }
  const double z = std::max(0.0, std::abs(r.statistic - mu) - 0.5) / std::sqrt(var);
  r.p = std::clamp(std::erfc(z / std::sqrt(2.0)), 0.0, 1.0);
  return r;
}

std::vector<double> TrialMatrix::column(std::size_t method) const {
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& row : values) out.push_back(row.at(method));
  return out;
}

void TrialMatrix::validate() const {
  if (k() < 2 || n() < 2) {
    throw Error(ErrorCode::kInvalidInput,
                fmt::format("need at least 2 participants and 2 methods (got {} x {})", n(), k()));
  }
  if (values.size() != n()) throw Error(ErrorCode::kInvalidInput, "grid row count mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i].size() != k()) {
      throw Error(ErrorCode::kInvalidInput,
                  fmt::format("incomplete grid: participant {} has {} of {} cells", participants[i],
                              values[i].size(), k()));
    }
    for (double v : values[i]) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kInvalidInput,
                    fmt::format("incomplete grid: participant {} has a missing value", participants[i]));
      }
    }
  }
}

namespace {

constexpr std::size_t kFriedmanMaxStates = 200000;
constexpr std::size_t kFriedmanMaxK = 7;

// Exact upper tail of the Friedman statistic under within-row exchangeability.
// Works on doubled rank sums so every state is an integer vector.
std::optional<double> friedman_exact(const std::vector<std::vector<int>>& rows2, long observed) {
  const std::size_t k = rows2.front().size();
  if (k > kFriedmanMaxK) return std::nullopt;
  std::map<std::vector<int>, double> dist{{std::vector<int>(k, 0), 1.0}};
  for (const auto& row : rows2) {
    std::vector<int> perm = row;
    std::sort(perm.begin(), perm.end());
    std::vector<std::vector<int>> perms;
    do perms.push_back(perm);
    while (std::next_permutation(perm.begin(), perm.end()));
    // Each distinct arrangement stands for the same number of raw orderings.
    const double w = 1.0 / static_cast<double>(perms.size());
    std::map<std::vector<int>, double> next;
    for (const auto& [sums, prob] : dist) {
      for (const auto& p : perms) {
        std::vector<int> s = sums;
        for (std::size_t j = 0; j < k; ++j) s[j] += p[j];
        next[s] += prob * w;
      }
      if (next.size() > kFriedmanMaxStates) return std::nullopt;
    }
    dist = std::move(next);
  }
  const long centre2 = static_cast<long>(rows2.size()) * static_cast<long>(k + 1);
  double tail = 0.0;
  for (const auto& [sums, prob] : dist) {
    long q = 0;
    for (int s : sums) q += (s - centre2) * (s - centre2);
    if (q >= observed) tail += prob;
  }
  return std::clamp(tail, 0.0, 1.0);
}

}  // namespace

FriedmanResult friedman(const TrialMatrix& m) {
  m.validate();
  const double n = static_cast<double>(m.n());
  const double k = static_cast<double>(m.k());
  std::vector<std::vector<int>> rows2;
  std::vector<double> rank_sum(m.k(), 0.0);
  for (const auto& row : m.values) {
    const auto ranks = average_ranks(row);
    std::vector<int> r2(ranks.size());
    for (std::size_t j = 0; j < ranks.size(); ++j) {
      rank_sum[j] += ranks[j];
      r2[j] = static_cast<int>(std::lround(2.0 * ranks[j]));
    }
    rows2.push_back(std::move(r2));
  }
  double ss = 0.0;
  for (double r : rank_sum) {
    const double dev = r / n - 0.5 * (k + 1.0);
    ss += dev * dev;
  }
  FriedmanResult res;
  res.statistic = 12.0 * n / (k * (k + 1.0)) * ss;
  res.df = k - 1.0;
  res.p_asymptotic = std::clamp(chi_square_sf(res.statistic, res.df), 0.0, 1.0);

  long observed = 0;
  const long centre2 = static_cast<long>(m.n()) * static_cast<long>(m.k() + 1);
  {
    std::vector<long> sums(m.k(), 0);
    for (const auto& row : rows2) {
      for (std::size_t j = 0; j < m.k(); ++j) sums[j] += row[j];
    }
    for (long s : sums) observed += (s - centre2) * (s - centre2);
  }
  if (auto exact = friedman_exact(rows2, observed)) {
    res.p = *exact;
    res.exact = true;
  } else {
    res.p = res.p_asymptotic;
  }
  return res;
}

AnovaResult rm_anova_oneway(const TrialMatrix& m) {
  m.validate();
  const std::size_t n = m.n();
  const std::size_t k = m.k();
  double grand = 0.0;
  for (const auto& row : m.values) {
    for (double v : row) grand += v;
  }
  grand /= static_cast<double>(n * k);
  std::vector<double> row_mean(n, 0.0);
  std::vector<double> col_mean(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      row_mean[i] += m.values[i][j] / static_cast<double>(k);
      col_mean[j] += m.values[i][j] / static_cast<double>(n);
    }
  }
  AnovaResult r;
  for (std::size_t i = 0; i < n; ++i) {
    r.ss_subjects += static_cast<double>(k) * (row_mean[i] - grand) * (row_mean[i] - grand);
    for (std::size_t j = 0; j < k; ++j) {
      const double v = m.values[i][j];
      r.ss_total += (v - grand) * (v - grand);
      const double e = v - row_mean[i] - col_mean[j] + grand;
      r.ss_error += e * e;
    }
  }
  for (std::size_t j = 0; j < k; ++j) {
    r.ss_treatment += static_cast<double>(n) * (col_mean[j] - grand) * (col_mean[j] - grand);
  }
  r.df_treatment = static_cast<double>(k - 1);
  r.df_error = static_cast<double>((k - 1) * (n - 1));
  const double scale = std::max(1.0, r.ss_total);
  if (r.ss_treatment <= 1e-14 * scale) {
    r.f = 0.0;
    r.p = 1.0;
    return r;
  }
  if (r.ss_error <= 1e-14 * scale) {
    r.f = std::numeric_limits<double>::infinity();
    r.p = 0.0;
    return r;
  }
  r.f = (r.ss_treatment / r.df_treatment) / (r.ss_error / r.df_error);
  r.p = std::clamp(f_sf(r.f, r.df_treatment, r.df_error), 0.0, 1.0);
  return r;
}

namespace {

FrameEvalResult eval_frames(std::span<const FrameObservation> frames, double confidence,
                            const std::function<bool(const FrameObservation&)>& present) {
  if (frames.empty()) throw Error(ErrorCode::kInvalidInput, "frame_eval: no frames");
  FrameEvalResult r;
  r.n = frames.size();
  for (const auto& f : frames) {
    if (present(f)) {
      if (f.predicted && f.predicted->label == *f.truth) {
        ++r.correct;
      } else if (f.predicted) {
        ++r.false_positives;
      } else {
        ++r.false_negatives;
      }
    } else if (f.predicted) {
      ++r.false_positives;
    } else {
      ++r.correct;
    }
  }
  r.accuracy = static_cast<double>(r.correct) / static_cast<double>(r.n);
  r.ci = wilson_ci(static_cast<long>(r.correct), static_cast<long>(r.n), confidence);
  return r;
}

}  // namespace

FrameEvalResult frame_eval(std::span<const FrameObservation> frames, double confidence) {
  return eval_frames(frames, confidence, [](const FrameObservation& f) { return f.truth.has_value(); });
}

FrameEvalResult frame_eval(std::span<const FrameObservation> frames, const std::string& target,
                           double confidence) {
  return eval_frames(frames, confidence,
                     [&](const FrameObservation& f) { return f.truth && *f.truth == target; });
}

}  // namespace navisense::stats
