#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>

#include "navisense/error.hpp"
#include "navisense/stats.hpp"
#include "text_util.hpp"

namespace navisense::stats {

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::kSearchTime: return "search_time";
    case Metric::kGuidanceTime: return "guidance_time";
    case Metric::kTotalTime: return "total_time";
    case Metric::kUndesiredTouches: return "undesired_touches";
    case Metric::kSuccess: return "success";
  }
  return "?";
}

std::string_view display_name(Metric m) {
  switch (m) {
    case Metric::kSearchTime: return "Search Time (s)";
    case Metric::kGuidanceTime: return "Guidance Time (s)";
    case Metric::kTotalTime: return "Total Time (s)";
    case Metric::kUndesiredTouches: return "Undesired Objects";
    case Metric::kSuccess: return "Accuracy (%)";
  }
  return "?";
}

Metric parse_metric(std::string_view name) {
  const std::string n = detail::lower(name);
  for (Metric m : kTableMetrics) {
    if (n == to_string(m)) return m;
  }
  if (n == "accuracy") return Metric::kSuccess;
  if (n == "undesired" || n == "touches") return Metric::kUndesiredTouches;
  throw Error(ErrorCode::kInvalidInput,
              "unknown metric '" + std::string(name) +
                  "' (expected search_time, guidance_time, total_time, undesired_touches, success)");
}

double metric_value(const TrialRecord& r, Metric m) {
  switch (m) {
    case Metric::kSearchTime: return r.search_time_s;
    case Metric::kGuidanceTime: return r.guidance_time_s;
    case Metric::kTotalTime: return r.total_time_s;
    case Metric::kUndesiredTouches: return static_cast<double>(r.undesired_touches);
    case Metric::kSuccess: return r.success ? 1.0 : 0.0;
  }
  return 0.0;
}

std::vector<GroupSummary> summarize(std::span<const TrialLogEntry> records, const GroupKey& key,
                                    const std::vector<std::string>& expected) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const TrialLogEntry*>> groups;
  for (const auto& r : records) {
    const std::string k = key(r);
    auto [it, inserted] = groups.try_emplace(k);
    if (inserted) order.push_back(k);
    it->second.push_back(&r);
  }
  for (const auto& e : expected) {
    if (!groups.contains(e)) order.push_back(e);
  }

  std::vector<GroupSummary> out;
  for (const auto& k : order) {
    GroupSummary g;
    g.key = k;
    auto it = groups.find(k);
    if (it == groups.end()) {
      g.missing = true;
      out.push_back(std::move(g));
      continue;
    }
    const auto& rs = it->second;
    g.n = rs.size();
    for (Metric m : kTableMetrics) {
      std::vector<double> xs;
      xs.reserve(rs.size());
      for (const auto* r : rs) xs.push_back(metric_value(r->record, m));
      g.metrics.push_back({mean(xs), sample_sd(xs)});
    }
    g.successes = static_cast<std::size_t>(
        std::count_if(rs.begin(), rs.end(), [](const auto* r) { return r->record.success; }));
    g.accuracy_ci = wilson_ci(static_cast<long>(g.successes), static_cast<long>(g.n));
    out.push_back(std::move(g));
  }
  return out;
}

TrialMatrix build_matrix(std::span<const TrialLogEntry> records, Metric metric) {
  TrialMatrix m;
  std::map<std::pair<std::string, std::string>, std::vector<double>> cells;
  for (const auto& r : records) {
    if (std::find(m.participants.begin(), m.participants.end(), r.participant) == m.participants.end()) {
      m.participants.push_back(r.participant);
    }
    if (std::find(m.methods.begin(), m.methods.end(), r.method) == m.methods.end()) {
      m.methods.push_back(r.method);
    }
    cells[{r.participant, r.method}].push_back(metric_value(r.record, metric));
  }
  std::vector<std::string> missing;
  for (const auto& p : m.participants) {
    std::vector<double> row;
    for (const auto& meth : m.methods) {
      auto it = cells.find({p, meth});
      if (it == cells.end()) {
        missing.push_back(p + "/" + meth);
        row.push_back(std::nan(""));
      } else {
        row.push_back(mean(it->second));
      }
    }
    m.values.push_back(std::move(row));
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& s : missing) list += (list.empty() ? "" : ", ") + s;
    throw Error(ErrorCode::kInvalidInput, "incomplete participant x method grid, missing: " + list);
  }
  return m;
}

namespace {

std::string mean_sd(const MetricSummary& s) {
  if (std::isnan(s.sd)) return fmt::format("{:.2f} ± n/a", s.mean);
  return fmt::format("{:.2f} ± {:.2f}", s.mean, s.sd);
}

std::string accuracy_cell(const GroupSummary& g) {
  return fmt::format("{:.2f}% ({}/{})", 100.0 * static_cast<double>(g.successes) / static_cast<double>(g.n),
                     g.successes, g.n);
}

// Column width in displayed characters (the ± sign is one glyph, two bytes).
std::size_t display_width(const std::string& s) {
  std::size_t w = 0;
  for (unsigned char c : s) w += (c & 0xC0) != 0x80 ? 1 : 0;
  return w;
}

std::string pad(const std::string& s, std::size_t width) {
  const std::size_t w = display_width(s);
  return s + std::string(width > w ? width - w : 0, ' ');
}

void print_grid(std::ostream& os, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& row : rows) {
    if (widths.size() < row.size()) widths.resize(row.size(), 0);
    for (std::size_t j = 0; j < row.size(); ++j) widths[j] = std::max(widths[j], display_width(row[j]));
  }
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t j = 0; j < row.size(); ++j) {
      line += j + 1 == row.size() ? row[j] : pad(row[j], widths[j]) + "  ";
    }
    os << line << '\n';
  }
}

}  // namespace

void print_summary_table(std::ostream& os, const std::vector<GroupSummary>& groups) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"Metric"};
  for (const auto& g : groups) header.push_back(g.missing ? g.key + " (no records)" : g.key);
  rows.push_back(header);
  for (std::size_t mi = 0; mi < std::size(kTableMetrics); ++mi) {
    const Metric m = kTableMetrics[mi];
    std::vector<std::string> row{std::string(display_name(m))};
    for (const auto& g : groups) {
      if (g.missing) {
        row.emplace_back("-");
      } else if (m == Metric::kSuccess) {
        row.push_back(accuracy_cell(g));
      } else {
        row.push_back(mean_sd(g.metrics[mi]));
      }
    }
    rows.push_back(std::move(row));
  }
  std::vector<std::string> ci_row{"Accuracy 95% CI"};
  for (const auto& g : groups) {
    ci_row.push_back(g.missing ? "-" : fmt::format("[{:.3f}, {:.3f}]", g.accuracy_ci.lo, g.accuracy_ci.hi));
  }
  rows.push_back(std::move(ci_row));
  print_grid(os, rows);
  for (const auto& g : groups) {
    if (g.missing) os << "warning: no records for group '" << g.key << "'\n";
  }
}

void write_summary_csv(std::ostream& os, const std::vector<GroupSummary>& groups) {
  os << "group,n";
  for (Metric m : kTableMetrics) {
    if (m == Metric::kSuccess) continue;
    os << ',' << to_string(m) << "_mean," << to_string(m) << "_sd";
  }
  os << ",successes,accuracy,accuracy_ci_lo,accuracy_ci_hi\n";
  for (const auto& g : groups) {
    os << g.key << ',' << g.n;
    if (g.missing) {
      os << std::string(2 * (std::size(kTableMetrics) - 1) + 4, ',') << '\n';
      continue;
    }
    for (std::size_t mi = 0; mi < std::size(kTableMetrics); ++mi) {
      if (kTableMetrics[mi] == Metric::kSuccess) continue;
      const auto& s = g.metrics[mi];
      os << ',' << detail::format_double(s.mean) << ','
         << (std::isnan(s.sd) ? std::string() : detail::format_double(s.sd));
    }
    os << ',' << g.successes << ','
       << detail::format_double(static_cast<double>(g.successes) / static_cast<double>(g.n)) << ','
       << detail::format_double(g.accuracy_ci.lo) << ',' << detail::format_double(g.accuracy_ci.hi)
       << '\n';
  }
}

void print_method_object_table(std::ostream& os, std::span<const TrialLogEntry> records, Metric metric) {
  std::vector<std::string> methods;
  std::vector<std::string> objects;
  std::map<std::pair<std::string, std::string>, std::vector<double>> cells;
  for (const auto& r : records) {
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
    if (std::find(objects.begin(), objects.end(), r.object) == objects.end()) objects.push_back(r.object);
    cells[{r.method, r.object}].push_back(metric_value(r.record, metric));
  }
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{std::string(display_name(metric))};
  header.insert(header.end(), objects.begin(), objects.end());
  rows.push_back(std::move(header));
  for (const auto& m : methods) {
    std::vector<std::string> row{m};
    for (const auto& o : objects) {
      auto it = cells.find({m, o});
      row.push_back(it == cells.end() ? "-" : mean_sd({mean(it->second), sample_sd(it->second)}));
    }
    rows.push_back(std::move(row));
  }
  print_grid(os, rows);
}

StatsReport analyze(std::span<const TrialLogEntry> records, const StatsRequest& req) {
  if (records.empty()) throw Error(ErrorCode::kEmptyLog, "no trial records");
  StatsReport rep;
  rep.metric = req.metric;
  rep.alpha = req.alpha;
  rep.corrected_alpha = req.alpha;
  rep.summary = summarize(records, [](const TrialLogEntry& e) { return e.method; });

  std::set<std::string> methods;
  for (const auto& r : records) methods.insert(r.method);
  if (methods.size() < 2) {
    rep.notices.push_back("only one method in the log; comparisons skipped");
    return rep;
  }
  TrialMatrix m = build_matrix(records, req.metric);
  if (m.n() < 2) {
    rep.notices.push_back(
        fmt::format("{} participant(s) in the log; tests need at least 2, comparisons skipped", m.n()));
    return rep;
  }
  const std::size_t pairs = m.k() * (m.k() - 1) / 2;
  rep.corrected_alpha = req.alpha / static_cast<double>(pairs);
  if (req.anova) rep.anova = rm_anova_oneway(m);
  if (req.friedman) rep.friedman = friedman(m);
  for (std::size_t a = 0; a < m.k(); ++a) {
    for (std::size_t b = a + 1; b < m.k(); ++b) {
      const auto xa = m.column(a);
      const auto xb = m.column(b);
      if (req.t_test) {
        auto r = paired_t(xa, xb);
        rep.t_tests.push_back({m.methods[a], m.methods[b], r, !r.degenerate && r.p < rep.corrected_alpha});
      }
      if (req.wilcoxon) {
        auto r = wilcoxon_signed_rank(xa, xb);
        rep.wilcoxon.push_back({m.methods[a], m.methods[b], r, !r.degenerate && r.p < rep.corrected_alpha});
      }
    }
  }
  return rep;
}

namespace {

std::string p_text(double p) { return p < 1e-3 ? "p < 0.001" : fmt::format("p = {:.4f}", p); }

}  // namespace

void print_report(std::ostream& os, const StatsReport& rep) {
  print_summary_table(os, rep.summary);
  os << '\n' << "Metric under test: " << display_name(rep.metric) << '\n';
  for (const auto& n : rep.notices) os << "note: " << n << '\n';
  if (rep.anova) {
    const auto& a = *rep.anova;
    os << fmt::format("RM ANOVA: F({:g}, {:g}) = {:.3f}, {}\n", a.df_treatment, a.df_error, a.f,
                      p_text(a.p));
  }
  if (rep.friedman) {
    const auto& f = *rep.friedman;
    os << fmt::format("Friedman: chi2({:g}) = {:.3f}, {} ({}; asymptotic {})\n", f.df, f.statistic,
                      p_text(f.p), f.exact ? "exact" : "chi-square", p_text(f.p_asymptotic));
  }
  if (!rep.t_tests.empty() || !rep.wilcoxon.empty()) {
    os << fmt::format("Bonferroni alpha = {:.4f} / comparisons = {:.4f}\n", rep.alpha, rep.corrected_alpha);
  }
  for (const auto& c : rep.t_tests) {
    os << fmt::format("paired t  {} vs {}: ", c.a, c.b);
    if (c.result.degenerate) {
      os << "degenerate (no differences), p = 1\n";
    } else {
      os << fmt::format("t({:g}) = {:.3f}, {}{}\n", c.result.df, c.result.statistic, p_text(c.result.p),
                        c.significant ? " *" : "");
    }
  }
  for (const auto& c : rep.wilcoxon) {
    os << fmt::format("wilcoxon  {} vs {}: ", c.a, c.b);
    if (c.result.degenerate) {
      os << "degenerate (no differences), p = 1\n";
    } else {
      os << fmt::format("W = {:g}, {} ({}){}\n", c.result.statistic, p_text(c.result.p),
                        c.result.exact ? "exact" : "normal approx.", c.significant ? " *" : "");
    }
  }
}

}  // namespace navisense::stats
