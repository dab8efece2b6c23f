#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace navisense {

/// Per-trial outcome. `total_time_s` is always search + guidance.
struct TrialRecord {
  double search_time_s = 0.0;
  double guidance_time_s = 0.0;
  double total_time_s = 0.0;
  int undesired_touches = 0;
  bool success = false;
  std::string transcript;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

/// A trial record with the campaign coordinates it was produced under.
struct TrialLogEntry {
  std::string participant;
  std::string method;
  std::string object;
  int trial = 0;
  std::uint64_t seed = 0;
  std::string scene_hash;
  TrialRecord record;

  friend bool operator==(const TrialLogEntry&, const TrialLogEntry&) = default;
};

std::string to_json_line(const TrialLogEntry& entry);
void write_trial_log(std::ostream& os, const std::vector<TrialLogEntry>& entries);

/// Reads one JSON object per line; blank lines are skipped. Throws
/// Error(kInvalidInput) naming the line number on malformed input.
std::vector<TrialLogEntry> read_trial_log(std::istream& is);

/// CSV variant: header with participant, method, object and any of
/// search_time_s, guidance_time_s, total_time_s, undesired_touches, success.
/// Missing time columns are derived where possible.
std::vector<TrialLogEntry> read_trial_csv(std::istream& is);

}  // namespace navisense
