#include "navisense/trial_record.hpp"

#include <map>
#include <string>

#include <fmt/format.h>
#include <json.hpp>

#include "navisense/error.hpp"
#include "text_util.hpp"

namespace navisense {

std::string to_json_line(const TrialLogEntry& e) {
  nlohmann::ordered_json j;
  j["participant"] = e.participant;
  j["method"] = e.method;
  j["object"] = e.object;
  j["trial"] = e.trial;
  j["seed"] = e.seed;
  j["scene_hash"] = e.scene_hash;
  j["search_time_s"] = e.record.search_time_s;
  j["guidance_time_s"] = e.record.guidance_time_s;
  j["total_time_s"] = e.record.total_time_s;
  j["undesired_touches"] = e.record.undesired_touches;
  j["success"] = e.record.success;
  j["transcript"] = e.record.transcript;
  return j.dump();
}

void write_trial_log(std::ostream& os, const std::vector<TrialLogEntry>& entries) {
  for (const auto& e : entries) os << to_json_line(e) << '\n';
}

std::vector<TrialLogEntry> read_trial_log(std::istream& is) {
  std::vector<TrialLogEntry> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      TrialLogEntry e;
      e.participant = j.at("participant").get<std::string>();
      e.method = j.at("method").get<std::string>();
      e.object = j.at("object").get<std::string>();
      e.trial = j.value("trial", 0);
      e.seed = j.value("seed", std::uint64_t{0});
      e.scene_hash = j.value("scene_hash", std::string());
      e.record.search_time_s = j.at("search_time_s").get<double>();
      e.record.guidance_time_s = j.at("guidance_time_s").get<double>();
      e.record.total_time_s = j.value("total_time_s", e.record.search_time_s + e.record.guidance_time_s);
      e.record.undesired_touches = j.value("undesired_touches", 0);
      e.record.success = j.value("success", false);
      e.record.transcript = j.value("transcript", std::string());
      out.push_back(std::move(e));
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorCode::kInvalidInput, fmt::format("trial log line {}: {}", lineno, ex.what()));
    }
  }
  return out;
}

namespace {

bool parse_bool(std::string_view s) {
  const std::string v = detail::lower(detail::trim(s));
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw Error(ErrorCode::kInvalidInput, "bad boolean '" + std::string(s) + "'");
}

}  // namespace

std::vector<TrialLogEntry> read_trial_csv(std::istream& is) {
  std::string line;
  int lineno = 0;
  std::map<std::string, std::size_t> col;
  while (std::getline(is, line)) {
    ++lineno;
    if (!detail::trim(line).empty()) break;
  }
  const auto header = detail::split(line, ',');
  for (std::size_t i = 0; i < header.size(); ++i) col[detail::lower(detail::trim(header[i]))] = i;
  for (const char* required : {"participant", "method", "object"}) {
    if (!col.contains(required)) {
      throw Error(ErrorCode::kInvalidInput, fmt::format("trial csv: missing column '{}'", required));
    }
  }
  const bool has_search = col.contains("search_time_s");
  const bool has_guidance = col.contains("guidance_time_s");
  const bool has_total = col.contains("total_time_s");
  if (!has_total && !(has_search && has_guidance)) {
    throw Error(ErrorCode::kInvalidInput, "trial csv: needs total_time_s or search and guidance times");
  }

  std::vector<TrialLogEntry> out;
  while (std::getline(is, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split(line, ',');
    auto cell = [&](const char* name) -> std::optional<std::string> {
      auto it = col.find(name);
      if (it == col.end()) return std::nullopt;
      if (it->second >= cells.size()) {
        throw Error(ErrorCode::kInvalidInput, fmt::format("trial csv line {}: too few cells", lineno));
      }
      return detail::trim(cells[it->second]);
    };
    auto number = [&](const char* name) -> std::optional<double> {
      auto c = cell(name);
      if (!c) return std::nullopt;
      auto v = detail::parse_double(*c);
      if (!v) {
        throw Error(ErrorCode::kInvalidInput,
                    fmt::format("trial csv line {}: bad number in {}", lineno, name));
      }
      return v;
    };
    TrialLogEntry e;
    e.participant = *cell("participant");
    e.method = *cell("method");
    e.object = *cell("object");
    if (auto t = number("trial")) e.trial = static_cast<int>(*t);
    const auto search = number("search_time_s");
    const auto guidance = number("guidance_time_s");
    const auto total = number("total_time_s");
    if (search && guidance) {
      e.record.search_time_s = *search;
      e.record.guidance_time_s = *guidance;
      e.record.total_time_s = *search + *guidance;
    } else if (search) {
      e.record.search_time_s = *search;
      e.record.guidance_time_s = *total - *search;
      e.record.total_time_s = *total;
    } else if (guidance) {
      e.record.guidance_time_s = *guidance;
      e.record.search_time_s = *total - *guidance;
      e.record.total_time_s = *total;
    } else {
      e.record.total_time_s = *total;
    }
    if (auto u = number("undesired_touches")) e.record.undesired_touches = static_cast<int>(*u);
    try {
      if (auto s = cell("success")) e.record.success = parse_bool(*s);
    } catch (const Error&) {
      throw Error(ErrorCode::kInvalidInput, fmt::format("trial csv line {}: bad success flag", lineno));
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace navisense
