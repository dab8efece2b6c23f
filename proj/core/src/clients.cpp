#include "navisense/clients.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <regex>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "navisense/error.hpp"
#include "text_util.hpp"

namespace navisense::clients {

std::string_view to_string(ClientErrorKind kind) {
  switch (kind) {
    case ClientErrorKind::kTimeout: return "timeout";
    case ClientErrorKind::kProtocol: return "protocol";
    case ClientErrorKind::kHttpStatus: return "http_status";
    case ClientErrorKind::kTransport: return "transport";
  }
  return "unknown";
}

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::kOk: return "ok";
    case Outcome::kTimeout: return "timeout";
    case Outcome::kError: return "error";
  }
  return "error";
}

void ClientConfig::validate() const {
  if (!(timeout_s > 0.0)) throw ConfigError("client.timeout_s", "must be > 0");
  if (max_retries < 0) throw ConfigError("client.max_retries", "must be >= 0");
  if (!(retry_backoff_s >= 0.0)) throw ConfigError("client.retry_backoff_s", "must be >= 0");
}

// ---------------------------------------------------------------------------
// LatencyLog

LatencyLog::LatencyLog(const LatencyLog& other) {
  std::lock_guard lock(other.mu_);
  entries_ = other.entries_;
  next_id_ = other.next_id_;
}

LatencyLog& LatencyLog::operator=(const LatencyLog& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mu_, other.mu_);
  entries_ = other.entries_;
  next_id_ = other.next_id_;
  return *this;
}

std::uint64_t LatencyLog::append(double start_s, double duration_s, Outcome outcome) {
  std::lock_guard lock(mu_);
  const std::uint64_t id = next_id_++;
  entries_.push_back({id, start_s, std::max(0.0, duration_s), outcome});
  return id;
}

void LatencyLog::append_entry(const LatencyEntry& entry) {
  std::lock_guard lock(mu_);
  entries_.push_back(entry);
  next_id_ = std::max(next_id_, entry.call_id + 1);
}

std::vector<LatencyEntry> LatencyLog::entries() const {
  std::lock_guard lock(mu_);
  return entries_;
}

std::size_t LatencyLog::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

double nearest_rank(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::kEmptyLog, "percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  // The epsilon keeps q * n from landing one rank high on representation error.
  auto rank = static_cast<std::size_t>(std::ceil(q * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

LatencyReport latency_report(const std::vector<LatencyEntry>& entries) {
  if (entries.empty()) throw Error(ErrorCode::kEmptyLog, "latency report: empty log");
  std::vector<double> durations;
  durations.reserve(entries.size());
  std::size_t failures = 0;
  for (const auto& e : entries) {
    durations.push_back(e.duration_s);
    if (e.outcome != Outcome::kOk) ++failures;
  }
  // Summing sorted values makes the mean independent of log order.
  std::sort(durations.begin(), durations.end());
  double sum = 0.0;
  for (double d : durations) sum += d;

  LatencyReport r;
  r.count = entries.size();
  r.mean_s = sum / static_cast<double>(r.count);
  r.p50_s = nearest_rank(durations, 0.50);
  r.p99_s = nearest_rank(durations, 0.99);
  r.error_rate = static_cast<double>(failures) / static_cast<double>(r.count);
  return r;
}

void write_latency_csv(std::ostream& os, const std::vector<LatencyEntry>& entries) {
  os << "call_id,start_s,duration_s,outcome\n";
  for (const auto& e : entries) {
    os << e.call_id << ',' << detail::format_double(e.start_s) << ','
       << detail::format_double(e.duration_s) << ',' << to_string(e.outcome) << '\n';
  }
}

std::vector<LatencyEntry> read_latency_csv(std::istream& is) {
  std::vector<LatencyEntry> out;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string trimmed = detail::trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      if (trimmed.rfind("call_id", 0) == 0) continue;
    }
    const auto fields = detail::split(trimmed, ',');
    auto fail = [&](const std::string& why) {
      throw Error(ErrorCode::kInvalidInput,
                  "latency log line " + std::to_string(line_no) + ": " + why);
    };
    if (fields.size() != 4) fail("expected 4 fields");
    LatencyEntry e;
    const auto id = detail::parse_double(fields[0]);
    const auto start = detail::parse_double(fields[1]);
    const auto dur = detail::parse_double(fields[2]);
    if (!id || *id < 0 || !start || !dur) fail("bad number");
    if (*dur < 0.0) fail("negative duration");
    e.call_id = static_cast<std::uint64_t>(*id);
    e.start_s = *start;
    e.duration_s = *dur;
    const std::string outcome = detail::lower(detail::trim(fields[3]));
    if (outcome == "ok") {
      e.outcome = Outcome::kOk;
    } else if (outcome == "timeout") {
      e.outcome = Outcome::kTimeout;
    } else if (outcome == "error") {
      e.outcome = Outcome::kError;
    } else {
      fail("unknown outcome '" + outcome + "'");
    }
    out.push_back(e);
  }
  return out;
}

// ---------------------------------------------------------------------------
// MockDetector

MockDetector::MockDetector(Oracle oracle, double latency_s, double jitter_s, std::uint64_t seed)
    : oracle_(std::move(oracle)), latency_s_(latency_s), jitter_s_(jitter_s), rng_(seed) {}

std::optional<perception::Detection2D> MockDetector::detect(const FrameSnapshot& frame,
                                                           std::string_view query) {
  if (query.empty()) throw Error(ErrorCode::kInvalidInput, "detect: empty query");
  const double jitter = rng_.uniform(-jitter_s_, jitter_s_);
  last_latency_s_ = std::max(0.0, latency_s_ + jitter);
  auto result = oracle_(frame, query);
  log_.append(frame.time_s, last_latency_s_, Outcome::kOk);
  return result;
}

// ---------------------------------------------------------------------------
// HTTP

std::optional<perception::Detection2D> parse_detection_reply(std::string_view body,
                                                             std::string_view label) {
  const std::string text = detail::trim(body);
  if (text.empty() || detail::lower(text) == "none") return std::nullopt;
  std::istringstream is(text);
  std::vector<double> nums;
  std::string tok;
  while (is >> tok) {
    const auto v = detail::parse_double(tok);
    if (!v || !std::isfinite(*v)) {
      throw ClientError(ClientErrorKind::kProtocol, "detection reply: bad number '" + tok + "'");
    }
    nums.push_back(*v);
  }
  if (nums.size() != 5) {
    throw ClientError(ClientErrorKind::kProtocol, "detection reply: expected 5 numbers");
  }
  perception::Detection2D d;
  d.bbox = {nums[0], nums[1], nums[2], nums[3]};
  d.confidence = nums[4];
  d.label = std::string(label);
  if (!(d.bbox.u_min < d.bbox.u_max && d.bbox.v_min < d.bbox.v_max && d.bbox.u_min >= 0.0 &&
        d.bbox.v_min >= 0.0)) {
    throw ClientError(ClientErrorKind::kProtocol, "detection reply: degenerate box");
  }
  if (!(d.confidence >= 0.0 && d.confidence <= 1.0)) {
    throw ClientError(ClientErrorKind::kProtocol, "detection reply: confidence outside [0, 1]");
  }
  return d;
}

namespace {

double wall_now() {
  static const auto epoch = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - epoch).count();
}

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint parse_endpoint(const std::string& url) {
  static const std::regex re(R"(^(http)://([^/:]+)(:\d+)?(/.*)?$)", std::regex::icase);
  std::smatch m;
  if (!std::regex_match(url, m, re)) {
    throw ConfigError("client.endpoint", "expected http://host[:port]/path, got '" + url + "'");
  }
  Endpoint ep;
  ep.origin = m[1].str() + "://" + m[2].str() + m[3].str();
  ep.path = m[4].matched ? m[4].str() : "/";
  return ep;
}

struct PostReply {
  std::string body;
  double start_s = 0.0;
  double duration_s = 0.0;
};

/// POST with retries. A failed call is logged here; a successful one is
/// logged by the caller once the reply has been parsed.
PostReply post_with_retry(const ClientConfig& cfg, const std::string& body,
                          const std::string& content_type, LatencyLog& log,
                          std::uint64_t& attempts) {
  cfg.validate();
  const Endpoint ep = parse_endpoint(cfg.endpoint);
  httplib::Headers headers;
  if (const char* token = std::getenv(cfg.auth_env.c_str()); token != nullptr && *token != '\0') {
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }
  const auto timeout = std::chrono::duration<double>(cfg.timeout_s);
  const auto timeout_us = std::chrono::duration_cast<std::chrono::microseconds>(timeout);

  const double start = wall_now();
  ClientError last(ClientErrorKind::kTransport, "no attempt made");
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    if (attempt > 0 && cfg.retry_backoff_s > 0.0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(cfg.retry_backoff_s));
    }
    ++attempts;
    httplib::Client client(ep.origin);
    client.set_connection_timeout(timeout_us);
    client.set_read_timeout(timeout_us);
    client.set_write_timeout(timeout_us);
    const double attempt_start = wall_now();
    auto res = client.Post(ep.path, headers, body, content_type);
    if (!res) {
      const auto err = res.error();
      const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                             (err == httplib::Error::Read &&
                              wall_now() - attempt_start >= 0.9 * cfg.timeout_s);
      last = ClientError(timed_out ? ClientErrorKind::kTimeout : ClientErrorKind::kTransport,
                         "POST " + cfg.endpoint + ": " + httplib::to_string(err));
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      last = ClientError(ClientErrorKind::kHttpStatus,
                         "POST " + cfg.endpoint + ": HTTP " + std::to_string(res->status));
      continue;
    }
    return {res->body, start, wall_now() - start};
  }
  log.append(start, wall_now() - start,
             last.kind() == ClientErrorKind::kTimeout ? Outcome::kTimeout : Outcome::kError);
  throw last;
}

}  // namespace

HttpDetector::HttpDetector(ClientConfig config) : config_(std::move(config)) {
  config_.validate();
  parse_endpoint(config_.endpoint);
}

std::optional<perception::Detection2D> HttpDetector::detect(const FrameSnapshot& frame,
                                                           std::string_view query) {
  if (query.empty()) throw Error(ErrorCode::kInvalidInput, "detect: empty query");
  std::string body(frame.bytes.begin(), frame.bytes.end());
  body.push_back('\n');
  body.append(query);
  const PostReply reply =
      post_with_retry(config_, body, "application/octet-stream", log_, attempts_);
  last_latency_s_ = reply.duration_s;
  try {
    auto detection = parse_detection_reply(reply.body, query);
    log_.append(reply.start_s, reply.duration_s, Outcome::kOk);
    return detection;
  } catch (const ClientError&) {
    log_.append(reply.start_s, reply.duration_s, Outcome::kError);
    throw;
  }
}

HttpLLMClient::HttpLLMClient(ClientConfig config) : config_(std::move(config)) {
  config_.validate();
  parse_endpoint(config_.endpoint);
}

std::string HttpLLMClient::complete(const std::string& document) {
  PostReply reply = post_with_retry(config_, document, "text/plain", log_, attempts_);
  log_.append(reply.start_s, reply.duration_s, Outcome::kOk);
  return std::move(reply.body);
}

}  // namespace navisense::clients
