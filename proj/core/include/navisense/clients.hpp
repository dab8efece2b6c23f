#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <mutex>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "navisense/perception.hpp"
#include "navisense/rng.hpp"

namespace navisense::clients {

enum class ClientErrorKind { kTimeout, kProtocol, kHttpStatus, kTransport };

std::string_view to_string(ClientErrorKind kind);

class ClientError : public std::runtime_error {
 public:
  ClientError(ClientErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ClientErrorKind kind() const noexcept { return kind_; }

 private:
  ClientErrorKind kind_;
};

struct ClientConfig {
  std::string endpoint;
  double timeout_s = 5.0;
  int max_retries = 2;
  std::string auth_env = "NAVISENSE_API_KEY";
  double retry_backoff_s = 0.2;

  void validate() const;
};

enum class Outcome { kOk, kTimeout, kError };

std::string_view to_string(Outcome o);

struct LatencyEntry {
  std::uint64_t call_id = 0;
  double start_s = 0.0;
  double duration_s = 0.0;
  Outcome outcome = Outcome::kOk;
};

/// Append-only call log. Appends are serialized, so one log may be shared by
/// a producer thread and a reader.
class LatencyLog {
 public:
  LatencyLog() = default;
  LatencyLog(const LatencyLog& other);
  LatencyLog& operator=(const LatencyLog& other);

  /// Records a call and returns its id (sequential from 1).
  std::uint64_t append(double start_s, double duration_s, Outcome outcome);
  void append_entry(const LatencyEntry& entry);
  std::vector<LatencyEntry> entries() const;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::vector<LatencyEntry> entries_;
  std::uint64_t next_id_ = 1;
};

struct LatencyReport {
  double mean_s = 0.0;
  double p50_s = 0.0;
  double p99_s = 0.0;
  std::size_t count = 0;
  double error_rate = 0.0;
};

/// Nearest-rank percentile over the sorted durations: the value at 1-based
/// rank ceil(q * n).
double nearest_rank(std::vector<double> values, double q);

/// Throws Error(kEmptyLog) on an empty log.
LatencyReport latency_report(const std::vector<LatencyEntry>& entries);
inline LatencyReport latency_report(const LatencyLog& log) { return latency_report(log.entries()); }

/// CSV with header `call_id,start_s,duration_s,outcome`.
void write_latency_csv(std::ostream& os, const std::vector<LatencyEntry>& entries);
std::vector<LatencyEntry> read_latency_csv(std::istream& is);

/// What a detector sees: the capture time, the device pose, and the encoded
/// frame bytes (opaque to mocks).
struct FrameSnapshot {
  double time_s = 0.0;
  Pose pose;
  std::vector<std::uint8_t> bytes;
};

class Detector {
 public:
  virtual ~Detector() = default;

  /// Throws ClientError once the retry budget is spent.
  virtual std::optional<perception::Detection2D> detect(const FrameSnapshot& frame,
                                                       std::string_view query) = 0;
  /// Latency that the most recent call took, in seconds.
  virtual double last_latency_s() const = 0;
  virtual const LatencyLog& log() const = 0;
};

/// Deterministic detector for simulation. The oracle callback owns the
/// scene and noise; this class adds simulated latency and logging.
class MockDetector final : public Detector {
 public:
  using Oracle = std::function<std::optional<perception::Detection2D>(const FrameSnapshot&,
                                                                      std::string_view)>;

  MockDetector(Oracle oracle, double latency_s, double jitter_s, std::uint64_t seed);

  std::optional<perception::Detection2D> detect(const FrameSnapshot& frame,
                                               std::string_view query) override;
  double last_latency_s() const override { return last_latency_s_; }
  const LatencyLog& log() const override { return log_; }

 private:
  Oracle oracle_;
  double latency_s_;
  double jitter_s_;
  Rng rng_;
  double last_latency_s_ = 0.0;
  LatencyLog log_;
};

/// Reply grammar: `u_min v_min u_max v_max confidence` on one line, or an
/// empty body / `none` for no detection. Throws ClientError(kProtocol).
std::optional<perception::Detection2D> parse_detection_reply(std::string_view body,
                                                             std::string_view label);

/// POSTs `frame bytes + '\n' + query` to the configured endpoint.
class HttpDetector final : public Detector {
 public:
  explicit HttpDetector(ClientConfig config);

  std::optional<perception::Detection2D> detect(const FrameSnapshot& frame,
                                               std::string_view query) override;
  double last_latency_s() const override { return last_latency_s_; }
  const LatencyLog& log() const override { return log_; }
  std::uint64_t attempts() const { return attempts_; }

 private:
  ClientConfig config_;
  double last_latency_s_ = 0.0;
  std::uint64_t attempts_ = 0;
  LatencyLog log_;
};

class LLMClient {
 public:
  virtual ~LLMClient() = default;
  /// Sends a text document, returns the raw reply body.
  virtual std::string complete(const std::string& document) = 0;
  virtual const LatencyLog& log() const = 0;
};

class HttpLLMClient final : public LLMClient {
 public:
  explicit HttpLLMClient(ClientConfig config);

  std::string complete(const std::string& document) override;
  const LatencyLog& log() const override { return log_; }
  std::uint64_t attempts() const { return attempts_; }

 private:
  ClientConfig config_;
  std::uint64_t attempts_ = 0;
  LatencyLog log_;
};

}  // namespace navisense::clients
