#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "navisense/clients.hpp"
#include "navisense/guidance.hpp"
#include "navisense/intent.hpp"
#include "navisense/perception.hpp"

namespace navisense::session {

// ---------------------------------------------------------------------------
// States

struct Idle {
  friend bool operator==(const Idle&, const Idle&) = default;
};
struct Listening {
  friend bool operator==(const Listening&, const Listening&) = default;
};
struct Processing {
  friend bool operator==(const Processing&, const Processing&) = default;
};
/// `pending_query` is set while a confirmed find request waits for the
/// confirmation to finish playing.
struct Speaking {
  std::optional<std::string> pending_query;
  friend bool operator==(const Speaking&, const Speaking&) = default;
};
struct Scanning {
  std::string query;
  friend bool operator==(const Scanning&, const Scanning&) = default;
};
/// The anchor itself lives with the runner; the state names what it tracks.
struct Guiding {
  std::string query;
  friend bool operator==(const Guiding&, const Guiding&) = default;
};

using SessionState = std::variant<Idle, Listening, Processing, Speaking, Scanning, Guiding>;

enum class StateKind { kIdle, kListening, kProcessing, kSpeaking, kScanning, kGuiding };
inline constexpr int kStateKindCount = 6;

StateKind kind_of(const SessionState& s);
std::string_view to_string(StateKind k);

// ---------------------------------------------------------------------------
// Events

struct SystemReady {
  friend bool operator==(const SystemReady&, const SystemReady&) = default;
};
struct UtteranceCaptured {
  std::string text;
  friend bool operator==(const UtteranceCaptured&, const UtteranceCaptured&) = default;
};
struct IntentResolved {
  intent::Intent intent;
  friend bool operator==(const IntentResolved&, const IntentResolved&) = default;
};
struct SpeechDone {
  friend bool operator==(const SpeechDone&, const SpeechDone&) = default;
};
struct DetectionTick {
  friend bool operator==(const DetectionTick&, const DetectionTick&) = default;
};
struct DetectionResult {
  std::optional<perception::Detection2D> detection;
  friend bool operator==(const DetectionResult&, const DetectionResult&) = default;
};
struct AnchorEstablished {
  friend bool operator==(const AnchorEstablished&, const AnchorEstablished&) = default;
};
struct TargetReached {
  friend bool operator==(const TargetReached&, const TargetReached&) = default;
};
struct Shake {
  friend bool operator==(const Shake&, const Shake&) = default;
};
struct ClientError {
  clients::ClientErrorKind kind = clients::ClientErrorKind::kTransport;
  friend bool operator==(const ClientError&, const ClientError&) = default;
};
struct Timeout {
  friend bool operator==(const Timeout&, const Timeout&) = default;
};

using SessionEvent =
    std::variant<SystemReady, UtteranceCaptured, IntentResolved, SpeechDone, DetectionTick,
                 DetectionResult, AnchorEstablished, TargetReached, Shake, ClientError, Timeout>;

// ---------------------------------------------------------------------------
// Actions

struct StartListening {
  friend bool operator==(const StartListening&, const StartListening&) = default;
};
struct CallIntentResolver {
  std::string text;
  friend bool operator==(const CallIntentResolver&, const CallIntentResolver&) = default;
};
struct Speak {
  std::string text;
  friend bool operator==(const Speak&, const Speak&) = default;
};
struct StartScanLoop {
  std::string query;
  friend bool operator==(const StartScanLoop&, const StartScanLoop&) = default;
};
struct RequestDetection {
  std::string query;
  friend bool operator==(const RequestDetection&, const RequestDetection&) = default;
};
struct EstablishAnchor {
  perception::Detection2D detection;
  friend bool operator==(const EstablishAnchor&, const EstablishAnchor&) = default;
};
struct EmitCue {
  guidance::GuidanceCue cue;
  friend bool operator==(const EmitCue&, const EmitCue&) = default;
};
struct StopAllFeedback {
  friend bool operator==(const StopAllFeedback&, const StopAllFeedback&) = default;
};
struct LogError {
  clients::ClientErrorKind kind = clients::ClientErrorKind::kTransport;
  friend bool operator==(const LogError&, const LogError&) = default;
};

using SessionAction = std::variant<StartListening, CallIntentResolver, Speak, StartScanLoop,
                                   RequestDetection, EstablishAnchor, EmitCue, StopAllFeedback,
                                   LogError>;

std::string to_string(const SessionState& s);
std::string to_string(const SessionEvent& e);
std::string to_string(const SessionAction& a);

std::string confirmation_text(const intent::FindObject& find);
std::string error_notice(clients::ClientErrorKind kind);

struct StepResult {
  SessionState state;
  std::vector<SessionAction> actions;
};

/// The transition function. Total: pairs outside the table return the same
/// state and no actions.
///
///   Idle        + SystemReady          -> Listening   [StartListening]
///   Listening   + UtteranceCaptured    -> Processing  [CallIntentResolver]
///   Processing  + IntentResolved(find) -> Speaking*   [Speak(confirmation)]
///   Processing  + IntentResolved(else) -> Speaking    [Speak(reply)]
///   Speaking*   + SpeechDone           -> Scanning    [StartScanLoop]
///   Speaking    + SpeechDone           -> Listening
///   Scanning    + DetectionTick        -> Scanning    [RequestDetection]
///   Scanning    + DetectionResult(d)   -> Scanning    [EstablishAnchor(d)]
///   Scanning    + DetectionResult()    -> Scanning
///   Scanning    + AnchorEstablished    -> Guiding
///   Guiding     + DetectionTick        -> Guiding     [RequestDetection]
///   Guiding     + DetectionResult(d)   -> Guiding     [EstablishAnchor(d)]
///   Guiding     + TargetReached        -> Listening   [StopAllFeedback]
///   not Idle    + Shake                -> Listening   [StopAllFeedback]
///   Processing|Scanning + ClientError  -> Speaking    [LogError, Speak(notice)]
///   any         + Timeout              -> Listening   [StopAllFeedback]
///
/// (* marks a pending find query.)
StepResult step(const SessionState& state, const SessionEvent& event);

struct TimedEvent {
  double time_s = 0.0;
  SessionEvent event;
};

struct TranscriptEntry {
  double time_s = 0.0;
  SessionEvent event;
  SessionState prev_state;
  SessionState next_state;
  std::vector<SessionAction> actions;
};

std::vector<TranscriptEntry> run_session(const SessionState& initial,
                                         std::span<const TimedEvent> events);

/// One JSON object per line:
/// {"t":..,"event":..,"prev_state":..,"next_state":..,"actions":[..]}
std::string transcript_line(const TranscriptEntry& entry);
void write_transcript(std::ostream& os, std::span<const TranscriptEntry> entries);

// ---------------------------------------------------------------------------
// Shake-to-cancel

struct AccelSample {
  double timestamp_s = 0.0;
  Vec3 accel_g = Vec3(0.0, 1.0, 0.0);
};

struct ShakeConfig {
  double window_s = 0.5;
  double peak_g = 2.0;
  int min_peaks = 3;

  void validate() const;
};

/// True iff at least `min_peaks` samples within the trailing `window_s`
/// seconds (measured back from the newest sample) have |a| - 1g > peak_g.
/// Timestamps must strictly increase (Error(kInvalidInput) otherwise).
bool detect_shake(std::span<const AccelSample> window, const ShakeConfig& cfg);

/// Streaming wrapper that keeps only the trailing window of samples.
class ShakeDetector {
 public:
  explicit ShakeDetector(ShakeConfig cfg) : cfg_(cfg) {}

  /// Feeds one sample; returns true on the sample that completes a gesture.
  /// The buffer is cleared after a detection so one shake fires once.
  bool push(const AccelSample& sample);

 private:
  ShakeConfig cfg_;
  std::deque<AccelSample> buffer_;
};

// ---------------------------------------------------------------------------
// Runner

/// Single-consumer event loop around `step`. Producers may `post` from any
/// thread; `drain` folds queued events in arrival order and hands actions to
/// the handler, which may post follow-up events (processed in the same
/// drain). A DetectionTick that arrives while a detection is in flight is
/// dropped.
class SessionRunner {
 public:
  using ActionHandler = std::function<void(double time_s, const SessionAction&)>;

  explicit SessionRunner(ActionHandler handler, SessionState initial = Idle{});

  void post(double time_s, SessionEvent event);
  /// Processes queued events; returns how many were applied.
  std::size_t drain();

  const SessionState& state() const { return state_; }
  const std::vector<TranscriptEntry>& transcript() const { return transcript_; }
  bool detection_in_flight() const { return in_flight_; }
  std::uint64_t dropped_ticks() const { return dropped_ticks_; }

 private:
  ActionHandler handler_;
  SessionState state_;
  std::mutex mu_;
  std::deque<TimedEvent> queue_;
  std::vector<TranscriptEntry> transcript_;
  bool in_flight_ = false;
  std::uint64_t dropped_ticks_ = 0;
};

}  // namespace navisense::session
