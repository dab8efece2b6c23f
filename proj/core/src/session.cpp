#include "navisense/session.hpp"

#include <cmath>

#include <json.hpp>

#include "navisense/error.hpp"

namespace navisense::session {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

StepResult stay(const SessionState& s) { return {s, {}}; }

}  // namespace

StateKind kind_of(const SessionState& s) { return static_cast<StateKind>(s.index()); }

std::string_view to_string(StateKind k) {
  switch (k) {
    case StateKind::kIdle: return "Idle";
    case StateKind::kListening: return "Listening";
    case StateKind::kProcessing: return "Processing";
    case StateKind::kSpeaking: return "Speaking";
    case StateKind::kScanning: return "Scanning";
    case StateKind::kGuiding: return "Guiding";
  }
  return "?";
}

std::string to_string(const SessionState& s) {
  return std::visit(
      Overloaded{
          [](const Idle&) -> std::string { return "Idle"; },
          [](const Listening&) -> std::string { return "Listening"; },
          [](const Processing&) -> std::string { return "Processing"; },
          [](const Speaking& sp) -> std::string {
            return sp.pending_query ? "Speaking(pending: " + *sp.pending_query + ")" : "Speaking";
          },
          [](const Scanning& sc) -> std::string { return "Scanning(" + sc.query + ")"; },
          [](const Guiding& g) -> std::string { return "Guiding(" + g.query + ")"; },
      },
      s);
}

std::string to_string(const SessionEvent& e) {
  return std::visit(
      Overloaded{
          [](const SystemReady&) -> std::string { return "SystemReady"; },
          [](const UtteranceCaptured& u) -> std::string {
            return "UtteranceCaptured(" + u.text + ")";
          },
          [](const IntentResolved& i) -> std::string {
            return "IntentResolved(" + intent::to_string(i.intent) + ")";
          },
          [](const SpeechDone&) -> std::string { return "SpeechDone"; },
          [](const DetectionTick&) -> std::string { return "DetectionTick"; },
          [](const DetectionResult& d) -> std::string {
            return d.detection ? "DetectionResult(" + d.detection->label + ")"
                               : "DetectionResult(none)";
          },
          [](const AnchorEstablished&) -> std::string { return "AnchorEstablished"; },
          [](const TargetReached&) -> std::string { return "TargetReached"; },
          [](const Shake&) -> std::string { return "Shake"; },
          [](const ClientError& c) -> std::string {
            return "ClientError(" + std::string(clients::to_string(c.kind)) + ")";
          },
          [](const Timeout&) -> std::string { return "Timeout"; },
      },
      e);
}

std::string to_string(const SessionAction& a) {
  return std::visit(
      Overloaded{
          [](const StartListening&) -> std::string { return "StartListening"; },
          [](const CallIntentResolver& c) -> std::string {
            return "CallIntentResolver(" + c.text + ")";
          },
          [](const Speak& s) -> std::string { return "Speak(" + s.text + ")"; },
          [](const StartScanLoop& s) -> std::string { return "StartScanLoop(" + s.query + ")"; },
          [](const RequestDetection& r) -> std::string {
            return "RequestDetection(" + r.query + ")";
          },
          [](const EstablishAnchor& e) -> std::string {
            return "EstablishAnchor(" + e.detection.label + ")";
          },
          [](const EmitCue& e) -> std::string { return "EmitCue(" + e.cue.utterance + ")"; },
          [](const StopAllFeedback&) -> std::string { return "StopAllFeedback"; },
          [](const LogError& l) -> std::string {
            return "LogError(" + std::string(clients::to_string(l.kind)) + ")";
          },
      },
      a);
}

std::string confirmation_text(const intent::FindObject& find) {
  return "Okay, looking for " + find.detection_query() + ".";
}

std::string error_notice(clients::ClientErrorKind kind) {
  switch (kind) {
    case clients::ClientErrorKind::kTimeout:
      return "Sorry, the service is taking too long. Please try again.";
    default:
      return "Sorry, something went wrong. Please try again.";
  }
}

StepResult step(const SessionState& state, const SessionEvent& event) {
  const StateKind kind = kind_of(state);

  // Transitions valid from (almost) every state come first.
  if (std::holds_alternative<Timeout>(event)) return {Listening{}, {StopAllFeedback{}}};
  if (std::holds_alternative<Shake>(event)) {
    if (kind == StateKind::kIdle) return stay(state);
    return {Listening{}, {StopAllFeedback{}}};
  }
  if (const auto* err = std::get_if<ClientError>(&event)) {
    if (kind == StateKind::kProcessing || kind == StateKind::kScanning) {
      return {Speaking{}, {LogError{err->kind}, Speak{error_notice(err->kind)}}};
    }
    return stay(state);
  }

  switch (kind) {
    case StateKind::kIdle:
      if (std::holds_alternative<SystemReady>(event)) return {Listening{}, {StartListening{}}};
      break;

    case StateKind::kListening:
      if (const auto* u = std::get_if<UtteranceCaptured>(&event)) {
        return {Processing{}, {CallIntentResolver{u->text}}};
      }
      break;

    case StateKind::kProcessing:
      if (const auto* r = std::get_if<IntentResolved>(&event)) {
        if (const auto* find = std::get_if<intent::FindObject>(&r->intent)) {
          return {Speaking{find->detection_query()}, {Speak{confirmation_text(*find)}}};
        }
        if (const auto* c = std::get_if<intent::Clarify>(&r->intent)) {
          return {Speaking{}, {Speak{c->question}}};
        }
        return {Speaking{}, {Speak{std::get<intent::Chat>(r->intent).reply}}};
      }
      break;

    case StateKind::kSpeaking:
      if (std::holds_alternative<SpeechDone>(event)) {
        const auto& sp = std::get<Speaking>(state);
        if (sp.pending_query) return {Scanning{*sp.pending_query}, {StartScanLoop{*sp.pending_query}}};
        return {Listening{}, {}};
      }
      break;

    case StateKind::kScanning: {
      const auto& sc = std::get<Scanning>(state);
      if (std::holds_alternative<DetectionTick>(event)) return {sc, {RequestDetection{sc.query}}};
      if (const auto* d = std::get_if<DetectionResult>(&event)) {
        if (d->detection) return {sc, {EstablishAnchor{*d->detection}}};
        return stay(state);
      }
      if (std::holds_alternative<AnchorEstablished>(event)) return {Guiding{sc.query}, {}};
      break;
    }

    case StateKind::kGuiding: {
      const auto& g = std::get<Guiding>(state);
      if (std::holds_alternative<DetectionTick>(event)) return {g, {RequestDetection{g.query}}};
      if (const auto* d = std::get_if<DetectionResult>(&event)) {
        if (d->detection) return {g, {EstablishAnchor{*d->detection}}};
        return stay(state);
      }
      if (std::holds_alternative<TargetReached>(event)) return {Listening{}, {StopAllFeedback{}}};
      break;
    }
  }
  return stay(state);
}

std::vector<TranscriptEntry> run_session(const SessionState& initial,
                                         std::span<const TimedEvent> events) {
  std::vector<TranscriptEntry> transcript;
  transcript.reserve(events.size());
  SessionState state = initial;
  for (const auto& te : events) {
    StepResult r = step(state, te.event);
    transcript.push_back({te.time_s, te.event, state, r.state, std::move(r.actions)});
    state = std::move(r.state);
  }
  return transcript;
}

std::string transcript_line(const TranscriptEntry& entry) {
  nlohmann::ordered_json j;
  j["t"] = entry.time_s;
  j["event"] = to_string(entry.event);
  j["prev_state"] = to_string(entry.prev_state);
  j["next_state"] = to_string(entry.next_state);
  auto actions = nlohmann::ordered_json::array();
  for (const auto& a : entry.actions) actions.push_back(to_string(a));
  j["actions"] = std::move(actions);
  return j.dump();
}

void write_transcript(std::ostream& os, std::span<const TranscriptEntry> entries) {
  for (const auto& e : entries) os << transcript_line(e) << '\n';
}

// ---------------------------------------------------------------------------

void ShakeConfig::validate() const {
  if (!(window_s > 0.0)) throw ConfigError("session.shake.window_s", "must be > 0");
  if (!(peak_g > 0.0)) throw ConfigError("session.shake.peak_g", "must be > 0");
  if (min_peaks < 1) throw ConfigError("session.shake.min_peaks", "must be >= 1");
}

bool detect_shake(std::span<const AccelSample> window, const ShakeConfig& cfg) {
  if (window.empty()) return false;
  for (std::size_t i = 1; i < window.size(); ++i) {
    if (!(window[i].timestamp_s > window[i - 1].timestamp_s)) {
      throw Error(ErrorCode::kInvalidInput, "detect_shake: timestamps must strictly increase");
    }
  }
  const double newest = window.back().timestamp_s;
  int peaks = 0;
  for (const auto& s : window) {
    if (newest - s.timestamp_s > cfg.window_s) continue;
    if (s.accel_g.norm() - 1.0 > cfg.peak_g) ++peaks;
  }
  return peaks >= cfg.min_peaks;
}

bool ShakeDetector::push(const AccelSample& sample) {
  if (!buffer_.empty() && !(sample.timestamp_s > buffer_.back().timestamp_s)) {
    throw Error(ErrorCode::kInvalidInput, "ShakeDetector: timestamps must strictly increase");
  }
  buffer_.push_back(sample);
  while (sample.timestamp_s - buffer_.front().timestamp_s > cfg_.window_s) buffer_.pop_front();
  const std::vector<AccelSample> window(buffer_.begin(), buffer_.end());
  if (detect_shake(window, cfg_)) {
    buffer_.clear();
    return true;
  }
  return false;
}

// ---------------------------------------------------------------------------

SessionRunner::SessionRunner(ActionHandler handler, SessionState initial)
    : handler_(std::move(handler)), state_(std::move(initial)) {}

void SessionRunner::post(double time_s, SessionEvent event) {
  std::lock_guard lock(mu_);
  queue_.push_back({time_s, std::move(event)});
}

std::size_t SessionRunner::drain() {
  std::size_t applied = 0;
  for (;;) {
    TimedEvent te;
    {
      std::lock_guard lock(mu_);
      if (queue_.empty()) break;
      te = std::move(queue_.front());
      queue_.pop_front();
    }
    if (std::holds_alternative<DetectionTick>(te.event) && in_flight_) {
      ++dropped_ticks_;
      continue;
    }
    if (std::holds_alternative<DetectionResult>(te.event) ||
        std::holds_alternative<ClientError>(te.event)) {
      in_flight_ = false;
    }
    StepResult r = step(state_, te.event);
    for (const auto& a : r.actions) {
      if (std::holds_alternative<RequestDetection>(a)) in_flight_ = true;
      if (std::holds_alternative<StopAllFeedback>(a)) in_flight_ = false;
    }
    transcript_.push_back({te.time_s, te.event, state_, r.state, r.actions});
    state_ = std::move(r.state);
    ++applied;
    // Handlers run after the state update so that follow-up events they
    // post see the new state.
    for (const auto& a : transcript_.back().actions) handler_(te.time_s, a);
  }
  return applied;
}

}  // namespace navisense::session
