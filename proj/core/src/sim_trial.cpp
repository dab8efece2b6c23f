#include <algorithm>
#include <cmath>
#include <map>
#include <queue>

#include <json.hpp>

#include "navisense/error.hpp"
#include "navisense/sim.hpp"

namespace navisense::sim {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::kNaviSense: return "navisense";
    case Method::kDescriptionOnly: return "description-only";
    case Method::kOneshotQuery: return "oneshot-query";
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::kNaviSense, Method::kDescriptionOnly, Method::kOneshotQuery}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("method", "unknown method '" + std::string(name) +
                                  "' (expected navisense, description-only or oneshot-query)");
}

MethodPreset preset_for(Method m) {
  switch (m) {
    case Method::kNaviSense: return {m, true, 0.7, 0.0, 0.0};
    case Method::kDescriptionOnly: return {m, false, 6.0, 0.12, 0.05};
    case Method::kOneshotQuery: return {m, false, 3.0, 0.18, 0.05};
  }
  return {};
}

void SessionConfig::validate() const {
  if (!(step_s > 0.0)) throw ConfigError("session.step_s", "must be > 0");
  if (!(scan_interval_s > 0.0)) throw ConfigError("session.scan_interval_s", "must be > 0");
  if (!(timeout_s > 0.0)) throw ConfigError("session.timeout_s", "must be > 0");
  if (!(speech_s >= 0.0)) throw ConfigError("session.speech_s", "must be >= 0");
  if (!(anchor.ema_alpha > 0.0 && anchor.ema_alpha <= 1.0)) {
    throw ConfigError("session.anchor.ema_alpha", "must be in (0, 1]");
  }
  if (!(anchor.min_confidence >= 0.0 && anchor.min_confidence <= 1.0)) {
    throw ConfigError("session.anchor.min_confidence", "must be in [0, 1]");
  }
  shake.validate();
  if (cancel_at_s && !(*cancel_at_s >= 0.0)) throw ConfigError("session.cancel_at_s", "must be >= 0");
}

void DetectorConfig::validate() const {
  if (!(latency_s >= 0.0)) throw ConfigError("detector.latency_s", "must be >= 0");
  if (!(latency_jitter_s >= 0.0)) throw ConfigError("detector.latency_jitter_s", "must be >= 0");
  if (!(max_range > 0.0F)) throw ConfigError("detector.max_range", "must be > 0");
  auto prob = [](double p, const char* key) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string("detector.") + key, "must be in [0, 1]");
  };
  prob(noise.miss_prob, "miss_prob");
  prob(noise.false_positive_prob, "false_positive_prob");
  if (!(noise.occlusion_threshold_m >= 0.0)) {
    throw ConfigError("detector.occlusion_threshold_m", "must be >= 0");
  }
}

void TrialConfig::validate() const {
  intrinsics.validate();
  session.validate();
  guidance.validate();
  detector.validate();
}

namespace {

using session::SessionAction;
using session::SessionEvent;
using Micros = std::int64_t;

double to_s(Micros us) { return static_cast<double>(us) / 1e6; }
Micros to_us(double s) { return std::llround(s * 1e6); }

struct Scheduled {
  Micros at = 0;
  std::uint64_t seq = 0;
  SessionEvent event;
};

struct Later {
  bool operator()(const Scheduled& a, const Scheduled& b) const {
    return a.at != b.at ? a.at > b.at : a.seq > b.seq;
  }
};

}  // namespace

TrialResult run_trial(const Scene& scene, const AgentParams& agent_params, const TrialConfig& cfg,
                      std::uint64_t seed, const TrialClients& io) {
  clients::Detector* external = io.detector;
  scene.validate();
  agent_params.validate();
  cfg.validate();

  const MethodPreset preset = preset_for(cfg.method);
  const Micros step_us = std::max<Micros>(1, to_us(cfg.session.step_s));
  const Micros timeout_us = to_us(cfg.session.timeout_s);
  const Micros speech_us = to_us(cfg.session.speech_s);
  const double step_s = to_s(step_us);
  const bool refresh = preset.guidance_loop && cfg.session.anchor_refresh;
  const SceneObject& target = scene.target();

  AgentParams ap = agent_params;
  ap.seed = mix_seed(seed, agent_params.seed);
  AgentState agent = make_agent(scene, ap);

  Rng oracle_rng(mix_seed(seed, 0x0dULL));
  Rng belief_rng(mix_seed(seed, 0xbeULL));
  clients::MockDetector mock(
      [&](const clients::FrameSnapshot& frame, std::string_view query) {
        return oracle_detect(scene, frame.pose, cfg.intrinsics, query, cfg.detector.noise,
                             oracle_rng);
      },
      preset.guidance_loop ? cfg.detector.latency_s : preset.response_latency_s,
      cfg.detector.latency_jitter_s, mix_seed(seed, 0x1aULL));
  clients::Detector& detector = external != nullptr ? *external : mock;
  intent::MockIntentResolver mock_resolver(cfg.intent);
  intent::IntentResolver& resolver = io.resolver != nullptr ? *io.resolver : mock_resolver;
  const std::size_t log_start = detector.log().size();

  std::priority_queue<Scheduled, std::vector<Scheduled>, Later> scheduled;
  std::uint64_t seq = 0;
  Micros now_us = 0;
  auto schedule = [&](Micros at, SessionEvent ev) { scheduled.push({at, seq++, std::move(ev)}); };
  auto after_latency = [&](double latency_s) {
    const Micros lat = std::max<Micros>(0, to_us(latency_s));
    const Micros steps = std::max<Micros>(1, (lat + step_us - 1) / step_us);
    return now_us + steps * step_us;
  };

  TrialResult result;
  std::optional<perception::TargetAnchor> anchor;
  std::optional<Micros> anchor_us;
  std::optional<Pose> request_pose;
  perception::ScanScheduler scheduler(cfg.session.scan_interval_s, 0.0);
  bool scan_active = false;
  guidance::CueThrottle throttle(cfg.guidance.min_gap_s);
  guidance::CueThrottle self_throttle(cfg.guidance.min_gap_s);

  auto handle = [&](double t, const SessionAction& action, session::SessionRunner& runner) {
    std::visit(
        [&](const auto& a) {
          using A = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<A, session::CallIntentResolver>) {
            try {
              runner.post(t, session::IntentResolved{intent::resolve_intent(a.text, {}, resolver)});
            } catch (const Error&) {
              runner.post(t, session::IntentResolved{
                                 intent::Chat{"Sorry, I did not catch that. Please repeat."}});
            } catch (const clients::ClientError& e) {
              runner.post(t, session::ClientError{e.kind()});
            }
          } else if constexpr (std::is_same_v<A, session::Speak>) {
            schedule(now_us + speech_us, session::SpeechDone{});
          } else if constexpr (std::is_same_v<A, session::StartScanLoop>) {
            scheduler.restart(t);
            scan_active = true;
          } else if constexpr (std::is_same_v<A, session::RequestDetection>) {
            clients::FrameSnapshot snap{t, agent.pose(), {}};
            if (external != nullptr) {
              snap.bytes = perception::encode_depth_frame(
                  render_depth(scene, snap.pose, cfg.intrinsics, cfg.detector.max_range));
            }
            request_pose = snap.pose;
            try {
              auto det = detector.detect(snap, a.query);
              schedule(after_latency(detector.last_latency_s()), session::DetectionResult{det});
            } catch (const clients::ClientError& e) {
              schedule(after_latency(detector.last_latency_s()), session::ClientError{e.kind()});
            }
          } else if constexpr (std::is_same_v<A, session::EstablishAnchor>) {
            const auto& det = a.detection;
            std::optional<Vec3> point;
            if (det.confidence >= cfg.session.anchor.min_confidence) {
              if (preset.guidance_loop) {
                if (request_pose) {
                  const auto depth =
                      render_depth(scene, *request_pose, cfg.intrinsics, cfg.detector.max_range);
                  point = perception::localize(det, depth, cfg.intrinsics, *request_pose,
                                               cfg.session.anchor.min_confidence);
                }
              } else if (!anchor) {
                // Coarse verbal location: the named object's face, displaced.
                for (const auto& o : scene.objects) {
                  if (o.label != det.label) continue;
                  point = Vec3(o.center.x() + belief_rng.normal(0.0, preset.belief_sd_x_m),
                               o.center.y() + belief_rng.normal(0.0, preset.belief_sd_y_m),
                               o.center.z() - o.half_extents.z());
                  break;
                }
              }
            }
            if (point) {
              anchor = perception::update_anchor(anchor, *point, t, cfg.session.anchor.ema_alpha,
                                                 det.confidence);
              if (!anchor_us) {
                anchor_us = now_us;
                result.anchor_established = true;
                runner.post(t, session::AnchorEstablished{});
              }
            }
          } else if constexpr (std::is_same_v<A, session::StopAllFeedback>) {
            scan_active = false;
            throttle.reset();
          }
        },
        action);
  };

  session::SessionRunner* runner_ptr = nullptr;
  session::SessionRunner runner(
      [&](double t, const SessionAction& a) { handle(t, a, *runner_ptr); });
  runner_ptr = &runner;

  runner.post(0.0, session::SystemReady{});
  runner.post(0.0, session::UtteranceCaptured{cfg.utterance_prefix + target.label});

  Micros relisten_at = -1;
  const std::optional<Micros> cancel_us =
      cfg.session.cancel_at_s ? std::optional<Micros>(to_us(*cfg.session.cancel_at_s)) : std::nullopt;
  bool reached = false;

  for (;;) {
    const double t = to_s(now_us);
    while (!scheduled.empty() && scheduled.top().at <= now_us) {
      runner.post(t, scheduled.top().event);
      scheduled.pop();
    }
    if (cancel_us && now_us >= *cancel_us) {
      runner.post(t, session::Shake{});
      runner.drain();
      break;
    }
    if (now_us >= timeout_us) {
      runner.post(t, session::Timeout{});
      runner.drain();
      result.timed_out = true;
      break;
    }
    runner.drain();

    auto kind = session::kind_of(runner.state());
    // A participant left in Listening (after a chat reply or an error
    // notice) repeats the request.
    if (kind == session::StateKind::kListening) {
      if (relisten_at < 0) relisten_at = now_us + speech_us;
      if (now_us >= relisten_at) {
        relisten_at = -1;
        runner.post(t, session::UtteranceCaptured{cfg.utterance_prefix + target.label});
        runner.drain();
      }
    } else {
      relisten_at = -1;
    }

    kind = session::kind_of(runner.state());
    if (scan_active && (kind == session::StateKind::kScanning ||
                        (kind == session::StateKind::kGuiding && refresh))) {
      if (scheduler.poll(t)) {
        runner.post(t, session::DetectionTick{});
        runner.drain();
      }
    }

    kind = session::kind_of(runner.state());
    std::optional<guidance::GuidanceCue> cue_out;
    if (kind == session::StateKind::kGuiding && anchor) {
      const auto cue = guidance::compute_cue(*anchor, agent.pose(), cfg.guidance);
      if (preset.guidance_loop) {
        cue_out = throttle.offer(t, cue);
        if (cue_out) result.cues.push_back({t, *cue_out});
      } else {
        cue_out = self_throttle.offer(t, cue);
      }
    }

    now_us += step_us;
    agent = agent_step(std::move(agent), cue_out, step_s, scene, ap);
    if (agent.grasped && session::kind_of(runner.state()) == session::StateKind::kGuiding) {
      while (!scheduled.empty() && scheduled.top().at <= now_us) {
        runner.post(to_s(now_us), scheduled.top().event);
        scheduled.pop();
      }
      runner.post(to_s(now_us), session::TargetReached{});
      runner.drain();
      reached = true;
      break;
    }
  }

  const Micros end_us = now_us;
  TrialRecord& rec = result.record;
  if (anchor_us) {
    rec.search_time_s = to_s(*anchor_us);
    rec.guidance_time_s = to_s(end_us - *anchor_us);
  } else {
    rec.search_time_s = to_s(end_us);
    rec.guidance_time_s = 0.0;
  }
  rec.total_time_s = rec.search_time_s + rec.guidance_time_s;
  rec.undesired_touches = agent.undesired_touches;
  rec.success = reached && target.box().distance(agent.hand_point(ap.reach_m)) <= ap.touch_radius_m;
  result.transcript = runner.transcript();
  auto entries = detector.log().entries();
  result.latency.assign(entries.begin() + static_cast<std::ptrdiff_t>(std::min(log_start, entries.size())),
                        entries.end());
  return result;
}

namespace {

nlohmann::ordered_json cue_json(const guidance::TimedCue& tc) {
  nlohmann::ordered_json j;
  j["t"] = tc.time_s;
  nlohmann::ordered_json c;
  c["direction"] = std::string(guidance::to_string(tc.cue.direction));
  c["azimuth_deg"] = tc.cue.azimuth_deg;
  c["elevation_deg"] = tc.cue.elevation_deg;
  c["distance_m"] = tc.cue.distance_m;
  c["band"] = std::string(guidance::to_string(tc.cue.haptics.band));
  c["pulse_rate_hz"] = tc.cue.haptics.pulse_rate_hz;
  c["utterance"] = tc.cue.utterance;
  j["cue"] = std::move(c);
  return j;
}

}  // namespace

void write_trial_transcript(std::ostream& os, const TrialResult& result) {
  std::size_t ci = 0;
  for (const auto& e : result.transcript) {
    while (ci < result.cues.size() && result.cues[ci].time_s < e.time_s) {
      os << cue_json(result.cues[ci++]).dump() << '\n';
    }
    os << session::transcript_line(e) << '\n';
  }
  while (ci < result.cues.size()) os << cue_json(result.cues[ci++]).dump() << '\n';
}

}  // namespace navisense::sim
