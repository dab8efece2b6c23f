#include "navisense/guidance.hpp"

#include <cmath>

#include <fmt/format.h>

#include "navisense/error.hpp"

namespace navisense::guidance {

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::kLeft: return "Left";
    case Direction::kRight: return "Right";
    case Direction::kUp: return "Up";
    case Direction::kDown: return "Down";
    case Direction::kForward: return "Forward";
    case Direction::kArrived: return "Arrived";
  }
  return "?";
}

std::string_view to_string(Band b) {
  switch (b) {
    case Band::kFar: return "Far";
    case Band::kMid: return "Mid";
    case Band::kNear: return "Near";
    case Band::kArrived: return "Arrived";
  }
  return "?";
}

void GuidanceConfig::validate() const {
  if (!(dir_threshold_deg >= 0.0 && dir_threshold_deg < 90.0)) {
    throw ConfigError("guidance.dir_threshold_deg", "must be in [0, 90)");
  }
  if (!(arrival_m > 0.0)) throw ConfigError("guidance.arrival_m", "must be > 0");
  if (!(near_m > arrival_m)) throw ConfigError("guidance.near_m", "must exceed arrival_m");
  if (!(far_m >= near_m)) throw ConfigError("guidance.far_m", "must be >= near_m");
  if (!(min_gap_s >= 0.0)) throw ConfigError("guidance.min_gap_s", "must be >= 0");
  if (!(rates.far_hz > 0.0 && rates.far_hz < rates.mid_hz && rates.mid_hz < rates.near_hz &&
        rates.near_hz < rates.arrived_hz)) {
    throw ConfigError("guidance.rates", "pulse rates must strictly increase from far to arrived");
  }
  if (!(rates.duty > 0.0 && rates.duty <= 1.0)) {
    throw ConfigError("guidance.rates.duty", "must be in (0, 1]");
  }
}

std::vector<double> HapticSchedule::pulse_onsets(double t0, double duration_s) const {
  std::vector<double> onsets;
  if (!(pulse_rate_hz > 0.0) || !(duration_s > 0.0)) return onsets;
  const double period = period_s();
  for (int k = 0;; ++k) {
    const double t = t0 + k * period;
    if (t >= t0 + duration_s) break;
    onsets.push_back(t);
  }
  return onsets;
}

Band band_for_distance(double distance_m, const GuidanceConfig& cfg) {
  if (distance_m <= cfg.arrival_m) return Band::kArrived;
  if (distance_m < cfg.near_m) return Band::kNear;
  if (distance_m > cfg.far_m) return Band::kFar;
  return Band::kMid;
}

HapticSchedule haptic_schedule(Band band, const GuidanceConfig& cfg) {
  HapticSchedule s;
  s.band = band;
  s.duty = cfg.rates.duty;
  switch (band) {
    case Band::kFar: s.pulse_rate_hz = cfg.rates.far_hz; break;
    case Band::kMid: s.pulse_rate_hz = cfg.rates.mid_hz; break;
    case Band::kNear: s.pulse_rate_hz = cfg.rates.near_hz; break;
    case Band::kArrived: s.pulse_rate_hz = cfg.rates.arrived_hz; break;
  }
  return s;
}

GuidanceCue compute_cue(const Vec3& target_world, const Pose& device_pose,
                        const GuidanceConfig& cfg) {
  const Vec3 v = device_pose.inverse().apply(target_world);
  GuidanceCue cue;
  cue.azimuth_deg = rad_to_deg(std::atan2(v.x(), v.z()));
  cue.elevation_deg = rad_to_deg(std::atan2(-v.y(), v.z()));
  cue.distance_m = v.norm();
  cue.haptics = haptic_schedule(band_for_distance(cue.distance_m, cfg), cfg);

  if (cue.distance_m <= cfg.arrival_m) {
    cue.direction = Direction::kArrived;
    cue.utterance = "Bullseye";
    return cue;
  }
  if (v.z() <= 0.0) {
    cue.direction = cue.azimuth_deg < 0.0 ? Direction::kLeft : Direction::kRight;
    cue.utterance = "turn around";
    return cue;
  }

  const double az = std::abs(cue.azimuth_deg);
  const double el = std::abs(cue.elevation_deg);
  if (az >= el && az > cfg.dir_threshold_deg) {
    cue.direction = cue.azimuth_deg < 0.0 ? Direction::kLeft : Direction::kRight;
  } else if (el > cfg.dir_threshold_deg) {
    cue.direction = cue.elevation_deg > 0.0 ? Direction::kUp : Direction::kDown;
  } else {
    cue.direction = Direction::kForward;
  }
  cue.utterance = fmt::format("{}, {:.1f} meters", to_string(cue.direction), cue.distance_m);
  return cue;
}

std::optional<GuidanceCue> throttle(const std::optional<TimedCue>& prev, const TimedCue& candidate,
                                    double min_gap_s) {
  if (!prev) return candidate.cue;
  if (prev->cue.direction != candidate.cue.direction ||
      prev->cue.haptics.band != candidate.cue.haptics.band) {
    return candidate.cue;
  }
  if (candidate.time_s - prev->time_s >= min_gap_s) return candidate.cue;
  return std::nullopt;
}

std::optional<GuidanceCue> CueThrottle::offer(double time_s, const GuidanceCue& cue) {
  auto out = throttle(last_, TimedCue{time_s, cue}, min_gap_s_);
  if (out) last_ = TimedCue{time_s, *out};
  return out;
}

}  // namespace navisense::guidance
