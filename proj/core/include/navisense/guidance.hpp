#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "navisense/geometry.hpp"
#include "navisense/perception.hpp"

namespace navisense::guidance {

enum class Direction { kLeft, kRight, kUp, kDown, kForward, kArrived };
enum class Band { kFar, kMid, kNear, kArrived };

std::string_view to_string(Direction d);
std::string_view to_string(Band b);

struct HapticRates {
  double far_hz = 1.0;
  double mid_hz = 3.0;
  double near_hz = 8.0;
  double arrived_hz = 12.0;
  double duty = 0.5;
};

struct GuidanceConfig {
  double dir_threshold_deg = 10.0;
  double arrival_m = 0.15;
  double near_m = 0.3;
  double far_m = 1.0;
  double min_gap_s = 1.5;
  HapticRates rates;

  void validate() const;
};

/// A band with its pulse pattern. Pulses start at t0, t0 + 1/rate, ... and
/// each stays on for duty / rate seconds.
struct HapticSchedule {
  Band band = Band::kFar;
  double pulse_rate_hz = 0.0;
  double duty = 0.5;

  double period_s() const { return 1.0 / pulse_rate_hz; }
  double on_time_s() const { return duty / pulse_rate_hz; }
  std::vector<double> pulse_onsets(double t0, double duration_s) const;

  friend bool operator==(const HapticSchedule&, const HapticSchedule&) = default;
};

struct GuidanceCue {
  Direction direction = Direction::kForward;
  double azimuth_deg = 0.0;
  double elevation_deg = 0.0;
  double distance_m = 0.0;
  HapticSchedule haptics;
  std::string utterance;

  friend bool operator==(const GuidanceCue&, const GuidanceCue&) = default;
};

Band band_for_distance(double distance_m, const GuidanceConfig& cfg);
HapticSchedule haptic_schedule(Band band, const GuidanceConfig& cfg);

GuidanceCue compute_cue(const Vec3& target_world, const Pose& device_pose,
                        const GuidanceConfig& cfg);
inline GuidanceCue compute_cue(const perception::TargetAnchor& anchor, const Pose& device_pose,
                               const GuidanceConfig& cfg) {
  return compute_cue(anchor.position, device_pose, cfg);
}

struct TimedCue {
  double time_s = 0.0;
  GuidanceCue cue;
};

/// Rate limiter: the candidate passes when there is no previous cue, when
/// direction or band changed, or when `min_gap_s` has elapsed.
std::optional<GuidanceCue> throttle(const std::optional<TimedCue>& prev, const TimedCue& candidate,
                                    double min_gap_s);

/// Stateful wrapper around `throttle` remembering the last emitted cue.
class CueThrottle {
 public:
  explicit CueThrottle(double min_gap_s) : min_gap_s_(min_gap_s) {}

  std::optional<GuidanceCue> offer(double time_s, const GuidanceCue& cue);
  void reset() { last_.reset(); }

 private:
  double min_gap_s_;
  std::optional<TimedCue> last_;
};

}  // namespace navisense::guidance
