#include <algorithm>
#include <cmath>

#include "navisense/error.hpp"
#include "navisense/sim.hpp"

namespace navisense::sim {

namespace {

constexpr double kMaxPitchDeg = 80.0;
constexpr double kTimeEps = 1e-9;

double approach(double value, double goal, double max_delta) {
  if (std::abs(goal - value) <= max_delta) return goal;
  return value + (goal > value ? max_delta : -max_delta);
}

}  // namespace

void AgentParams::validate() const {
  auto positive = [](double v, const char* key) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("agent.") + key, "must be > 0");
  };
  positive(turn_rate_deg_s, "turn_rate_deg_s");
  positive(move_speed_m_s, "move_speed_m_s");
  positive(reach_m, "reach_m");
  positive(touch_radius_m, "touch_radius_m");
  positive(sweep_rate_deg_s, "sweep_rate_deg_s");
  if (!(reaction_delay_s >= 0.0)) throw ConfigError("agent.reaction_delay_s", "must be >= 0");
  if (!(sweep_amplitude_deg >= 0.0)) throw ConfigError("agent.sweep_amplitude_deg", "must be >= 0");
  if (!(noise.heading_sd_deg >= 0.0)) throw ConfigError("agent.noise.heading_sd_deg", "must be >= 0");
  if (!(noise.speed_jitter >= 0.0 && noise.speed_jitter < 1.0)) {
    throw ConfigError("agent.noise.speed_jitter", "must be in [0, 1)");
  }
}

Vec3 AgentState::hand_point(double reach_m) const {
  if (!hand_extended) return position;
  return position + reach_m * pose().forward();
}

AgentState make_agent(const Scene& scene, const AgentParams& params) {
  AgentState s;
  const Vec3 f = scene.camera_start.forward();
  s.position = scene.camera_start.translation;
  s.yaw_deg = rad_to_deg(std::atan2(f.x(), f.z()));
  s.pitch_deg = rad_to_deg(std::asin(std::clamp(-f.y(), -1.0, 1.0)));
  s.sweep_center_deg = s.yaw_deg;
  s.inside.assign(scene.objects.size(), false);
  s.target_id = scene.target_id;
  s.rng = Rng(params.seed);
  return s;
}

AgentState agent_step(AgentState s, const std::optional<guidance::GuidanceCue>& cue, double dt_s,
                      const Scene& scene, const AgentParams& params) {
  if (!(dt_s > 0.0)) throw Error(ErrorCode::kInvalidInput, "agent_step needs dt > 0");
  using guidance::Direction;

  if (cue) {
    s.pending.push_back({s.time_s, *cue, s.yaw_deg, s.pitch_deg});
    s.guided = true;
  }
  while (!s.pending.empty() &&
         s.pending.front().received_s + params.reaction_delay_s <= s.time_s + kTimeEps) {
    const PendingCue pc = s.pending.front();
    s.pending.pop_front();
    s.mode = pc.cue.direction;
    switch (pc.cue.direction) {
      case Direction::kLeft:
      case Direction::kRight:
        s.goal_yaw_deg =
            pc.yaw_deg + pc.cue.azimuth_deg + params.noise.heading_sd_deg * s.rng.normal();
        break;
      case Direction::kUp:
      case Direction::kDown:
        s.goal_pitch_deg = std::clamp(
            pc.pitch_deg + pc.cue.elevation_deg + params.noise.heading_sd_deg * s.rng.normal(),
            -kMaxPitchDeg, kMaxPitchDeg);
        break;
      case Direction::kForward:
        s.speed_factor = s.rng.uniform(1.0 - params.noise.speed_jitter, 1.0 + params.noise.speed_jitter);
        break;
      case Direction::kArrived:
        s.hand_extended = true;
        break;
    }
  }

  const double max_turn = params.turn_rate_deg_s * dt_s;
  if (!s.guided) {
    const double lo = s.sweep_center_deg - params.sweep_amplitude_deg;
    const double hi = s.sweep_center_deg + params.sweep_amplitude_deg;
    double yaw = s.yaw_deg + s.sweep_dir * params.sweep_rate_deg_s * dt_s;
    if (yaw > hi) {
      yaw = hi - (yaw - hi);
      s.sweep_dir = -1;
    } else if (yaw < lo) {
      yaw = lo + (lo - yaw);
      s.sweep_dir = 1;
    }
    s.yaw_deg = std::clamp(yaw, lo, hi);
  } else if (s.mode) {
    switch (*s.mode) {
      case Direction::kLeft:
      case Direction::kRight:
        s.yaw_deg = approach(s.yaw_deg, s.goal_yaw_deg, max_turn);
        break;
      case Direction::kUp:
      case Direction::kDown:
        s.pitch_deg = approach(s.pitch_deg, s.goal_pitch_deg, max_turn);
        break;
      case Direction::kForward:
        s.position += params.move_speed_m_s * s.speed_factor * dt_s * s.pose().forward();
        break;
      case Direction::kArrived:
        s.grasped = true;
        break;
    }
  }
  s.time_s += dt_s;

  const Vec3 hand = s.hand_point(params.reach_m);
  if (s.inside.size() != scene.objects.size()) s.inside.assign(scene.objects.size(), false);
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    const auto& o = scene.objects[i];
    if (o.id == s.target_id) continue;
    const bool in = o.box().inflated(params.touch_radius_m).contains(hand);
    if (in && !s.inside[i]) ++s.undesired_touches;
    s.inside[i] = in;
  }
  return s;
}

}  // namespace navisense::sim
