#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "navisense/clients.hpp"
#include "navisense/geometry.hpp"
#include "navisense/guidance.hpp"
#include "navisense/intent.hpp"
#include "navisense/perception.hpp"
#include "navisense/rng.hpp"
#include "navisense/session.hpp"
#include "navisense/trial_record.hpp"

namespace navisense::sim {

// ---------------------------------------------------------------------------
// Scene

struct SceneObject {
  std::string id;
  std::string label;
  Vec3 center = Vec3::Zero();
  Vec3 half_extents = Vec3::Constant(0.05);

  Aabb box() const { return Aabb::from_center(center, half_extents); }
};

struct ObjectSpec {
  std::string id;
  std::string label;
  Vec3 half_extents = Vec3::Constant(0.05);
};

/// Shelf slots: `rows` shelves stacked along -Y (row 0 on top), each split
/// into `slots_per_row` equal bays. Objects stand on the shelf surface with
/// their front faces flush at `front_z_m`.
struct ShelfGrid {
  int rows = 4;
  int slots_per_row = 3;
  double width_m = 0.9;
  double depth_m = 0.35;
  double row_spacing_m = 0.4;
  double top_row_y_m = -0.55;  // surface height of row 0
  double front_z_m = 1.5;

  int slot_count() const { return rows * slots_per_row; }
  /// Center of an object with `half_extents` placed in slot `slot`.
  Vec3 place(int slot, const Vec3& half_extents) const;
  int row_of(int slot) const { return slot / slots_per_row; }
  Aabb bounds() const;
  bool fits(const Vec3& half_extents) const;
  void validate() const;
};

struct Scene {
  std::vector<SceneObject> objects;
  std::string target_id;
  Pose camera_start;
  Aabb bounds;
  std::optional<ShelfGrid> shelf;

  /// Throws ConfigError on duplicate ids, a missing target, or objects
  /// outside the bounds.
  void validate() const;
  const SceneObject* find(std::string_view id) const;
  const SceneObject& target() const;
  std::size_t index_of(std::string_view id) const;
};

/// Places `objects` into the shelf slots in order (object i in slot i).
Scene make_shelf_scene(const ShelfGrid& shelf, const std::vector<ObjectSpec>& objects,
                       std::string target_id, const Pose& camera_start = Pose::identity());

/// Uniformly random assignment of objects to distinct slots. Throws
/// ConfigError without a shelf grid or with more objects than slots.
Scene randomize_positions(const Scene& scene, std::uint64_t seed);

/// 64-bit FNV-1a over a canonical text form of the scene, as 16 hex digits.
std::string scene_hash(const Scene& scene);

// ---------------------------------------------------------------------------
// Rendering and projection

/// Ray through pixel coordinates (u, v) (use +0.5 for pixel centers). The
/// direction has unit camera-frame Z, so hit parameters are camera depths.
Ray camera_ray(const Pose& pose, const perception::CameraIntrinsics& intr, double u, double v);

struct Pixel {
  double u = 0.0;
  double v = 0.0;
};

/// World point to pixel. Nullopt behind the camera or outside the image.
std::optional<Pixel> project(const Vec3& world, const Pose& pose,
                             const perception::CameraIntrinsics& intr);

/// Camera-frame projection without bounds checks; nullopt only for z <= 0.
std::optional<Pixel> project_unbounded(const Vec3& world, const Pose& pose,
                                       const perception::CameraIntrinsics& intr);

perception::DepthFrame render_depth(const Scene& scene, const Pose& pose,
                                    const perception::CameraIntrinsics& intr,
                                    float max_range = 5.0F);

// ---------------------------------------------------------------------------
// Oracle detector

struct DetectorNoise {
  double miss_prob = 0.0;
  double false_positive_prob = 0.0;
  double occlusion_threshold_m = 0.01;
};

/// True when `query` names the object: one token set (lowercase, trailing
/// plural 's' dropped) contains the other.
bool label_matches(std::string_view label, std::string_view query);

/// Best-matching object for a query (largest token overlap, then scene
/// order), or nullptr.
const SceneObject* match_object(const Scene& scene, std::string_view query);

/// Noise-free geometric detection of one object: projected AABB bounds
/// clipped to the image, rejected when nothing is in front of the camera or
/// the box center is occluded. The label is the object's own label.
std::optional<perception::Detection2D> visible_detection(const Scene& scene,
                                                         const SceneObject& object,
                                                         const Pose& pose,
                                                         const perception::CameraIntrinsics& intr,
                                                         double occlusion_threshold_m = 0.01);

/// Oracle detection with noise. Two uniforms are drawn per call (false
/// positive, then miss) regardless of outcome. A false positive returns a
/// visible non-target object, preferring one whose label shares a token
/// with the query; a miss drops a true detection.
std::optional<perception::Detection2D> oracle_detect(const Scene& scene, const Pose& pose,
                                                     const perception::CameraIntrinsics& intr,
                                                     std::string_view query,
                                                     const DetectorNoise& noise, Rng& rng);

// ---------------------------------------------------------------------------
// Scripted participant

struct AgentNoise {
  double heading_sd_deg = 0.0;
  double speed_jitter = 0.0;  // fractional, uniform in [1 - j, 1 + j]
};

struct AgentParams {
  double turn_rate_deg_s = 60.0;
  double move_speed_m_s = 0.25;
  double reach_m = 0.12;
  double touch_radius_m = 0.05;
  double reaction_delay_s = 0.25;
  double sweep_amplitude_deg = 60.0;
  double sweep_rate_deg_s = 30.0;
  AgentNoise noise;
  std::uint64_t seed = 1;

  void validate() const;
};

struct PendingCue {
  double received_s = 0.0;
  guidance::GuidanceCue cue;
  double yaw_deg = 0.0;
  double pitch_deg = 0.0;
};

struct AgentState {
  Vec3 position = Vec3::Zero();
  double yaw_deg = 0.0;
  double pitch_deg = 0.0;
  double time_s = 0.0;

  double sweep_center_deg = 0.0;
  int sweep_dir = 1;
  bool guided = false;

  std::deque<PendingCue> pending;
  std::optional<guidance::Direction> mode;
  double goal_yaw_deg = 0.0;
  double goal_pitch_deg = 0.0;
  double speed_factor = 1.0;

  bool hand_extended = false;
  bool grasped = false;
  int undesired_touches = 0;
  std::vector<bool> inside;  // per scene object, hand within inflated box
  std::string target_id;

  Rng rng{1};

  Pose pose() const { return Pose::from_yaw_pitch(yaw_deg, pitch_deg, position); }
  Vec3 hand_point(double reach_m) const;
};

AgentState make_agent(const Scene& scene, const AgentParams& params);

/// Advances the participant by `dt_s`. A new cue is queued and adopted once
/// `reaction_delay_s` has passed. Left/Right/Up/Down turn toward the cued
/// angle at the turn rate; Forward walks along the view direction; Arrived
/// extends the hand and grasps. Without any cue yet, the yaw sweeps around
/// its starting heading. Hand entries into inflated non-target boxes are
/// counted on first entry.
AgentState agent_step(AgentState state, const std::optional<guidance::GuidanceCue>& cue,
                      double dt_s, const Scene& scene, const AgentParams& params);

// ---------------------------------------------------------------------------
// Trials

enum class Method { kNaviSense, kDescriptionOnly, kOneshotQuery };

std::string_view to_string(Method m);
Method parse_method(std::string_view name);  // throws ConfigError

/// Interaction pattern of a method. Comparison presets answer once with a
/// coarse location and give no guidance loop.
struct MethodPreset {
  Method method = Method::kNaviSense;
  bool guidance_loop = true;
  double response_latency_s = 0.7;
  double belief_sd_x_m = 0.0;
  double belief_sd_y_m = 0.0;
};

MethodPreset preset_for(Method m);

struct SessionConfig {
  double step_s = 0.05;
  double scan_interval_s = 1.0;
  double timeout_s = 120.0;
  double speech_s = 1.0;
  bool anchor_refresh = true;
  perception::AnchorConfig anchor;
  session::ShakeConfig shake;
  std::optional<double> cancel_at_s;

  void validate() const;
};

struct DetectorConfig {
  double latency_s = 0.7;
  double latency_jitter_s = 0.05;
  float max_range = 5.0F;
  DetectorNoise noise;

  void validate() const;
};

struct TrialConfig {
  perception::CameraIntrinsics intrinsics;
  SessionConfig session;
  guidance::GuidanceConfig guidance;
  DetectorConfig detector;
  intent::IntentConfig intent;
  Method method = Method::kNaviSense;
  std::string utterance_prefix = "Find the ";

  void validate() const;
};

struct TrialResult {
  TrialRecord record;
  std::vector<session::TranscriptEntry> transcript;
  std::vector<guidance::TimedCue> cues;
  std::vector<clients::LatencyEntry> latency;
  bool anchor_established = false;
  bool timed_out = false;
};

/// Optional real clients. A null detector means the oracle-backed mock; a
/// null resolver means the rule-based intent resolver.
struct TrialClients {
  clients::Detector* detector = nullptr;
  intent::IntentResolver* resolver = nullptr;
};

/// Runs the whole loop on a virtual clock: session machine, scan
/// scheduler, detector, guidance, and agent, until the target is reached,
/// the timeout fires, or the task is cancelled. Deterministic in `seed`
/// with the default clients. A real detector's wall latency is used as
/// virtual latency.
TrialResult run_trial(const Scene& scene, const AgentParams& agent, const TrialConfig& config,
                      std::uint64_t seed, const TrialClients& clients = {});

/// Transcript entries and cue records interleaved by time, one JSON object
/// per line.
void write_trial_transcript(std::ostream& os, const TrialResult& result);

// ---------------------------------------------------------------------------
// Campaigns

struct CampaignConfig {
  int participants = 1;
  int trials = 3;
  std::vector<std::string> targets;
  std::vector<Method> methods = {Method::kNaviSense};
  double participant_variation = 0.0;
  int jobs = 1;

  void validate(const Scene& scene) const;
};

struct SimConfig {
  Scene scene;
  AgentParams agent;
  TrialConfig trial;
  CampaignConfig campaign;

  void validate() const;
};

struct CampaignTrial {
  TrialLogEntry entry;
  TrialResult result;
};

/// participants x methods x targets x trials, positions randomized per
/// (participant, target, trial) so methods face identical layouts. Real
/// clients force sequential execution.
std::vector<CampaignTrial> run_campaign(const SimConfig& config, std::uint64_t seed,
                                        const TrialClients& clients = {});

/// Participant-specific agent parameters (scaled by the variation setting).
AgentParams participant_agent(const AgentParams& base, double variation, int participant,
                              std::uint64_t seed);

// ---------------------------------------------------------------------------
// Frame sweeps

struct SceneSet {
  std::vector<std::string> categories;  // parallel to scenes
  std::vector<Scene> scenes;
};

struct FrameSweepConfig {
  int samples = 200;
  std::uint64_t seed = 1;
  double present_fraction = 0.6;
  double yaw_jitter_deg = 15.0;
  double pitch_jitter_deg = 8.0;
  double position_jitter_m = 0.15;
  DetectorNoise noise;
  /// When set, exactly this many frames are turned into false positives /
  /// false negatives instead of drawing per-frame noise.
  std::optional<int> fp_count;
  std::optional<int> fn_count;
};

struct SampledFrame {
  std::string category;
  std::string target;                 // query
  std::optional<std::string> truth;   // target label when visible
  std::optional<perception::Detection2D> predicted;
};

/// Throws ConfigError for an empty set or unsatisfiable quotas.
std::vector<SampledFrame> sample_frames(const SceneSet& set,
                                        const perception::CameraIntrinsics& intr,
                                        const FrameSweepConfig& cfg);

}  // namespace navisense::sim
