#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "navisense/geometry.hpp"

namespace navisense::perception {

struct CameraIntrinsics {
  double fx = 100.0;
  double fy = 100.0;
  double cx = 80.0;
  double cy = 60.0;
  int width = 160;
  int height = 120;

  /// Throws ConfigError when fx/fy are non-positive or the principal point
  /// lies outside the image.
  void validate() const;
};

struct PixelBox {
  double u_min = 0.0;
  double v_min = 0.0;
  double u_max = 0.0;
  double v_max = 0.0;

  double center_u() const { return 0.5 * (u_min + u_max); }
  double center_v() const { return 0.5 * (v_min + v_max); }
  double width() const { return u_max - u_min; }
  double height() const { return v_max - v_min; }

  friend bool operator==(const PixelBox&, const PixelBox&) = default;
};

struct Detection2D {
  PixelBox bbox;
  std::string label;
  double confidence = 1.0;

  friend bool operator==(const Detection2D&, const Detection2D&) = default;
};

/// Row-major depth image. Pixels with `valid == 0` carry `max_range`.
struct DepthFrame {
  int width = 0;
  int height = 0;
  float max_range = 5.0F;
  std::vector<float> depth;
  std::vector<std::uint8_t> valid;

  DepthFrame() = default;
  DepthFrame(int w, int h, float range);

  std::size_t index(int u, int v) const {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(u);
  }
  bool is_valid(int u, int v) const { return valid[index(u, v)] != 0; }
  float at(int u, int v) const { return depth[index(u, v)]; }
  void set(int u, int v, float d);
  void set_invalid(int u, int v);
};

/// Binary layout, little-endian: u32 width, u32 height, f32 max_range,
/// width*height f32 depths, width*height u8 validity flags.
void write_depth_frame(std::ostream& os, const DepthFrame& frame);
DepthFrame read_depth_frame(std::istream& is);
std::vector<std::uint8_t> encode_depth_frame(const DepthFrame& frame);

struct TargetAnchor {
  Vec3 position = Vec3::Zero();
  double last_update = 0.0;
  double confidence = 0.0;
  double ema_alpha = 0.5;
};

/// Pinhole back-projection of pixel (u, v) at range `depth_m` along +Z.
/// Throws Error(kInvalidDepth) for non-positive or non-finite depth.
Vec3 unproject(double u, double v, double depth_m, const CameraIntrinsics& intr);

Vec3 to_world(const Vec3& point_cam, const Pose& pose);

/// Low median of the valid depths inside the central 50% x 50% of `bbox`.
/// Pixels are sampled at their centers; if no pixel center falls in the
/// sub-box the pixel containing the box center is used. Throws
/// Error(kNoDepth) when no valid depth is found.
double bbox_depth(const DepthFrame& depth, const PixelBox& bbox);

/// Exponential moving average of the anchor position. Throws
/// Error(kInvalidPoint) on a non-finite point and Error(kInvalidInput) when
/// alpha is outside (0, 1].
TargetAnchor update_anchor(const std::optional<TargetAnchor>& anchor, const Vec3& new_point,
                           double now, double alpha, double confidence = 1.0);

struct AnchorConfig {
  double ema_alpha = 0.5;
  double min_confidence = 0.3;
};

/// Full localization of a detection: center pixel + robust box depth,
/// back-projected and moved to the world frame. Returns nullopt when the
/// detection is below the confidence floor or the box has no depth.
std::optional<Vec3> localize(const Detection2D& detection, const DepthFrame& depth,
                             const CameraIntrinsics& intr, const Pose& pose,
                             double min_confidence);

/// Fixed-cadence detection ticks. Ticks fall at start + k * interval. When
/// polled late, every overdue slot except the newest is dropped.
class ScanScheduler {
 public:
  explicit ScanScheduler(double interval_s, double start_s = 0.0);

  /// Returns the slot time of a due tick, if any, and advances past every
  /// slot at or before `now`.
  std::optional<double> poll(double now);

  void restart(double start_s);
  double interval() const { return interval_s_; }
  std::uint64_t dropped() const { return dropped_; }

 private:
  double slot_time(std::uint64_t k) const {
    return start_s_ + static_cast<double>(k) * interval_s_;
  }

  double interval_s_;
  double start_s_;
  std::uint64_t next_k_ = 1;
  std::uint64_t dropped_ = 0;
};

/// Tick times on a virtual clock over (0, horizon]: k * interval for
/// k = 1 .. floor(horizon / interval).
std::vector<double> virtual_ticks(double horizon_s, double interval_s);

}  // namespace navisense::perception
