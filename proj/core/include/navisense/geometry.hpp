#pragma once

#include <optional>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace navisense {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Rigid camera-to-world transform. Camera frame: +X right, +Y down, +Z
/// forward. The world frame uses the same handedness with +Y pointing down.
struct Pose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return {}; }

  /// Yaw about world +Y (positive turns right), then pitch about the camera
  /// +X axis (positive looks up). Angles in degrees.
  static Pose from_yaw_pitch(double yaw_deg, double pitch_deg, const Vec3& position);

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Pose inverse() const;

  /// this ∘ other: apply `other` first.
  Pose operator*(const Pose& other) const;

  Vec3 forward() const { return rotation.col(2); }

  /// Orthonormal with det +1 within `tol`.
  bool is_valid(double tol = 1e-9) const;
};

struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  static Aabb from_center(const Vec3& center, const Vec3& half_extents) {
    return {center - half_extents, center + half_extents};
  }

  Vec3 center() const { return 0.5 * (min + max); }
  Aabb inflated(double r) const { return {min.array() - r, max.array() + r}; }
  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  bool contains(const Aabb& other) const { return contains(other.min) && contains(other.max); }
  bool overlaps(const Aabb& other) const {
    return (min.array() < other.max.array()).all() && (other.min.array() < max.array()).all();
  }
  /// Euclidean distance from `p` to the box; zero inside.
  double distance(const Vec3& p) const;
};

struct Ray {
  Vec3 origin;
  Vec3 direction;  // not necessarily unit length
};

/// Slab test. Returns the ray parameter of the entry point when the ray
/// enters the box at a strictly positive parameter; rays starting inside the
/// box, or missing it, return nullopt.
std::optional<double> intersect(const Ray& ray, const Aabb& box);

/// Random rotation matrix helper for tests and samplers: axis-angle to matrix.
Mat3 rotation_from_axis_angle(const Vec3& axis, double angle_rad);

double deg_to_rad(double deg);
double rad_to_deg(double rad);

}  // namespace navisense
