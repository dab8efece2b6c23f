#include "navisense/geometry.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace navisense {

double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

Pose Pose::from_yaw_pitch(double yaw_deg, double pitch_deg, const Vec3& position) {
  const double yaw = deg_to_rad(yaw_deg);
  const double pitch = deg_to_rad(pitch_deg);
  Mat3 ry;
  ry << std::cos(yaw), 0.0, std::sin(yaw),  //
      0.0, 1.0, 0.0,                        //
      -std::sin(yaw), 0.0, std::cos(yaw);
  // Positive pitch tilts +Z toward -Y (up).
  Mat3 rx;
  rx << 1.0, 0.0, 0.0,                       //
      0.0, std::cos(pitch), -std::sin(pitch),  //
      0.0, std::sin(pitch), std::cos(pitch);
  return {ry * rx, position};
}

Pose Pose::inverse() const {
  Mat3 rt = rotation.transpose();
  return {rt, -(rt * translation)};
}

Pose Pose::operator*(const Pose& other) const {
  return {rotation * other.rotation, rotation * other.translation + translation};
}

bool Pose::is_valid(double tol) const {
  if (!rotation.allFinite() || !translation.allFinite()) return false;
  const Mat3 err = rotation.transpose() * rotation - Mat3::Identity();
  return err.cwiseAbs().maxCoeff() <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
}

double Aabb::distance(const Vec3& p) const {
  const Vec3 below = (min - p).cwiseMax(0.0);
  const Vec3 above = (p - max).cwiseMax(0.0);
  return (below + above).norm();
}

std::optional<double> intersect(const Ray& ray, const Aabb& box) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < 3; ++axis) {
    const double o = ray.origin[axis];
    const double d = ray.direction[axis];
    if (d == 0.0) {
      if (o < box.min[axis] || o > box.max[axis]) return std::nullopt;
      continue;
    }
    double t0 = (box.min[axis] - o) / d;
    double t1 = (box.max[axis] - o) / d;
    if (t0 > t1) std::swap(t0, t1);
    if (t0 > t_near) t_near = t0;
    if (t1 < t_far) t_far = t1;
    if (t_near > t_far) return std::nullopt;
  }
  if (t_near <= 0.0) return std::nullopt;
  return t_near;
}

Mat3 rotation_from_axis_angle(const Vec3& axis, double angle_rad) {
  return Eigen::AngleAxisd(angle_rad, axis.normalized()).toRotationMatrix();
}

}  // namespace navisense
