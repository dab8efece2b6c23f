#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "navisense/sim.hpp"
#include "text_util.hpp"

namespace navisense::sim {

Ray camera_ray(const Pose& pose, const perception::CameraIntrinsics& intr, double u, double v) {
  const Vec3 dir_cam((u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0);
  return {pose.translation, pose.rotation * dir_cam};
}

std::optional<Pixel> project_unbounded(const Vec3& world, const Pose& pose,
                                       const perception::CameraIntrinsics& intr) {
  const Vec3 p = pose.inverse().apply(world);
  if (p.z() <= 0.0) return std::nullopt;
  return Pixel{intr.fx * p.x() / p.z() + intr.cx, intr.fy * p.y() / p.z() + intr.cy};
}

std::optional<Pixel> project(const Vec3& world, const Pose& pose,
                             const perception::CameraIntrinsics& intr) {
  auto px = project_unbounded(world, pose, intr);
  if (!px) return std::nullopt;
  if (!(px->u >= 0.0 && px->u < intr.width && px->v >= 0.0 && px->v < intr.height)) {
    return std::nullopt;
  }
  return px;
}

namespace {

/// Nearest hit over all objects, +inf when nothing is hit.
double nearest_hit(const Scene& scene, const Ray& ray) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& o : scene.objects) {
    if (auto t = intersect(ray, o.box()); t && *t < best) best = *t;
  }
  return best;
}

}  // namespace

perception::DepthFrame render_depth(const Scene& scene, const Pose& pose,
                                    const perception::CameraIntrinsics& intr, float max_range) {
  perception::DepthFrame frame(intr.width, intr.height, max_range);
  for (int v = 0; v < intr.height; ++v) {
    for (int u = 0; u < intr.width; ++u) {
      const double d = nearest_hit(scene, camera_ray(pose, intr, u + 0.5, v + 0.5));
      if (d <= static_cast<double>(max_range)) frame.set(u, v, static_cast<float>(d));
    }
  }
  return frame;
}

namespace {

std::set<std::string> token_set(std::string_view text) {
  std::set<std::string> out;
  for (std::string w : detail::words(text)) {
    if (w.size() > 3 && w.back() == 's') w.pop_back();
    out.insert(std::move(w));
  }
  return out;
}

std::size_t overlap(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::size_t n = 0;
  for (const auto& x : a) n += b.count(x);
  return n;
}

}  // namespace

bool label_matches(std::string_view label, std::string_view query) {
  const auto l = token_set(label);
  const auto q = token_set(query);
  if (l.empty() || q.empty()) return false;
  return std::includes(l.begin(), l.end(), q.begin(), q.end()) ||
         std::includes(q.begin(), q.end(), l.begin(), l.end());
}

const SceneObject* match_object(const Scene& scene, std::string_view query) {
  const auto q = token_set(query);
  const SceneObject* best = nullptr;
  std::size_t best_overlap = 0;
  for (const auto& o : scene.objects) {
    if (!label_matches(o.label, query)) continue;
    const std::size_t ov = overlap(token_set(o.label), q);
    if (best == nullptr || ov > best_overlap) {
      best = &o;
      best_overlap = ov;
    }
  }
  return best;
}

std::optional<perception::Detection2D> visible_detection(const Scene& scene,
                                                         const SceneObject& object,
                                                         const Pose& pose,
                                                         const perception::CameraIntrinsics& intr,
                                                         double occlusion_threshold_m) {
  const Aabb box = object.box();
  double u_min = std::numeric_limits<double>::infinity();
  double v_min = u_min;
  double u_max = -u_min;
  double v_max = -u_min;
  bool any = false;
  for (int c = 0; c < 8; ++c) {
    const Vec3 corner((c & 1) ? box.max.x() : box.min.x(), (c & 2) ? box.max.y() : box.min.y(),
                      (c & 4) ? box.max.z() : box.min.z());
    auto px = project_unbounded(corner, pose, intr);
    if (!px) continue;
    any = true;
    u_min = std::min(u_min, px->u);
    u_max = std::max(u_max, px->u);
    v_min = std::min(v_min, px->v);
    v_max = std::max(v_max, px->v);
  }
  if (!any) return std::nullopt;

  perception::PixelBox bbox{std::clamp(u_min, 0.0, static_cast<double>(intr.width)),
                            std::clamp(v_min, 0.0, static_cast<double>(intr.height)),
                            std::clamp(u_max, 0.0, static_cast<double>(intr.width)),
                            std::clamp(v_max, 0.0, static_cast<double>(intr.height))};
  if (!(bbox.u_min < bbox.u_max && bbox.v_min < bbox.v_max)) return std::nullopt;

  // Occlusion is judged on the pixel that holds the box center.
  const int cu = std::clamp(static_cast<int>(std::floor(bbox.center_u())), 0, intr.width - 1);
  const int cv = std::clamp(static_cast<int>(std::floor(bbox.center_v())), 0, intr.height - 1);
  const Ray ray = camera_ray(pose, intr, cu + 0.5, cv + 0.5);
  const auto analytic = intersect(ray, box);
  if (!analytic) return std::nullopt;
  if (nearest_hit(scene, ray) < *analytic - occlusion_threshold_m) return std::nullopt;

  return perception::Detection2D{bbox, object.label, 0.9};
}

std::optional<perception::Detection2D> oracle_detect(const Scene& scene, const Pose& pose,
                                                     const perception::CameraIntrinsics& intr,
                                                     std::string_view query,
                                                     const DetectorNoise& noise, Rng& rng) {
  const double u_fp = rng.uniform();
  const double u_miss = rng.uniform();

  const SceneObject* target = match_object(scene, query);
  std::optional<perception::Detection2D> truth;
  if (target != nullptr) {
    truth = visible_detection(scene, *target, pose, intr, noise.occlusion_threshold_m);
  }

  if (u_fp < noise.false_positive_prob) {
    const auto q = token_set(query);
    std::vector<perception::Detection2D> similar;
    std::vector<perception::Detection2D> others;
    for (const auto& o : scene.objects) {
      if (&o == target) continue;
      auto d = visible_detection(scene, o, pose, intr, noise.occlusion_threshold_m);
      if (!d) continue;
      (overlap(token_set(o.label), q) > 0 ? similar : others).push_back(*d);
    }
    const auto& pool = similar.empty() ? others : similar;
    if (!pool.empty()) return pool[static_cast<std::size_t>(rng.index(pool.size()))];
  }
  if (truth && u_miss < noise.miss_prob) return std::nullopt;
  return truth;
}

}  // namespace navisense::sim
