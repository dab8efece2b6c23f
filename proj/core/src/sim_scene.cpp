#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "navisense/error.hpp"
#include "navisense/sim.hpp"
#include "text_util.hpp"

namespace navisense::sim {

Vec3 ShelfGrid::place(int slot, const Vec3& half_extents) const {
  const int row = slot / slots_per_row;
  const int col = slot % slots_per_row;
  const double bay = width_m / slots_per_row;
  const double x = -0.5 * width_m + (col + 0.5) * bay;
  const double surface_y = top_row_y_m + row * row_spacing_m;
  return {x, surface_y - half_extents.y(), front_z_m + half_extents.z()};
}

Aabb ShelfGrid::bounds() const {
  return {Vec3(-0.5 * width_m, top_row_y_m - row_spacing_m, front_z_m),
          Vec3(0.5 * width_m, top_row_y_m + (rows - 1) * row_spacing_m, front_z_m + depth_m)};
}

bool ShelfGrid::fits(const Vec3& half_extents) const {
  constexpr double kEps = 1e-12;
  const double bay = width_m / slots_per_row;
  return 2.0 * half_extents.x() <= bay + kEps && 2.0 * half_extents.y() <= row_spacing_m + kEps &&
         2.0 * half_extents.z() <= depth_m + kEps;
}

void ShelfGrid::validate() const {
  if (rows < 1) throw ConfigError("scene.shelf.rows", "must be >= 1");
  if (slots_per_row < 1) throw ConfigError("scene.shelf.slots_per_row", "must be >= 1");
  if (!(width_m > 0.0)) throw ConfigError("scene.shelf.width_m", "must be > 0");
  if (!(depth_m > 0.0)) throw ConfigError("scene.shelf.depth_m", "must be > 0");
  if (!(row_spacing_m > 0.0)) throw ConfigError("scene.shelf.row_spacing_m", "must be > 0");
  if (!(front_z_m > 0.0)) throw ConfigError("scene.shelf.front_z_m", "must be > 0");
}

void Scene::validate() const {
  std::set<std::string> ids;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const auto& o = objects[i];
    const std::string key = fmt::format("scene.objects[{}]", i);
    if (o.id.empty()) throw ConfigError(key + ".id", "must be non-empty");
    if (o.label.empty()) throw ConfigError(key + ".label", "must be non-empty");
    if (!ids.insert(o.id).second) throw ConfigError(key + ".id", "duplicate id '" + o.id + "'");
    if (!(o.half_extents.array() > 0.0).all() || !o.half_extents.allFinite()) {
      throw ConfigError(key + ".half_extents", "must be positive");
    }
    if (!o.center.allFinite()) throw ConfigError(key + ".center", "must be finite");
    if (!bounds.inflated(1e-9).contains(o.box())) {
      throw ConfigError(key, "object '" + o.id + "' lies outside the scene bounds");
    }
    if (shelf && !shelf->fits(o.half_extents)) {
      throw ConfigError(key + ".half_extents", "object '" + o.id + "' does not fit a shelf slot");
    }
  }
  if (!ids.contains(target_id)) {
    throw ConfigError("scene.target_id", "target '" + target_id + "' is not a scene object");
  }
  if (!camera_start.is_valid(1e-9)) throw ConfigError("scene.camera_start", "invalid pose");
  if (shelf) shelf->validate();
}

const SceneObject* Scene::find(std::string_view id) const {
  for (const auto& o : objects) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

const SceneObject& Scene::target() const {
  const SceneObject* t = find(target_id);
  if (t == nullptr) throw ConfigError("scene.target_id", "target '" + target_id + "' not found");
  return *t;
}

std::size_t Scene::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (objects[i].id == id) return i;
  }
  return objects.size();
}

Scene make_shelf_scene(const ShelfGrid& shelf, const std::vector<ObjectSpec>& objects,
                       std::string target_id, const Pose& camera_start) {
  shelf.validate();
  if (static_cast<int>(objects.size()) > shelf.slot_count()) {
    throw ConfigError("scene.objects", fmt::format("{} objects but only {} shelf slots",
                                                   objects.size(), shelf.slot_count()));
  }
  Scene scene;
  scene.shelf = shelf;
  scene.bounds = shelf.bounds();
  scene.camera_start = camera_start;
  scene.target_id = std::move(target_id);
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const auto& spec = objects[i];
    scene.objects.push_back(
        {spec.id, spec.label, shelf.place(static_cast<int>(i), spec.half_extents), spec.half_extents});
  }
  return scene;
}

Scene randomize_positions(const Scene& scene, std::uint64_t seed) {
  if (!scene.shelf) throw ConfigError("scene.shelf", "randomizing positions needs a shelf grid");
  const ShelfGrid& shelf = *scene.shelf;
  const int slots = shelf.slot_count();
  if (static_cast<int>(scene.objects.size()) > slots) {
    throw ConfigError("scene.objects", fmt::format("{} objects but only {} shelf slots",
                                                   scene.objects.size(), slots));
  }
  std::vector<int> order(static_cast<std::size_t>(slots));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.index(i));
    std::swap(order[i - 1], order[j]);
  }
  Scene out = scene;
  for (std::size_t i = 0; i < out.objects.size(); ++i) {
    out.objects[i].center = shelf.place(order[i], out.objects[i].half_extents);
  }
  return out;
}

std::string scene_hash(const Scene& scene) {
  std::ostringstream os;
  auto vec = [&](const Vec3& v) {
    os << detail::format_double(v.x()) << ',' << detail::format_double(v.y()) << ','
       << detail::format_double(v.z());
  };
  for (const auto& o : scene.objects) {
    os << o.id << '|' << o.label << '|';
    vec(o.center);
    os << '|';
    vec(o.half_extents);
    os << '\n';
  }
  os << "target|" << scene.target_id << '\n' << "camera|";
  for (int r = 0; r < 3; ++r) vec(scene.camera_start.rotation.row(r).transpose());
  vec(scene.camera_start.translation);
  os << '\n';

  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : os.str()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace navisense::sim
