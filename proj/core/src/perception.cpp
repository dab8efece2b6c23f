#include "navisense/perception.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "navisense/error.hpp"

namespace navisense::perception {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw ConfigError("camera.fx/fy", "focal lengths must be > 0");
  if (width <= 0 || height <= 0) throw ConfigError("camera.width/height", "image size must be > 0");
  if (!(cx >= 0.0 && cx < width)) throw ConfigError("camera.cx", "principal point outside image");
  if (!(cy >= 0.0 && cy < height)) throw ConfigError("camera.cy", "principal point outside image");
}

DepthFrame::DepthFrame(int w, int h, float range)
    : width(w),
      height(h),
      max_range(range),
      depth(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), range),
      valid(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0) {}

void DepthFrame::set(int u, int v, float d) {
  depth[index(u, v)] = d;
  valid[index(u, v)] = 1;
}

void DepthFrame::set_invalid(int u, int v) {
  depth[index(u, v)] = max_range;
  valid[index(u, v)] = 0;
}

namespace {

void put_u32(std::ostream& os, std::uint32_t x) {
  const char bytes[4] = {static_cast<char>(x & 0xFF), static_cast<char>((x >> 8) & 0xFF),
                         static_cast<char>((x >> 16) & 0xFF), static_cast<char>((x >> 24) & 0xFF)};
  os.write(bytes, 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) {
    throw Error(ErrorCode::kInvalidInput, "depth frame: truncated input");
  }
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_depth_frame(std::ostream& os, const DepthFrame& frame) {
  put_u32(os, static_cast<std::uint32_t>(frame.width));
  put_u32(os, static_cast<std::uint32_t>(frame.height));
  put_u32(os, std::bit_cast<std::uint32_t>(frame.max_range));
  for (float d : frame.depth) put_u32(os, std::bit_cast<std::uint32_t>(d));
  os.write(reinterpret_cast<const char*>(frame.valid.data()),
           static_cast<std::streamsize>(frame.valid.size()));
}

DepthFrame read_depth_frame(std::istream& is) {
  const std::uint32_t w = get_u32(is);
  const std::uint32_t h = get_u32(is);
  const float range = std::bit_cast<float>(get_u32(is));
  if (w == 0 || h == 0 || w > 1U << 14 || h > 1U << 14) {
    throw Error(ErrorCode::kInvalidInput, "depth frame: implausible dimensions");
  }
  DepthFrame frame(static_cast<int>(w), static_cast<int>(h), range);
  for (auto& d : frame.depth) d = std::bit_cast<float>(get_u32(is));
  if (!is.read(reinterpret_cast<char*>(frame.valid.data()),
               static_cast<std::streamsize>(frame.valid.size()))) {
    throw Error(ErrorCode::kInvalidInput, "depth frame: truncated validity mask");
  }
  return frame;
}

std::vector<std::uint8_t> encode_depth_frame(const DepthFrame& frame) {
  std::ostringstream os(std::ios::binary);
  write_depth_frame(os, frame);
  const std::string s = os.str();
  return {s.begin(), s.end()};
}

Vec3 unproject(double u, double v, double depth_m, const CameraIntrinsics& intr) {
  if (!std::isfinite(depth_m) || depth_m <= 0.0) {
    throw Error(ErrorCode::kInvalidDepth, "unproject: depth must be positive");
  }
  if (!(u >= 0.0 && u < intr.width && v >= 0.0 && v < intr.height)) {
    throw Error(ErrorCode::kInvalidInput, "unproject: pixel outside image");
  }
  return {(u - intr.cx) * depth_m / intr.fx, (v - intr.cy) * depth_m / intr.fy, depth_m};
}

Vec3 to_world(const Vec3& point_cam, const Pose& pose) { return pose.apply(point_cam); }

double bbox_depth(const DepthFrame& depth, const PixelBox& bbox) {
  if (!(bbox.u_min >= 0.0 && bbox.v_min >= 0.0 && bbox.u_min < bbox.u_max &&
        bbox.v_min < bbox.v_max && bbox.u_max <= depth.width && bbox.v_max <= depth.height)) {
    throw Error(ErrorCode::kInvalidInput, "bbox_depth: box outside frame");
  }
  const double su0 = bbox.u_min + 0.25 * bbox.width();
  const double su1 = bbox.u_max - 0.25 * bbox.width();
  const double sv0 = bbox.v_min + 0.25 * bbox.height();
  const double sv1 = bbox.v_max - 0.25 * bbox.height();

  auto pixel_range = [](double lo, double hi, double center, int size) {
    int first = static_cast<int>(std::ceil(lo - 0.5));
    int last = static_cast<int>(std::floor(hi - 0.5));
    first = std::max(first, 0);
    last = std::min(last, size - 1);
    if (first > last) {
      first = last = std::clamp(static_cast<int>(std::floor(center)), 0, size - 1);
    }
    return std::pair{first, last};
  };
  const auto [u0, u1] = pixel_range(su0, su1, bbox.center_u(), depth.width);
  const auto [v0, v1] = pixel_range(sv0, sv1, bbox.center_v(), depth.height);

  std::vector<float> values;
  values.reserve(static_cast<std::size_t>((u1 - u0 + 1) * (v1 - v0 + 1)));
  for (int v = v0; v <= v1; ++v) {
    for (int u = u0; u <= u1; ++u) {
      if (depth.is_valid(u, v)) values.push_back(depth.at(u, v));
    }
  }
  if (values.empty()) throw Error(ErrorCode::kNoDepth, "bbox_depth: no valid depth in box");
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>((values.size() - 1) / 2);
  std::nth_element(values.begin(), mid, values.end());
  return static_cast<double>(*mid);
}

TargetAnchor update_anchor(const std::optional<TargetAnchor>& anchor, const Vec3& new_point,
                           double now, double alpha, double confidence) {
  if (!new_point.allFinite()) throw Error(ErrorCode::kInvalidPoint, "update_anchor: non-finite point");
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::kInvalidInput, "update_anchor: alpha must be in (0, 1]");
  }
  TargetAnchor next;
  next.ema_alpha = alpha;
  next.last_update = now;
  if (!anchor) {
    next.position = new_point;
    next.confidence = confidence;
    return next;
  }
  next.position = alpha * new_point + (1.0 - alpha) * anchor->position;
  next.confidence = alpha * confidence + (1.0 - alpha) * anchor->confidence;
  return next;
}

std::optional<Vec3> localize(const Detection2D& detection, const DepthFrame& depth,
                             const CameraIntrinsics& intr, const Pose& pose,
                             double min_confidence) {
  if (detection.confidence < min_confidence) return std::nullopt;
  double d = 0.0;
  try {
    d = bbox_depth(depth, detection.bbox);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kNoDepth || e.code() == ErrorCode::kInvalidInput) return std::nullopt;
    throw;
  }
  const Vec3 cam = unproject(detection.bbox.center_u(), detection.bbox.center_v(), d, intr);
  return to_world(cam, pose);
}

ScanScheduler::ScanScheduler(double interval_s, double start_s)
    : interval_s_(interval_s), start_s_(start_s) {
  if (!(interval_s > 0.0)) throw Error(ErrorCode::kInvalidInput, "scan interval must be > 0");
}

std::optional<double> ScanScheduler::poll(double now) {
  constexpr double kEps = 1e-9;
  if (now + kEps < slot_time(next_k_)) return std::nullopt;
  std::uint64_t k = next_k_;
  while (slot_time(k + 1) <= now + kEps) {
    ++k;
    ++dropped_;
  }
  next_k_ = k + 1;
  return slot_time(k);
}

void ScanScheduler::restart(double start_s) {
  start_s_ = start_s;
  next_k_ = 1;
}

std::vector<double> virtual_ticks(double horizon_s, double interval_s) {
  if (!(interval_s > 0.0)) throw Error(ErrorCode::kInvalidInput, "scan interval must be > 0");
  std::vector<double> ticks;
  if (!(horizon_s > 0.0)) return ticks;
  // The epsilon keeps decimal inputs such as 0.3 / 0.1 from losing a tick.
  const auto count = static_cast<std::uint64_t>(std::floor(horizon_s / interval_s + 1e-9));
  ticks.reserve(count);
  for (std::uint64_t k = 1; k <= count; ++k) ticks.push_back(static_cast<double>(k) * interval_s);
  return ticks;
}

}  // namespace navisense::perception
