#include "test_support.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace navisense::testkit {

using namespace session;

Pose random_pose(Rng& rng, double max_translation) {
  const Vec3 axis(rng.normal(), rng.normal(), rng.normal());
  const double angle = rng.uniform(-M_PI, M_PI);
  Pose p;
  p.rotation = rotation_from_axis_angle(axis.normalized(), angle);
  p.translation = Vec3(rng.uniform(-max_translation, max_translation),
                       rng.uniform(-max_translation, max_translation),
                       rng.uniform(-max_translation, max_translation));
  return p;
}

Vec3 random_in_frustum_point(Rng& rng, const Pose& pose, const perception::CameraIntrinsics& intr) {
  const double u = rng.uniform(1e-3, intr.width - 1e-3);
  const double v = rng.uniform(1e-3, intr.height - 1e-3);
  const double z = rng.uniform(0.2, 8.0);
  const Vec3 cam((u - intr.cx) * z / intr.fx, (v - intr.cy) * z / intr.fy, z);
  return pose.rotation * cam + pose.translation;
}

sim::Scene random_box_scene(Rng& rng, int objects) {
  sim::Scene s;
  s.bounds = {Vec3(-10, -10, -10), Vec3(10, 10, 10)};
  for (int i = 0; i < objects; ++i) {
    sim::SceneObject o;
    o.id = "o" + std::to_string(i);
    o.label = "object " + std::to_string(i);
    o.center = Vec3(rng.uniform(-1.5, 1.5), rng.uniform(-1.0, 1.0), rng.uniform(1.0, 4.0));
    o.half_extents = Vec3(rng.uniform(0.05, 0.5), rng.uniform(0.05, 0.5), rng.uniform(0.05, 0.5));
    s.objects.push_back(o);
  }
  if (!s.objects.empty()) s.target_id = s.objects.front().id;
  return s;
}

// ---------------------------------------------------------------------------
// Session reference: organised by event first, state second.

namespace {

bool is(const SessionState& s, int index) { return static_cast<int>(s.index()) == index; }
constexpr int kIdle = 0, kListening = 1, kProcessing = 2, kSpeaking = 3, kScanning = 4, kGuiding = 5;

}  // namespace

StepResult reference_step(const SessionState& s, const SessionEvent& e) {
  StepResult same{s, {}};
  switch (e.index()) {
    case 0:  // SystemReady
      if (is(s, kIdle)) return {Listening{}, {StartListening{}}};
      return same;
    case 1: {  // UtteranceCaptured
      if (!is(s, kListening)) return same;
      return {Processing{}, {CallIntentResolver{std::get<UtteranceCaptured>(e).text}}};
    }
    case 2: {  // IntentResolved
      if (!is(s, kProcessing)) return same;
      const auto& in = std::get<IntentResolved>(e).intent;
      if (const auto* f = std::get_if<intent::FindObject>(&in)) {
        return {Speaking{f->detection_query()}, {Speak{confirmation_text(*f)}}};
      }
      if (const auto* c = std::get_if<intent::Clarify>(&in)) return {Speaking{}, {Speak{c->question}}};
      return {Speaking{}, {Speak{std::get<intent::Chat>(in).reply}}};
    }
    case 3: {  // SpeechDone
      if (!is(s, kSpeaking)) return same;
      const auto& pending = std::get<Speaking>(s).pending_query;
      if (pending) return {Scanning{*pending}, {StartScanLoop{*pending}}};
      return {Listening{}, {}};
    }
    case 4:  // DetectionTick
      if (is(s, kScanning)) return {s, {RequestDetection{std::get<Scanning>(s).query}}};
      if (is(s, kGuiding)) return {s, {RequestDetection{std::get<Guiding>(s).query}}};
      return same;
    case 5: {  // DetectionResult
      const auto& d = std::get<DetectionResult>(e).detection;
      if (!is(s, kScanning) && !is(s, kGuiding)) return same;
      if (!d) return same;
      return {s, {EstablishAnchor{*d}}};
    }
    case 6:  // AnchorEstablished
      if (is(s, kScanning)) return {Guiding{std::get<Scanning>(s).query}, {}};
      return same;
    case 7:  // TargetReached
      if (is(s, kGuiding)) return {Listening{}, {StopAllFeedback{}}};
      return same;
    case 8:  // Shake
      if (is(s, kIdle)) return same;
      return {Listening{}, {StopAllFeedback{}}};
    case 9: {  // ClientError
      if (!is(s, kProcessing) && !is(s, kScanning)) return same;
      const auto kind = std::get<ClientError>(e).kind;
      return {Speaking{}, {LogError{kind}, Speak{error_notice(kind)}}};
    }
    case 10:  // Timeout
      return {Listening{}, {StopAllFeedback{}}};
  }
  return same;
}

SessionEvent random_event(Rng& rng) {
  static const char* kQueries[] = {"rotini pasta", "a2 milk", "party cups"};
  switch (rng.index(11)) {
    case 0: return SystemReady{};
    case 1: return UtteranceCaptured{"find the party cups"};
    case 2:
      switch (rng.index(3)) {
        case 0: return IntentResolved{intent::FindObject{kQueries[rng.index(3)], {}}};
        case 1: return IntentResolved{intent::Clarify{"Which one?"}};
        default: return IntentResolved{intent::Chat{"Hello."}};
      }
    case 3: return SpeechDone{};
    case 4: return DetectionTick{};
    case 5:
      if (rng.bernoulli(0.5)) return DetectionResult{std::nullopt};
      return DetectionResult{perception::Detection2D{{10, 10, 20, 30}, "a2 milk", 0.8}};
    case 6: return AnchorEstablished{};
    case 7: return TargetReached{};
    case 8: return Shake{};
    case 9: return ClientError{static_cast<clients::ClientErrorKind>(rng.index(4))};
    default: return Timeout{};
  }
}

// ---------------------------------------------------------------------------

std::vector<float> brute_force_depth(const sim::Scene& scene, const Pose& pose,
                                     const perception::CameraIntrinsics& intr, float max_range) {
  const auto n = static_cast<std::size_t>(intr.width * intr.height);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  for (const auto& o : scene.objects) {
    const Aabb box = o.box();
    for (int v = 0; v < intr.height; ++v) {
      for (int u = 0; u < intr.width; ++u) {
        const Ray ray = sim::camera_ray(pose, intr, u + 0.5, v + 0.5);
        const auto t = intersect(ray, box);
        auto& b = best[static_cast<std::size_t>(v * intr.width + u)];
        if (t && *t < b) b = *t;
      }
    }
  }
  std::vector<float> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = best[i] <= static_cast<double>(max_range) ? static_cast<float>(best[i])
                                                        : std::numeric_limits<float>::quiet_NaN();
  }
  return out;
}

namespace {

double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm,
               double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson(f, a, b, fa, fm, fb, whole, tol, 50);
}

std::vector<double> ranks_of(std::vector<double> xs) {
  std::vector<double> r(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double less = 0.0;
    double equal = 0.0;
    for (double y : xs) {
      if (y < xs[i]) less += 1.0;
      if (y == xs[i]) equal += 1.0;
    }
    r[i] = less + (equal + 1.0) / 2.0;
  }
  return r;
}

}  // namespace

double t_quadrature_p(double t, double df) {
  const double c = std::exp(std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0)) / std::sqrt(df * M_PI);
  auto density = [&](double x) { return c * std::pow(1.0 + x * x / df, -(df + 1.0) / 2.0); };
  const double a = std::abs(t);
  // Central mass on [0, a], split into unit panels for the adaptive rule.
  double central = 0.0;
  for (double lo = 0.0; lo < a; lo += 1.0) central += integrate(density, lo, std::min(a, lo + 1.0), 1e-14);
  return std::clamp(1.0 - 2.0 * central, 0.0, 1.0);
}

double wilcoxon_enumeration_p(std::span<const double> a, std::span<const double> b) {
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) d.push_back(a[i] - b[i]);
  }
  if (d.empty()) return 1.0;
  std::vector<double> absd;
  for (double x : d) absd.push_back(std::abs(x));
  const auto r = ranks_of(absd);
  double wp = 0.0;
  double wm = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) (d[i] > 0 ? wp : wm) += r[i];
  const double w = std::min(wp, wm);
  const std::uint64_t patterns = 1ULL << d.size();
  std::uint64_t hits = 0;
  for (std::uint64_t mask = 0; mask < patterns; ++mask) {
    double p = 0.0;
    double m = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) ((mask >> i) & 1 ? p : m) += r[i];
    if (std::min(p, m) <= w + 1e-9) ++hits;
  }
  return std::min(1.0, static_cast<double>(hits) / static_cast<double>(patterns));
}

double friedman_enumeration_p(const std::vector<std::vector<double>>& grid) {
  const std::size_t n = grid.size();
  const std::size_t k = grid.front().size();
  std::vector<std::vector<double>> ranks;
  for (const auto& row : grid) ranks.push_back(ranks_of(row));
  auto chi2 = [&](const std::vector<std::vector<double>>& rs) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      double sum = 0.0;
      for (const auto& r : rs) sum += r[j];
      const double dev = sum / static_cast<double>(n) - (static_cast<double>(k) + 1.0) / 2.0;
      s += dev * dev;
    }
    return 12.0 * static_cast<double>(n) / (static_cast<double>(k) * (static_cast<double>(k) + 1.0)) * s;
  };
  const double observed = chi2(ranks);

  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<std::size_t>> perms;
  do perms.push_back(perm);
  while (std::next_permutation(perm.begin(), perm.end()));

  std::uint64_t total = 0;
  std::uint64_t hits = 0;
  std::vector<std::size_t> choice(n, 0);
  std::vector<std::vector<double>> current = ranks;
  for (;;) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < k; ++j) current[i][j] = ranks[i][perms[choice[i]][j]];
    }
    ++total;
    if (chi2(current) >= observed - 1e-9) ++hits;
    std::size_t pos = 0;
    while (pos < n && ++choice[pos] == perms.size()) choice[pos++] = 0;
    if (pos == n) break;
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

double anova_hand_f(const std::vector<std::vector<double>>& g) {
  const double n = static_cast<double>(g.size());
  const double k = static_cast<double>(g.front().size());
  double sum = 0.0;
  double sum_sq = 0.0;
  std::vector<double> row_sums;
  std::vector<double> col_sums(g.front().size(), 0.0);
  for (const auto& row : g) {
    double rs = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      rs += row[j];
      col_sums[j] += row[j];
      sum_sq += row[j] * row[j];
    }
    row_sums.push_back(rs);
    sum += rs;
  }
  // Computational formulas: SS = sum of squared totals / count - correction.
  const double correction = sum * sum / (n * k);
  double rows = 0.0;
  for (double r : row_sums) rows += r * r;
  double cols = 0.0;
  for (double c : col_sums) cols += c * c;
  const double ss_total = sum_sq - correction;
  const double ss_subjects = rows / k - correction;
  const double ss_treatment = cols / n - correction;
  const double ss_error = ss_total - ss_subjects - ss_treatment;
  return (ss_treatment / (k - 1.0)) / (ss_error / ((k - 1.0) * (n - 1.0)));
}

}  // namespace navisense::testkit
