#include <gtest/gtest.h>

#include <cmath>

#include "navisense/error.hpp"
#include "navisense/guidance.hpp"
#include "test_support.hpp"

using namespace navisense;
using namespace navisense::guidance;

namespace {

GuidanceCue cue_at(const Vec3& cam) { return compute_cue(cam, Pose::identity(), GuidanceConfig{}); }

}  // namespace

TEST(ComputeCue, StraightAheadFar) {
  const auto c = cue_at(Vec3(0, 0, 2.0));
  EXPECT_EQ(c.direction, Direction::kForward);
  EXPECT_EQ(c.haptics.band, Band::kFar);
  EXPECT_EQ(c.haptics.pulse_rate_hz, 1.0);
  EXPECT_EQ(c.utterance, "Forward, 2.0 meters");
}

TEST(ComputeCue, ArrivedSaysBullseye) {
  const auto c = cue_at(Vec3(0, 0, 0.10));
  EXPECT_EQ(c.direction, Direction::kArrived);
  EXPECT_EQ(c.haptics.band, Band::kArrived);
  EXPECT_EQ(c.utterance, "Bullseye");
}

TEST(ComputeCue, LeftAt45Degrees) {
  const auto c = cue_at(Vec3(-0.5, 0, 0.5));
  EXPECT_NEAR(c.azimuth_deg, -45.0, 1e-12);
  EXPECT_EQ(c.direction, Direction::kLeft);
  EXPECT_EQ(c.utterance, "Left, 0.7 meters");
}

TEST(ComputeCue, OnAxisMid) {
  const auto c = cue_at(Vec3(0, 0, 0.5));
  EXPECT_EQ(c.direction, Direction::kForward);
  EXPECT_EQ(c.haptics.band, Band::kMid);
  EXPECT_EQ(c.azimuth_deg, 0.0);
  EXPECT_EQ(c.elevation_deg, 0.0);
}

TEST(ComputeCue, UpAndDownUseImageYDown) {
  EXPECT_EQ(cue_at(Vec3(0, -0.5, 1.0)).direction, Direction::kUp);
  EXPECT_EQ(cue_at(Vec3(0, 0.5, 1.0)).direction, Direction::kDown);
}

TEST(ComputeCue, AzimuthWinsTies) {
  EXPECT_EQ(cue_at(Vec3(0.5, -0.5, 1.0)).direction, Direction::kRight);
  EXPECT_EQ(cue_at(Vec3(0.3, -0.5, 1.0)).direction, Direction::kUp);
}

TEST(ComputeCue, BehindCameraTurnsAround) {
  const auto c = cue_at(Vec3(0.2, 0, -1.0));
  EXPECT_EQ(c.direction, Direction::kRight);
  EXPECT_EQ(c.utterance, "turn around");
  EXPECT_EQ(cue_at(Vec3(-0.2, 0, -1.0)).direction, Direction::kLeft);
}

TEST(ComputeCue, ArrivalBoundaryInclusive) {
  GuidanceConfig cfg;
  cfg.arrival_m = 0.25;  // exactly representable
  EXPECT_EQ(compute_cue(Vec3(0, 0, 0.25), Pose::identity(), cfg).direction, Direction::kArrived);
  EXPECT_NE(compute_cue(Vec3(0, 0, std::nextafter(0.25, 1.0)), Pose::identity(), cfg).direction,
            Direction::kArrived);
}

TEST(ComputeCue, ArrivalConsistencyRandom) {
  Rng rng(4);
  const GuidanceConfig cfg;
  for (int i = 0; i < 10000; ++i) {
    const Vec3 p(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3));
    const auto c = compute_cue(p, Pose::identity(), cfg);
    EXPECT_EQ(c.direction == Direction::kArrived, c.distance_m <= cfg.arrival_m);
  }
}

TEST(ComputeCue, FrameInvariance) {
  Rng rng(8);
  const GuidanceConfig cfg;
  for (int i = 0; i < 10000; ++i) {
    const Pose pose = testkit::random_pose(rng);
    const Pose g = testkit::random_pose(rng);
    const Vec3 target(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3));
    const auto a = compute_cue(target, pose, cfg);
    const auto b = compute_cue(g.apply(target), g * pose, cfg);
    ASSERT_NEAR(a.azimuth_deg, b.azimuth_deg, 1e-9);
    ASSERT_NEAR(a.elevation_deg, b.elevation_deg, 1e-9);
    ASSERT_NEAR(a.distance_m, b.distance_m, 1e-9);
  }
}

TEST(Bands, DefaultRates) {
  const GuidanceConfig cfg;
  EXPECT_EQ(haptic_schedule(Band::kFar, cfg).pulse_rate_hz, 1.0);
  EXPECT_GT(haptic_schedule(Band::kNear, cfg).pulse_rate_hz,
            haptic_schedule(Band::kMid, cfg).pulse_rate_hz);
  EXPECT_GT(haptic_schedule(Band::kArrived, cfg).pulse_rate_hz,
            haptic_schedule(Band::kNear, cfg).pulse_rate_hz);
  EXPECT_EQ(band_for_distance(1.0, cfg), Band::kMid);
  EXPECT_EQ(band_for_distance(1.0001, cfg), Band::kFar);
  EXPECT_EQ(band_for_distance(0.3, cfg), Band::kMid);
  EXPECT_EQ(band_for_distance(0.2999, cfg), Band::kNear);
}

TEST(Bands, MonotoneSweep) {
  const GuidanceConfig cfg;
  double prev_rate = 0.0;
  Band prev_band = Band::kFar;
  int transitions = 0;
  for (int mm = 3000; mm >= 0; --mm) {
    const double d = mm / 1000.0;
    const auto s = haptic_schedule(band_for_distance(d, cfg), cfg);
    EXPECT_GE(s.pulse_rate_hz, prev_rate);
    if (mm < 3000 && s.band != prev_band) ++transitions;
    prev_rate = s.pulse_rate_hz;
    prev_band = s.band;
  }
  EXPECT_EQ(transitions, 3);
}

TEST(Haptics, PulseTimings) {
  const HapticSchedule s{Band::kMid, 4.0, 0.5};
  EXPECT_DOUBLE_EQ(s.period_s(), 0.25);
  EXPECT_DOUBLE_EQ(s.on_time_s(), 0.125);
  EXPECT_EQ(s.pulse_onsets(1.0, 1.0), (std::vector<double>{1.0, 1.25, 1.5, 1.75}));
}

TEST(Throttle, Rules) {
  const auto fwd = cue_at(Vec3(0, 0, 2.0));
  const auto left = cue_at(Vec3(-2.0, 0, 2.0));
  EXPECT_TRUE(throttle(std::nullopt, {0.0, fwd}, 1.5));
  EXPECT_FALSE(throttle(TimedCue{0.0, fwd}, {0.4, fwd}, 1.5));
  EXPECT_TRUE(throttle(TimedCue{0.0, fwd}, {0.1, left}, 1.5));
  EXPECT_TRUE(throttle(TimedCue{0.0, fwd}, {1.5, fwd}, 1.5));
  const auto mid = cue_at(Vec3(0, 0, 0.5));
  EXPECT_TRUE(throttle(TimedCue{0.0, fwd}, {0.1, mid}, 1.5));
}

TEST(Throttle, MinGapBetweenIdenticalCues) {
  Rng rng(10);
  CueThrottle th(1.5);
  std::optional<TimedCue> last_emitted;
  const std::vector<Vec3> targets = {Vec3(0, 0, 2), Vec3(-2, 0, 2), Vec3(0, 0, 0.5), Vec3(0, 1, 1)};
  double t = 0.0;
  for (int i = 0; i < 5000; ++i) {
    t += rng.uniform(0.0, 0.3);
    const auto cue = cue_at(targets[rng.index(targets.size())]);
    if (auto out = th.offer(t, cue)) {
      if (last_emitted && last_emitted->cue.direction == out->direction &&
          last_emitted->cue.haptics.band == out->haptics.band) {
        EXPECT_GE(t - last_emitted->time_s, 1.5);
      }
      last_emitted = TimedCue{t, *out};
    }
  }
  th.reset();
  EXPECT_TRUE(th.offer(t, cue_at(targets[0])));
}

TEST(GuidanceConfig, Validate) {
  GuidanceConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.near_m = 0.1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.rates.mid_hz = 0.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
}
