#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "navisense/clients.hpp"
#include "navisense/error.hpp"
#include "navisense/sim.hpp"
#include "stub_server.hpp"
#include "test_support.hpp"

using namespace navisense;
using namespace navisense::clients;

namespace {

ClientConfig config_for(const std::string& url, int retries = 0) {
  ClientConfig cfg;
  cfg.endpoint = url;
  cfg.timeout_s = 2.0;
  cfg.max_retries = retries;
  cfg.retry_backoff_s = 0.0;
  return cfg;
}

std::vector<LatencyEntry> load_fixture() {
  std::ifstream in(std::string(NAVISENSE_FIXTURES) + "/latency_fixture.csv");
  EXPECT_TRUE(in.good());
  return read_latency_csv(in);
}

sim::Scene one_box_scene() {
  sim::Scene s;
  s.bounds = {Vec3(-5, -5, -5), Vec3(5, 5, 5)};
  s.objects.push_back({"cup", "red cup", Vec3(0, 0, 2), Vec3::Constant(0.2)});
  s.target_id = "cup";
  return s;
}

MockDetector scene_detector(const sim::Scene& scene, double miss, std::uint64_t seed,
                            std::shared_ptr<Rng> rng) {
  const perception::CameraIntrinsics intr;
  sim::DetectorNoise noise;
  noise.miss_prob = miss;
  return MockDetector(
      [scene, intr, noise, rng](const FrameSnapshot& f, std::string_view q) {
        return sim::oracle_detect(scene, f.pose, intr, q, noise, *rng);
      },
      0.7, 0.05, seed);
}

}  // namespace

TEST(NearestRank, OneToHundred) {
  std::vector<double> v(100);
  std::iota(v.begin(), v.end(), 1.0);
  std::reverse(v.begin(), v.end());
  EXPECT_EQ(nearest_rank(v, 0.99), 99.0);
  EXPECT_EQ(nearest_rank(v, 0.50), 50.0);
  EXPECT_EQ(nearest_rank(v, 1.0), 100.0);
  EXPECT_EQ(nearest_rank(v, 0.0), 1.0);
}

TEST(NearestRank, MatchesSortingOracle) {
  Rng rng(6);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> v(1 + rng.index(300));
    for (auto& x : v) x = rng.uniform(0.0, 2.0);
    const int pct = static_cast<int>(1 + rng.index(100));
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    // Smallest rank r with 100 r >= pct n, in integers.
    const std::size_t r = (static_cast<std::size_t>(pct) * v.size() + 99) / 100;
    EXPECT_EQ(nearest_rank(v, pct / 100.0), sorted[r - 1]) << pct << " of " << v.size();
  }
}

TEST(LatencyReport, SingleEntry) {
  const auto r = latency_report({{1, 0.0, 0.7, Outcome::kOk}});
  EXPECT_EQ(r.mean_s, 0.7);
  EXPECT_EQ(r.p50_s, 0.7);
  EXPECT_EQ(r.p99_s, 0.7);
  EXPECT_EQ(r.count, 1U);
}

TEST(LatencyReport, EmptyLog) {
  try {
    latency_report(std::vector<LatencyEntry>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyLog);
  }
}

TEST(LatencyReport, Fixture) {
  const auto entries = load_fixture();
  ASSERT_EQ(entries.size(), 100U);
  const auto r = latency_report(entries);
  EXPECT_NEAR(r.mean_s, 0.706, 5e-4);
  EXPECT_NEAR(r.p99_s, 0.797, 5e-4);
  EXPECT_LE(r.p50_s, r.p99_s);
  EXPECT_EQ(r.error_rate, 0.0);
}

TEST(LatencyReport, OrderIndependentAndErrorRate) {
  auto entries = load_fixture();
  const auto a = latency_report(entries);
  Rng rng(1);
  for (std::size_t i = entries.size() - 1; i > 0; --i) std::swap(entries[i], entries[rng.index(i + 1)]);
  entries[3].outcome = Outcome::kTimeout;
  entries[7].outcome = Outcome::kError;
  const auto b = latency_report(entries);
  EXPECT_EQ(a.mean_s, b.mean_s);
  EXPECT_EQ(a.p99_s, b.p99_s);
  EXPECT_DOUBLE_EQ(b.error_rate, 0.02);
}

TEST(LatencyCsv, RoundTrip) {
  std::vector<LatencyEntry> in = {{1, 0.0, 0.5, Outcome::kOk},
                                  {2, 1.25, 0.1 + 0.2, Outcome::kTimeout},
                                  {3, 2.5, 1e-7, Outcome::kError}};
  std::stringstream ss;
  write_latency_csv(ss, in);
  const auto out = read_latency_csv(ss);
  ASSERT_EQ(out.size(), in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    EXPECT_EQ(out[i].call_id, in[i].call_id);
    EXPECT_EQ(out[i].start_s, in[i].start_s);
    EXPECT_EQ(out[i].duration_s, in[i].duration_s);
    EXPECT_EQ(out[i].outcome, in[i].outcome);
  }
}

TEST(LatencyCsv, MalformedLinesRejected) {
  std::istringstream bad("call_id,start_s,duration_s,outcome\n1,0,abc,ok\n");
  EXPECT_THROW(read_latency_csv(bad), Error);
  std::istringstream bad_outcome("1,0,0.5,maybe\n");
  EXPECT_THROW(read_latency_csv(bad_outcome), Error);
}

TEST(LatencyLog, ConcurrentAppendsKeepEveryEntry) {
  LatencyLog log;
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&log] {
      for (int i = 0; i < 500; ++i) log.append(0.0, 0.1, Outcome::kOk);
    });
  }
  for (auto& t : threads) t.join();
  const auto entries = log.entries();
  ASSERT_EQ(entries.size(), 2000U);
  std::vector<std::uint64_t> ids;
  for (const auto& e : entries) ids.push_back(e.call_id);
  std::sort(ids.begin(), ids.end());
  for (std::size_t i = 0; i < ids.size(); ++i) EXPECT_EQ(ids[i], i + 1);
}

TEST(ParseDetectionReply, Grammar) {
  const auto d = parse_detection_reply("12 40 80 120 0.91", "cup");
  ASSERT_TRUE(d);
  EXPECT_EQ(d->bbox, (perception::PixelBox{12, 40, 80, 120}));
  EXPECT_EQ(d->confidence, 0.91);
  EXPECT_EQ(d->label, "cup");
  EXPECT_FALSE(parse_detection_reply("", "cup"));
  EXPECT_FALSE(parse_detection_reply(" none\n", "cup"));
  for (const char* bad : {"1 2 3", "a b c d e", "10 10 5 20 0.5", "1 2 3 4 1.5", "1 2 3 4 5 6"}) {
    try {
      parse_detection_reply(bad, "cup");
      FAIL() << bad;
    } catch (const ClientError& e) {
      EXPECT_EQ(e.kind(), ClientErrorKind::kProtocol) << bad;
    }
  }
}

TEST(MockDetector, PassThroughAndMiss) {
  const auto scene = one_box_scene();
  auto detector = scene_detector(scene, 0.0, 1, std::make_shared<Rng>(1));
  const FrameSnapshot frame{0.0, Pose::identity(), {}};
  const auto d = detector.detect(frame, "red cup");
  ASSERT_TRUE(d);
  EXPECT_EQ(d->label, "red cup");

  auto blind = scene_detector(scene, 1.0, 1, std::make_shared<Rng>(1));
  for (int i = 0; i < 50; ++i) EXPECT_FALSE(blind.detect(frame, "red cup"));
  EXPECT_EQ(blind.log().size(), 50U);
}

TEST(MockDetector, DeterministicGivenSeed) {
  const auto scene = one_box_scene();
  auto run = [&] {
    auto det = scene_detector(scene, 0.4, 9, std::make_shared<Rng>(9));
    std::vector<std::optional<perception::Detection2D>> out;
    std::vector<double> latencies;
    for (int i = 0; i < 100; ++i) {
      out.push_back(det.detect({i * 1.0, Pose::identity(), {}}, "red cup"));
      latencies.push_back(det.last_latency_s());
    }
    return std::pair{out, latencies};
  };
  EXPECT_EQ(run(), run());
}

TEST(MockDetector, LatencyWithinJitter) {
  auto det = scene_detector(one_box_scene(), 0.0, 3, std::make_shared<Rng>(3));
  for (int i = 0; i < 200; ++i) {
    det.detect({0.0, Pose::identity(), {}}, "cup");
    EXPECT_GE(det.last_latency_s(), 0.65);
    EXPECT_LE(det.last_latency_s(), 0.75);
  }
}

TEST(HttpDetector, ParsesStubReply) {
  testkit::StubServer stub(testkit::reply_with("12 40 80 120 0.91"));
  HttpDetector det(config_for(stub.url("/detect")));
  FrameSnapshot frame{0.0, Pose::identity(), {'a', 'b'}};
  const auto d = det.detect(frame, "rotini pasta");
  ASSERT_TRUE(d);
  EXPECT_EQ(d->bbox, (perception::PixelBox{12, 40, 80, 120}));
  EXPECT_EQ(d->confidence, 0.91);
  EXPECT_EQ(stub.last_body(), "ab\nrotini pasta");
  EXPECT_EQ(det.log().size(), 1U);
}

TEST(HttpDetector, MalformedReplyIsProtocolErrorAndLogged) {
  testkit::StubServer stub(testkit::reply_with("twelve forty"));
  HttpDetector det(config_for(stub.url()));
  try {
    det.detect({}, "cup");
    FAIL();
  } catch (const ClientError& e) {
    EXPECT_EQ(e.kind(), ClientErrorKind::kProtocol);
  }
  ASSERT_EQ(det.log().size(), 1U);
  EXPECT_EQ(det.log().entries()[0].outcome, Outcome::kError);
}

TEST(HttpDetector, RetryBound) {
  for (int retries : {0, 1, 3}) {
    testkit::StubServer stub(testkit::reply_with("boom", 500));
    HttpDetector det(config_for(stub.url(), retries));
    for (int call = 0; call < 3; ++call) {
      try {
        det.detect({}, "cup");
        FAIL();
      } catch (const ClientError& e) {
        EXPECT_EQ(e.kind(), ClientErrorKind::kHttpStatus);
      }
    }
    EXPECT_EQ(det.attempts(), static_cast<std::uint64_t>(3 * (1 + retries)));
    EXPECT_EQ(stub.requests(), 3 * (1 + retries));
    // One entry per call, not per attempt.
    EXPECT_EQ(det.log().size(), 3U);
  }
}

TEST(HttpDetector, RecoversWithinRetryBudget) {
  std::atomic<int> calls{0};
  testkit::StubServer stub([&](const httplib::Request&, httplib::Response& res) {
    if (++calls < 3) {
      res.status = 503;
      return;
    }
    res.set_content("none", "text/plain");
  });
  HttpDetector det(config_for(stub.url(), 2));
  EXPECT_FALSE(det.detect({}, "cup"));
  EXPECT_EQ(det.attempts(), 3U);
  ASSERT_EQ(det.log().size(), 1U);
  EXPECT_EQ(det.log().entries()[0].outcome, Outcome::kOk);
}

TEST(HttpDetector, UnreachableEndpointIsTransport) {
  std::string url;
  {
    testkit::StubServer stub(testkit::reply_with(""));
    url = stub.url();
  }
  HttpDetector det(config_for(url));
  try {
    det.detect({}, "cup");
    FAIL();
  } catch (const ClientError& e) {
    EXPECT_NE(e.kind(), ClientErrorKind::kProtocol);
  }
  EXPECT_EQ(det.log().size(), 1U);
}

TEST(ClientConfig, EndpointValidation) {
  EXPECT_THROW(HttpDetector(config_for("ftp://host/x")), ConfigError);
  EXPECT_THROW(HttpDetector(config_for("not a url")), ConfigError);
  auto cfg = config_for("http://127.0.0.1:9/");
  cfg.max_retries = -1;
  EXPECT_THROW(HttpDetector{cfg}, ConfigError);
}
