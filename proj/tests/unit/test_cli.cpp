#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "navisense/cli.hpp"
#include "navisense/trial_record.hpp"

namespace fs = std::filesystem;
using navisense::cli::run_cli;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result cli(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("navisense_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, RunWritesNineRecords) {
  const auto r = cli({"--out", path("run"), "--seed", "4", "run", "--trials", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(path("run") + "/trials.jsonl");
  const auto records = navisense::read_trial_log(in);
  EXPECT_EQ(records.size(), 9U);
  for (const char* f : {"latency.csv", "summary.txt", "summary.csv"}) {
    EXPECT_TRUE(fs::exists(path("run") + "/" + f)) << f;
  }
  EXPECT_TRUE(fs::is_directory(path("run") + "/transcripts"));
  EXPECT_NE(r.out.find("Total Time (s)"), std::string::npos);
}

TEST_F(CliTest, ZeroTrialsIsConfigError) {
  const auto r = cli({"--out", path("zero"), "run", "--trials", "0"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("campaign.trials"), std::string::npos);
}

TEST_F(CliTest, BadConfigKeyNamed) {
  {
    std::ofstream cfg(path("bad.yaml"));
    cfg << "agent:\n  turn_rate_deg_s: -1\n";
  }
  const auto r = cli({"--config", path("bad.yaml"), "--out", path("x"), "run"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("agent.turn_rate_deg_s"), std::string::npos);
}

TEST_F(CliTest, RunIsByteIdenticalAcrossRepeats) {
  const std::vector<std::string> common = {"run", "--trials", "2", "--participants", "2", "--method",
                                           "navisense,description-only", "--miss-prob", "0.2"};
  std::vector<std::string> a = {"--seed", "11", "--out", path("a")};
  a.insert(a.end(), common.begin(), common.end());
  std::vector<std::string> b = {"--seed", "11", "--out", path("b")};
  b.insert(b.end(), common.begin(), common.end());
  b.insert(b.end(), {"--jobs", "3"});
  ASSERT_EQ(cli(a).code, 0);
  ASSERT_EQ(cli(b).code, 0);
  EXPECT_EQ(slurp(path("a") + "/trials.jsonl"), slurp(path("b") + "/trials.jsonl"));
  EXPECT_EQ(slurp(path("a") + "/summary.csv"), slurp(path("b") + "/summary.csv"));
}

TEST_F(CliTest, EvalFramesQuotas) {
  const auto r = cli({"--seed", "7", "eval-frames", "--samples", "200", "--fp-count", "2", "--fn-count", "8"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("accuracy: 0.950 (190/200)"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("95% Wilson CI: [0.910, 0.973]"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("false positives: 2"), std::string::npos);
  EXPECT_NE(r.out.find("false negatives: 8"), std::string::npos);
  EXPECT_EQ(cli({"--seed", "7", "eval-frames", "--samples", "200", "--fp-count", "2", "--fn-count", "8"}).out, r.out);
}

TEST_F(CliTest, EvalFramesNoiseOff) {
  const auto r = cli({"--seed", "3", "eval-frames"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("accuracy: 1.000 (200/200)"), std::string::npos) << r.out;
}

TEST_F(CliTest, EvalFramesUnreadableSceneSet) {
  EXPECT_EQ(cli({"eval-frames", "--scenes", path("missing.yaml")}).code, 2);
}

TEST_F(CliTest, StatsThreeMethods) {
  ASSERT_EQ(cli({"--out", path("s"), "run", "--trials", "1", "--participants", "3", "--method",
                 "navisense,description-only,oneshot-query"})
                .code,
            0);
  const auto r = cli({"stats", path("s") + "/trials.jsonl", "--metric", "total_time"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("0.0167"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("Friedman"), std::string::npos);
}

TEST_F(CliTest, StatsSingleMethodNotice) {
  ASSERT_EQ(cli({"--out", path("one"), "run", "--trials", "1"}).code, 0);
  const auto r = cli({"stats", path("one") + "/trials.jsonl"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out.find("Friedman"), std::string::npos);
}

TEST_F(CliTest, StatsIncompleteGridNamesCells) {
  {
    std::ofstream csv(path("grid.csv"));
    csv << "participant,method,object,total_time_s\n"
           "P1,a,x,10\nP1,b,x,12\nP2,a,x,11\n";
  }
  const auto r = cli({"stats", path("grid.csv"), "--tests", "anova"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("P2"), std::string::npos) << r.err;
}

TEST_F(CliTest, LatencyFixture) {
  const auto r = cli({"latency", std::string(NAVISENSE_FIXTURES) + "/latency_fixture.csv"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("mean: 0.706 s"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("p99: 0.797 s"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("calls: 100"), std::string::npos);
}

TEST_F(CliTest, LatencySingleEntryAndEmpty) {
  {
    std::ofstream one(path("one.csv"));
    one << "call_id,start_s,duration_s,outcome\n1,0,0.7,ok\n";
    std::ofstream empty(path("empty.csv"));
    empty << "call_id,start_s,duration_s,outcome\n";
  }
  const auto r = cli({"latency", path("one.csv")});
  EXPECT_NE(r.out.find("mean: 0.700 s\np50: 0.700 s\np99: 0.700 s"), std::string::npos) << r.out;
  EXPECT_EQ(cli({"latency", path("empty.csv")}).code, 2);
  EXPECT_EQ(cli({"latency", path("nope.csv")}).code, 2);
}

TEST_F(CliTest, MalformedTrialLog) {
  {
    std::ofstream bad(path("bad.jsonl"));
    bad << "{\"participant\": \"P1\"\n";
  }
  EXPECT_EQ(cli({"stats", path("bad.jsonl")}).code, 2);
}

TEST_F(CliTest, GenConfig) {
  const auto r = cli({"gen-config"});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("scan_interval_s: 1"), std::string::npos);
  EXPECT_NE(cli({"gen-config", "--scenes"}).out.find("kitchen"), std::string::npos);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"fly"}).code, 2);
  const auto help = cli({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("Defaults"), std::string::npos);
}
