#include <benchmark/benchmark.h>

#include <vector>

#include "navisense/config.hpp"
#include "navisense/rng.hpp"
#include "navisense/sim.hpp"
#include "navisense/stats.hpp"

using namespace navisense;

namespace {

void BM_RenderDepth(benchmark::State& state) {
  const auto cfg = config::default_sim_config();
  perception::CameraIntrinsics intr = cfg.trial.intrinsics;
  const int scale = static_cast<int>(state.range(0));
  intr.width *= scale;
  intr.height *= scale;
  intr.fx *= scale;
  intr.fy *= scale;
  intr.cx *= scale;
  intr.cy *= scale;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sim::render_depth(cfg.scene, cfg.scene.camera_start, intr));
  }
  state.SetItemsProcessed(state.iterations() * intr.width * intr.height);
}
BENCHMARK(BM_RenderDepth)->Arg(1)->Arg(4);

void BM_WilcoxonExact(benchmark::State& state) {
  Rng rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = rng.normal(10, 2);
    b[i] = rng.normal(11, 2);
  }
  for (auto _ : state) benchmark::DoNotOptimize(stats::wilcoxon_signed_rank(a, b));
}
BENCHMARK(BM_WilcoxonExact)->Arg(6)->Arg(12);

void BM_FriedmanExact(benchmark::State& state) {
  Rng rng(2);
  stats::TrialMatrix m;
  m.methods = {"a", "b", "c"};
  for (int i = 0; i < state.range(0); ++i) {
    m.participants.push_back("P" + std::to_string(i + 1));
    m.values.push_back({rng.normal(10, 2), rng.normal(11, 2), rng.normal(12, 2)});
  }
  for (auto _ : state) benchmark::DoNotOptimize(stats::friedman(m));
}
BENCHMARK(BM_FriedmanExact)->Arg(5)->Arg(12);

void BM_RunTrial(benchmark::State& state) {
  const auto cfg = config::default_sim_config();
  std::uint64_t seed = 1;
  for (auto _ : state) {
    const auto scene = sim::randomize_positions(cfg.scene, seed);
    benchmark::DoNotOptimize(sim::run_trial(scene, cfg.agent, cfg.trial, seed++));
  }
}
BENCHMARK(BM_RunTrial)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
