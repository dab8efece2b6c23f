#include <algorithm>
#include <atomic>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "navisense/error.hpp"
#include "navisense/sim.hpp"

namespace navisense::sim {

void CampaignConfig::validate(const Scene& scene) const {
  if (participants < 1) throw ConfigError("campaign.participants", "must be >= 1");
  if (trials < 1) throw ConfigError("campaign.trials", "must be >= 1");
  if (methods.empty()) throw ConfigError("campaign.methods", "must not be empty");
  if (jobs < 1) throw ConfigError("campaign.jobs", "must be >= 1");
  if (!(participant_variation >= 0.0 && participant_variation < 1.0)) {
    throw ConfigError("campaign.participant_variation", "must be in [0, 1)");
  }
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (scene.find(targets[i]) == nullptr) {
      throw ConfigError(fmt::format("campaign.targets[{}]", i),
                        "'" + targets[i] + "' is not a scene object");
    }
  }
}

void SimConfig::validate() const {
  scene.validate();
  agent.validate();
  trial.validate();
  campaign.validate(scene);
}

AgentParams participant_agent(const AgentParams& base, double variation, int participant,
                              std::uint64_t seed) {
  AgentParams p = base;
  p.seed = mix_seed(seed, 0x5000ULL + static_cast<std::uint64_t>(participant));
  if (variation <= 0.0) return p;
  Rng rng(p.seed);
  p.turn_rate_deg_s *= 1.0 + rng.uniform(-variation, variation);
  p.move_speed_m_s *= 1.0 + rng.uniform(-variation, variation);
  p.reaction_delay_s *= 1.0 + rng.uniform(-variation, variation);
  return p;
}

std::vector<CampaignTrial> run_campaign(const SimConfig& config, std::uint64_t seed,
                                        const TrialClients& io) {
  config.validate();
  const auto& cc = config.campaign;
  std::vector<std::string> targets = cc.targets;
  if (targets.empty()) targets.push_back(config.scene.target_id);

  struct Job {
    int participant;
    std::size_t method;
    std::size_t target;
    int trial;
  };
  std::vector<Job> jobs;
  for (int p = 0; p < cc.participants; ++p) {
    for (std::size_t m = 0; m < cc.methods.size(); ++m) {
      for (std::size_t ti = 0; ti < targets.size(); ++ti) {
        for (int k = 0; k < cc.trials; ++k) jobs.push_back({p, m, ti, k});
      }
    }
  }

  std::vector<CampaignTrial> out(jobs.size());
  auto run_one = [&](std::size_t i) {
    const Job& job = jobs[i];
    // Layout depends on (participant, target, trial) only, so every method
    // sees the same shelf arrangement.
    const std::uint64_t layout_seed =
        mix_seed(mix_seed(seed, static_cast<std::uint64_t>(job.participant)),
                 mix_seed(static_cast<std::uint64_t>(job.target), static_cast<std::uint64_t>(job.trial)));
    Scene scene = config.scene;
    scene.target_id = targets[job.target];
    if (scene.shelf) scene = randomize_positions(scene, layout_seed);
    const std::uint64_t trial_seed = mix_seed(layout_seed, static_cast<std::uint64_t>(job.method) + 1);

    TrialConfig tc = config.trial;
    tc.method = cc.methods[job.method];
    const AgentParams agent =
        participant_agent(config.agent, cc.participant_variation, job.participant, seed);

    CampaignTrial& ct = out[i];
    ct.result = run_trial(scene, agent, tc, trial_seed, io);
    const SceneObject& target = scene.target();
    TrialLogEntry& e = ct.entry;
    e.participant = fmt::format("P{:02d}", job.participant + 1);
    e.method = std::string(to_string(tc.method));
    e.object = target.label;
    e.trial = job.trial + 1;
    e.seed = trial_seed;
    e.scene_hash = scene_hash(scene);
    e.record = ct.result.record;
    std::string slug = target.id;
    std::replace(slug.begin(), slug.end(), ' ', '_');
    e.record.transcript =
        fmt::format("transcripts/{}_{}_{}_t{}.jsonl", e.method, e.participant, slug, e.trial);
  };

  const bool shared_clients = io.detector != nullptr || io.resolver != nullptr;
  const int workers = shared_clients ? 1 : std::min<int>(cc.jobs, static_cast<int>(jobs.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) run_one(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < jobs.size(); i = next++) {
        try {
          run_one(i);
        } catch (...) {
          std::lock_guard lock(failure_mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

namespace {

std::optional<perception::Detection2D> distractor_detection(const Scene& scene,
                                                            const SceneObject* exclude,
                                                            const Pose& pose,
                                                            const perception::CameraIntrinsics& intr,
                                                            double occlusion_m) {
  for (const auto& o : scene.objects) {
    if (&o == exclude) continue;
    if (auto d = visible_detection(scene, o, pose, intr, occlusion_m)) return d;
  }
  return std::nullopt;
}

}  // namespace

std::vector<SampledFrame> sample_frames(const SceneSet& set,
                                        const perception::CameraIntrinsics& intr,
                                        const FrameSweepConfig& cfg) {
  if (set.scenes.empty()) throw ConfigError("scenes", "scene set is empty");
  if (set.categories.size() != set.scenes.size()) {
    throw ConfigError("scenes", "categories and scenes differ in length");
  }
  if (cfg.samples < 1) throw ConfigError("eval.samples", "must be >= 1");
  if (!(cfg.present_fraction >= 0.0 && cfg.present_fraction <= 1.0)) {
    throw ConfigError("eval.present_fraction", "must be in [0, 1]");
  }
  if (cfg.fp_count && *cfg.fp_count < 0) throw ConfigError("eval.fp_count", "must be >= 0");
  if (cfg.fn_count && *cfg.fn_count < 0) throw ConfigError("eval.fn_count", "must be >= 0");
  intr.validate();
  for (const auto& s : set.scenes) s.validate();

  const bool quota = cfg.fp_count.has_value() || cfg.fn_count.has_value();
  Rng rng(cfg.seed);
  Rng noise_rng(mix_seed(cfg.seed, 0x0dULL));

  std::vector<SampledFrame> frames;
  std::vector<std::size_t> scene_of;
  std::vector<Pose> poses;
  frames.reserve(static_cast<std::size_t>(cfg.samples));
  for (int i = 0; i < cfg.samples; ++i) {
    const auto si = static_cast<std::size_t>(rng.index(set.scenes.size()));
    const Scene& scene = set.scenes[si];
    SampledFrame f;
    f.category = set.categories[si];

    const bool present = rng.uniform() < cfg.present_fraction;
    const SceneObject* target = nullptr;
    if (present) {
      target = &scene.objects[static_cast<std::size_t>(rng.index(scene.objects.size()))];
      f.target = target->label;
    } else {
      // An absent query: a label from another scene that matches nothing here.
      std::vector<std::string> absent;
      for (const auto& other : set.scenes) {
        for (const auto& o : other.objects) {
          if (match_object(scene, o.label) == nullptr) absent.push_back(o.label);
        }
      }
      if (absent.empty()) throw ConfigError("scenes", "no absent labels available for negatives");
      f.target = absent[static_cast<std::size_t>(rng.index(absent.size()))];
    }

    const Pose& start = scene.camera_start;
    const Vec3 fwd = start.forward();
    const double yaw = rad_to_deg(std::atan2(fwd.x(), fwd.z())) +
                       rng.uniform(-cfg.yaw_jitter_deg, cfg.yaw_jitter_deg);
    const double pitch = rad_to_deg(std::asin(std::clamp(-fwd.y(), -1.0, 1.0))) +
                         rng.uniform(-cfg.pitch_jitter_deg, cfg.pitch_jitter_deg);
    const Vec3 pos = start.translation + Vec3(rng.uniform(-cfg.position_jitter_m, cfg.position_jitter_m),
                                              rng.uniform(-cfg.position_jitter_m, cfg.position_jitter_m),
                                              rng.uniform(-cfg.position_jitter_m, cfg.position_jitter_m));
    const Pose pose = Pose::from_yaw_pitch(yaw, pitch, pos);

    std::optional<perception::Detection2D> truth;
    if (target != nullptr) {
      truth = visible_detection(scene, *target, pose, intr, cfg.noise.occlusion_threshold_m);
      if (truth) f.truth = target->label;
    }
    if (quota) {
      f.predicted = truth;
    } else {
      f.predicted = oracle_detect(scene, pose, intr, f.target, cfg.noise, noise_rng);
    }
    frames.push_back(std::move(f));
    scene_of.push_back(si);
    poses.push_back(pose);
  }

  if (!quota) return frames;

  std::vector<std::size_t> fn_pool;
  std::vector<std::size_t> fp_pool;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (frames[i].truth) {
      fn_pool.push_back(i);
    } else if (distractor_detection(set.scenes[scene_of[i]], nullptr, poses[i], intr,
                                    cfg.noise.occlusion_threshold_m)) {
      fp_pool.push_back(i);
    }
  }
  auto pick = [&](std::vector<std::size_t>& pool, int count, const char* key) {
    if (static_cast<std::size_t>(count) > pool.size()) {
      throw ConfigError(key, fmt::format("asked for {} frames but only {} qualify", count, pool.size()));
    }
    for (std::size_t i = pool.size(); i > 1; --i) {
      std::swap(pool[i - 1], pool[static_cast<std::size_t>(rng.index(i))]);
    }
    pool.resize(static_cast<std::size_t>(count));
    std::sort(pool.begin(), pool.end());
  };
  pick(fn_pool, cfg.fn_count.value_or(0), "eval.fn_count");
  pick(fp_pool, cfg.fp_count.value_or(0), "eval.fp_count");
  for (std::size_t i : fn_pool) frames[i].predicted.reset();
  for (std::size_t i : fp_pool) {
    frames[i].predicted = distractor_detection(set.scenes[scene_of[i]], nullptr, poses[i], intr,
                                               cfg.noise.occlusion_threshold_m);
  }
  return frames;
}

}  // namespace navisense::sim
