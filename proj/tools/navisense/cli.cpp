#include "navisense/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "navisense/clients.hpp"
#include "navisense/config.hpp"
#include "navisense/error.hpp"
#include "navisense/intent.hpp"
#include "navisense/sim.hpp"
#include "navisense/stats.hpp"

namespace navisense::cli {

namespace fs = std::filesystem;

namespace {

/// Failure to write outputs; reported as an internal error.
class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GlobalOptions {
  std::uint64_t seed = 1;
  std::string out = "navisense_out";
  std::string config;
  bool verbose = false;
};

struct ClientOptions {
  std::string vlm_endpoint;
  std::string llm_endpoint;
  double timeout_s = clients::ClientConfig{}.timeout_s;
  int retries = clients::ClientConfig{}.max_retries;
};

struct RunOptions {
  std::optional<int> trials;
  std::optional<int> participants;
  std::optional<int> jobs;
  std::vector<std::string> methods;
  std::vector<std::string> targets;
  std::optional<double> miss_prob;
  std::optional<double> fp_prob;
};

struct EvalOptions {
  std::string scenes;
  int samples = sim::FrameSweepConfig{}.samples;
  double present_fraction = sim::FrameSweepConfig{}.present_fraction;
  double miss_prob = 0.0;
  double fp_prob = 0.0;
  std::optional<int> fp_count;
  std::optional<int> fn_count;
};

struct StatsOptions {
  std::vector<std::string> logs;
  std::string metric = "total_time";
  std::vector<std::string> tests = {"anova", "t", "friedman", "wilcoxon"};
  double alpha = 0.05;
};

struct LatencyOptions {
  std::string log;
};

struct GenConfigOptions {
  bool scenes = false;
};

std::ofstream open_output(const fs::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw OutputError("cannot write '" + path.string() + "'");
  return os;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::kInvalidInput, "cannot read '" + path.string() + "'");
  return is;
}

clients::ClientConfig client_config(const std::string& endpoint, const ClientOptions& c) {
  clients::ClientConfig cfg;
  cfg.endpoint = endpoint;
  cfg.timeout_s = c.timeout_s;
  cfg.max_retries = c.retries;
  cfg.validate();
  return cfg;
}

sim::SimConfig load_config(const GlobalOptions& g) {
  return g.config.empty() ? config::default_sim_config() : config::load_sim_config(g.config);
}

int cmd_run(const GlobalOptions& g, const RunOptions& r, const ClientOptions& c, std::ostream& out,
            std::ostream& err) {
  sim::SimConfig cfg = load_config(g);
  if (r.trials) cfg.campaign.trials = *r.trials;
  if (r.participants) cfg.campaign.participants = *r.participants;
  if (r.jobs) cfg.campaign.jobs = *r.jobs;
  if (!r.targets.empty()) cfg.campaign.targets = r.targets;
  if (!r.methods.empty()) {
    cfg.campaign.methods.clear();
    for (const auto& m : r.methods) cfg.campaign.methods.push_back(sim::parse_method(m));
  }
  if (r.miss_prob) cfg.trial.detector.noise.miss_prob = *r.miss_prob;
  if (r.fp_prob) cfg.trial.detector.noise.false_positive_prob = *r.fp_prob;
  cfg.validate();

  std::optional<clients::HttpDetector> http_detector;
  std::optional<clients::HttpLLMClient> http_llm;
  std::optional<intent::RemoteIntentResolver> remote_resolver;
  sim::TrialClients io;
  if (!c.vlm_endpoint.empty()) {
    http_detector.emplace(client_config(c.vlm_endpoint, c));
    io.detector = &*http_detector;
  }
  if (!c.llm_endpoint.empty()) {
    http_llm.emplace(client_config(c.llm_endpoint, c));
    remote_resolver.emplace(*http_llm);
    io.resolver = &*remote_resolver;
  }

  const auto trials = sim::run_campaign(cfg, g.seed, io);

  const fs::path dir(g.out);
  std::vector<TrialLogEntry> entries;
  std::vector<clients::LatencyEntry> latency;
  for (const auto& t : trials) {
    entries.push_back(t.entry);
    for (auto e : t.result.latency) {
      e.call_id = latency.size() + 1;
      latency.push_back(e);
    }
    auto ts = open_output(dir / t.entry.record.transcript);
    sim::write_trial_transcript(ts, t.result);
    if (g.verbose) {
      err << fmt::format("{} {} {} t{}: success={} total={:.2f}s touches={}\n", t.entry.participant,
                         t.entry.method, t.entry.object, t.entry.trial, t.entry.record.success,
                         t.entry.record.total_time_s, t.entry.record.undesired_touches);
    }
  }
  {
    auto os = open_output(dir / "trials.jsonl");
    write_trial_log(os, entries);
  }
  {
    auto os = open_output(dir / "latency.csv");
    clients::write_latency_csv(os, latency);
  }

  std::vector<std::string> expected;
  for (auto m : cfg.campaign.methods) expected.emplace_back(sim::to_string(m));
  const auto groups = stats::summarize(
      entries, [](const TrialLogEntry& e) { return e.method; }, expected);
  std::ostringstream table;
  table << fmt::format("{} trials ({} participant(s) x {} method(s) x {} object(s) x {} trial(s)), seed {}\n\n",
                       entries.size(), cfg.campaign.participants, cfg.campaign.methods.size(),
                       cfg.campaign.targets.empty() ? 1 : cfg.campaign.targets.size(),
                       cfg.campaign.trials, g.seed);
  stats::print_summary_table(table, groups);
  table << '\n';
  stats::print_method_object_table(table, entries, stats::Metric::kTotalTime);
  if (!latency.empty()) {
    const auto rep = clients::latency_report(latency);
    table << fmt::format("\nDetector latency: mean {:.3f} s, p99 {:.3f} s over {} calls\n", rep.mean_s,
                         rep.p99_s, rep.count);
  }
  {
    auto os = open_output(dir / "summary.txt");
    os << table.str();
  }
  {
    auto os = open_output(dir / "summary.csv");
    stats::write_summary_csv(os, groups);
  }
  out << table.str();
  out << "\nwrote " << (dir / "trials.jsonl").string() << '\n';
  return kExitOk;
}

int cmd_eval_frames(const GlobalOptions& g, const EvalOptions& e, std::ostream& out) {
  const sim::SceneSet set = e.scenes.empty() ? config::default_scene_set() : config::load_scene_set(e.scenes);
  const sim::SimConfig base = load_config(g);
  sim::FrameSweepConfig fc;
  fc.samples = e.samples;
  fc.seed = g.seed;
  fc.present_fraction = e.present_fraction;
  fc.noise.miss_prob = e.miss_prob;
  fc.noise.false_positive_prob = e.fp_prob;
  fc.fp_count = e.fp_count;
  fc.fn_count = e.fn_count;
  if (!(e.miss_prob >= 0.0 && e.miss_prob <= 1.0)) throw ConfigError("miss-prob", "must be in [0, 1]");
  if (!(e.fp_prob >= 0.0 && e.fp_prob <= 1.0)) throw ConfigError("fp-prob", "must be in [0, 1]");

  const auto frames = sim::sample_frames(set, base.trial.intrinsics, fc);
  std::vector<stats::FrameObservation> obs;
  std::map<std::string, std::vector<stats::FrameObservation>> by_category;
  std::vector<std::string> categories;
  for (const auto& f : frames) {
    obs.push_back({f.truth, f.predicted});
    if (!by_category.contains(f.category)) categories.push_back(f.category);
    by_category[f.category].push_back(obs.back());
  }
  const auto r = stats::frame_eval(obs);
  out << fmt::format("frames: {} over {} scene(s), seed {}\n", r.n, set.scenes.size(), g.seed);
  out << fmt::format("accuracy: {:.3f} ({}/{})\n", r.accuracy, r.correct, r.n);
  out << fmt::format("95% Wilson CI: [{:.3f}, {:.3f}]\n", r.ci.lo, r.ci.hi);
  out << fmt::format("false positives: {}\nfalse negatives: {}\n", r.false_positives, r.false_negatives);
  out << "\nper category:\n";
  for (const auto& cat : categories) {
    const auto cr = stats::frame_eval(by_category[cat]);
    out << fmt::format("  {:<12} {:>3}/{:<3} {:.3f}  FP {}  FN {}\n", cat, cr.correct, cr.n, cr.accuracy,
                       cr.false_positives, cr.false_negatives);
  }
  return kExitOk;
}

std::vector<TrialLogEntry> read_logs(const std::vector<std::string>& paths) {
  std::vector<TrialLogEntry> all;
  for (const auto& p : paths) {
    auto is = open_input(p);
    const bool csv = fs::path(p).extension() == ".csv";
    auto part = csv ? read_trial_csv(is) : read_trial_log(is);
    all.insert(all.end(), part.begin(), part.end());
  }
  if (all.empty()) throw Error(ErrorCode::kEmptyLog, "no trial records in the given logs");
  return all;
}

int cmd_stats(const StatsOptions& s, std::ostream& out) {
  const auto records = read_logs(s.logs);
  stats::StatsRequest req;
  req.metric = stats::parse_metric(s.metric);
  req.alpha = s.alpha;
  if (!(s.alpha > 0.0 && s.alpha < 1.0)) throw ConfigError("alpha", "must be in (0, 1)");
  req.anova = req.t_test = req.friedman = req.wilcoxon = false;
  for (const auto& t : s.tests) {
    if (t == "anova") req.anova = true;
    else if (t == "t" || t == "t-test" || t == "ttest") req.t_test = true;
    else if (t == "friedman") req.friedman = true;
    else if (t == "wilcoxon") req.wilcoxon = true;
    else if (t == "all") req.anova = req.t_test = req.friedman = req.wilcoxon = true;
    else throw ConfigError("tests", "unknown test '" + t + "' (anova, t, friedman, wilcoxon, all)");
  }
  const auto report = stats::analyze(records, req);
  stats::print_report(out, report);
  out << '\n';
  stats::print_method_object_table(out, records, req.metric);
  return kExitOk;
}

int cmd_latency(const LatencyOptions& l, std::ostream& out) {
  auto is = open_input(l.log);
  const auto entries = clients::read_latency_csv(is);
  const auto r = clients::latency_report(entries);
  out << fmt::format("calls: {}\n", r.count);
  out << fmt::format("mean: {:.3f} s\n", r.mean_s);
  out << fmt::format("p50: {:.3f} s\n", r.p50_s);
  out << fmt::format("p99: {:.3f} s\n", r.p99_s);
  out << fmt::format("error rate: {:.3f}\n", r.error_rate);
  return kExitOk;
}

std::string defaults_footer() {
  const auto c = config::default_sim_config();
  const auto& t = c.trial;
  return fmt::format(
      "\nDefaults (see `navisense gen-config` for the full reference):\n"
      "  shelf {} rows x {} slots, {} m wide, front at {} m; step {} s; scan every {} s; timeout {} s\n"
      "  detector latency {} s +/- {} s; guidance threshold {} deg, bands far > {} m > mid > {} m > near > {} m\n"
      "  agent turn {} deg/s, walk {} m/s, reach {} m, touch radius {} m, reaction {} s\n",
      c.scene.shelf->rows, c.scene.shelf->slots_per_row, c.scene.shelf->width_m, c.scene.shelf->front_z_m,
      t.session.step_s, t.session.scan_interval_s, t.session.timeout_s, t.detector.latency_s,
      t.detector.latency_jitter_s, t.guidance.dir_threshold_deg, t.guidance.far_m, t.guidance.near_m,
      t.guidance.arrival_m, c.agent.turn_rate_deg_s, c.agent.move_speed_m_s, c.agent.reach_m,
      c.agent.touch_radius_m, c.agent.reaction_delay_s);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"navisense: simulation, evaluation and reporting for guided object finding"};
  app.footer(defaults_footer());
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--config", g.config, "YAML run configuration");
  app.add_flag("--verbose", g.verbose, "Per-trial progress on stderr");

  ClientOptions c;
  RunOptions r;
  auto* run = app.add_subcommand("run", "Run a trial campaign and write logs and summaries");
  run->add_option("--trials", r.trials, "Trials per object and method (default 3)");
  run->add_option("--participants", r.participants, "Simulated participants (default 1)");
  run->add_option("--jobs", r.jobs, "Parallel trial workers (default 1)");
  run->add_option("--method", r.methods, "navisense, description-only, oneshot-query")->delimiter(',');
  run->add_option("--targets", r.targets, "Target object ids (default a2_milk,party_cups,rotini_pasta)")
      ->delimiter(',');
  run->add_option("--miss-prob", r.miss_prob, "Detector miss probability (default 0)");
  run->add_option("--fp-prob", r.fp_prob, "Detector false-positive probability (default 0)");
  run->add_option("--vlm-endpoint", c.vlm_endpoint, "HTTP detection endpoint (default: oracle mock)");
  run->add_option("--llm-endpoint", c.llm_endpoint, "HTTP intent endpoint (default: rule-based mock)");
  run->add_option("--timeout", c.timeout_s, "Client timeout in seconds")->capture_default_str();
  run->add_option("--retries", c.retries, "Client retries after the first attempt")->capture_default_str();

  EvalOptions e;
  auto* eval = app.add_subcommand("eval-frames", "Frame-level detection accuracy over a scene set");
  eval->add_option("--scenes", e.scenes, "Scene-set YAML (default: built-in everyday set)");
  eval->add_option("--samples", e.samples, "Frames to sample")->capture_default_str();
  eval->add_option("--present-fraction", e.present_fraction, "Share of frames querying a present object")
      ->capture_default_str();
  eval->add_option("--miss-prob", e.miss_prob, "Per-frame miss probability")->capture_default_str();
  eval->add_option("--fp-prob", e.fp_prob, "Per-frame false-positive probability")->capture_default_str();
  eval->add_option("--fp-count", e.fp_count, "Exact number of false-positive frames");
  eval->add_option("--fn-count", e.fn_count, "Exact number of false-negative frames");

  StatsOptions s;
  auto* st = app.add_subcommand("stats", "Summaries and tests over trial logs (.jsonl or .csv)");
  st->add_option("logs", s.logs, "Trial log files")->required();
  st->add_option("--metric", s.metric, "search_time, guidance_time, total_time, undesired_touches, success")
      ->capture_default_str();
  st->add_option("--tests", s.tests, "anova, t, friedman, wilcoxon, all")->delimiter(',')->capture_default_str();
  st->add_option("--alpha", s.alpha, "Family-wise alpha before Bonferroni")->capture_default_str();

  LatencyOptions l;
  auto* lat = app.add_subcommand("latency", "Latency report for a client call log (CSV)");
  lat->add_option("log", l.log, "Latency CSV")->required();

  GenConfigOptions gc;
  auto* gen = app.add_subcommand("gen-config", "Print the reference configuration with all defaults");
  gen->add_flag("--scenes", gc.scenes, "Print the scene-set reference instead");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex, out, err);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex, out, err);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex, out, err);
    return kExitInput;
  }

  try {
    if (*run) return cmd_run(g, r, c, out, err);
    if (*eval) return cmd_eval_frames(g, e, out);
    if (*st) return cmd_stats(s, out);
    if (*lat) return cmd_latency(l, out);
    if (*gen) {
      out << (gc.scenes ? config::reference_scene_set_yaml() : config::reference_config_yaml());
      return kExitOk;
    }
  } catch (const ConfigError& ex) {
    err << "error: config: " << ex.what() << '\n';
    return kExitInput;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitInput;
  } catch (const OutputError& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitInternal;
  } catch (const std::exception& ex) {
    err << "internal error: " << ex.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace navisense::cli
