#include "navisense/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "navisense/error.hpp"
#include "text_util.hpp"

namespace navisense::config {

namespace {

template <typename T>
constexpr const char* type_name() {
  if constexpr (std::is_same_v<T, bool>) return "a boolean";
  else if constexpr (std::is_integral_v<T>) return "an integer";
  else if constexpr (std::is_floating_point_v<T>) return "a number";
  else return "a string";
}

// A default-constructed YAML::Node counts as defined (null), so missing
// keys are represented by an undefined child of a scratch map instead.
YAML::Node absent() {
  YAML::Node holder(YAML::NodeType::Map);
  return holder["absent"];
}

/// A YAML mapping that remembers which keys were read, so leftovers can be
/// reported as unknown.
class Section {
 public:
  Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) throw ConfigError(where(), "expected a mapping");
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string where() const { return path_.empty() ? "<root>" : path_; }

  bool has(const std::string& key) const { return node_ && node_.IsMap() && node_[key]; }

  YAML::Node raw(const std::string& key) {
    seen_.insert(key);
    if (!has(key)) return absent();
    return node_[key];
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    YAML::Node n = raw(key);
    if (!n) return;
    out = convert<T>(n, key_path(key));
  }

  void read(const std::string& key, Vec3& out) {
    YAML::Node n = raw(key);
    if (!n) return;
    out = to_vec3(n, key_path(key));
  }

  template <typename T>
  void read(const std::string& key, std::optional<T>& out) {
    YAML::Node n = raw(key);
    if (!n || n.IsNull()) return;
    out = convert<T>(n, key_path(key));
  }

  Section child(const std::string& key) { return Section(raw(key), key_path(key)); }

  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const auto k = kv.first.as<std::string>();
      if (!seen_.contains(k)) throw ConfigError(key_path(k), "unknown key");
    }
  }

  template <typename T>
  static T convert(const YAML::Node& n, const std::string& path) {
    if (!n.IsScalar()) throw ConfigError(path, fmt::format("expected {}", type_name<T>()));
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(path, fmt::format("expected {}, got '{}'", type_name<T>(), n.Scalar()));
    }
  }

  static Vec3 to_vec3(const YAML::Node& n, const std::string& path) {
    if (!n.IsSequence() || n.size() != 3) throw ConfigError(path, "expected a list of 3 numbers");
    Vec3 v;
    for (std::size_t i = 0; i < 3; ++i) v[static_cast<int>(i)] = convert<double>(n[i], fmt::format("{}[{}]", path, i));
    return v;
  }

 private:
  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

YAML::Node parse_yaml(const std::string& text) {
  try {
    return YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("<yaml>", fmt::format("parse error at line {}: {}", e.mark.line + 1, e.msg));
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("<file>", "cannot read '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void read_shelf(Section s, sim::ShelfGrid& g) {
  s.read("rows", g.rows);
  s.read("slots_per_row", g.slots_per_row);
  s.read("width_m", g.width_m);
  s.read("depth_m", g.depth_m);
  s.read("row_spacing_m", g.row_spacing_m);
  s.read("top_row_y_m", g.top_row_y_m);
  s.read("front_z_m", g.front_z_m);
  s.finish();
}

Pose read_camera_start(Section s) {
  Vec3 position = Vec3::Zero();
  double yaw = 0.0;
  double pitch = 0.0;
  s.read("position", position);
  s.read("yaw_deg", yaw);
  s.read("pitch_deg", pitch);
  s.finish();
  return Pose::from_yaw_pitch(yaw, pitch, position);
}

struct ObjectEntry {
  sim::ObjectSpec spec;
  std::optional<int> slot;
  std::optional<Vec3> center;
};

std::vector<ObjectEntry> read_objects(YAML::Node list, const std::string& path) {
  if (!list) return {};
  if (!list.IsSequence()) throw ConfigError(path, "expected a list of objects");
  std::vector<ObjectEntry> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    Section o(list[i], fmt::format("{}[{}]", path, i));
    ObjectEntry e;
    o.read("id", e.spec.id);
    o.read("label", e.spec.label);
    o.read("half_extents", e.spec.half_extents);
    o.read("slot", e.slot);
    if (o.has("center")) {
      Vec3 c;
      o.read("center", c);
      e.center = c;
    }
    o.finish();
    if (e.spec.id.empty()) throw ConfigError(o.key_path("id"), "required");
    if (e.spec.label.empty()) e.spec.label = e.spec.id;
    out.push_back(std::move(e));
  }
  return out;
}

/// Builds a scene from a shelf (or free bounds) and object entries.
sim::Scene build_scene(const std::optional<sim::ShelfGrid>& shelf, const std::optional<Aabb>& bounds,
                       const std::vector<ObjectEntry>& objects, std::string target,
                       const Pose& camera, const std::string& path) {
  sim::Scene scene;
  scene.camera_start = camera;
  scene.target_id = std::move(target);
  if (scene.target_id.empty() && !objects.empty()) scene.target_id = objects.front().spec.id;
  if (shelf) {
    shelf->validate();
    scene.shelf = shelf;
    scene.bounds = shelf->bounds();
  } else if (bounds) {
    scene.bounds = *bounds;
  } else {
    throw ConfigError(path + ".shelf", "a shelf or explicit bounds is required");
  }
  std::set<int> used;
  int next_slot = 0;
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const auto& e = objects[i];
    const std::string key = fmt::format("{}.objects[{}]", path, i);
    sim::SceneObject o{e.spec.id, e.spec.label, Vec3::Zero(), e.spec.half_extents};
    if (e.center) {
      o.center = *e.center;
    } else if (shelf) {
      int slot = e.slot.value_or(-1);
      if (slot < 0) {
        while (used.contains(next_slot)) ++next_slot;
        slot = next_slot;
      }
      if (slot >= shelf->slot_count()) {
        throw ConfigError(key + ".slot", fmt::format("slot {} outside the {}-slot shelf", slot,
                                                     shelf->slot_count()));
      }
      if (!used.insert(slot).second) throw ConfigError(key + ".slot", fmt::format("slot {} taken", slot));
      o.center = shelf->place(slot, o.half_extents);
    } else {
      throw ConfigError(key + ".center", "required without a shelf");
    }
    scene.objects.push_back(std::move(o));
  }
  return scene;
}

sim::Scene read_scene(Section s, const sim::Scene& defaults) {
  std::optional<sim::ShelfGrid> shelf = defaults.shelf;
  if (s.has("shelf")) {
    sim::ShelfGrid g = shelf.value_or(sim::ShelfGrid{});
    read_shelf(s.child("shelf"), g);
    shelf = g;
  } else {
    s.raw("shelf");
  }
  std::optional<Aabb> bounds;
  if (s.has("bounds")) {
    Section b = s.child("bounds");
    Aabb box;
    b.read("min", box.min);
    b.read("max", box.max);
    b.finish();
    bounds = box;
  } else {
    s.raw("bounds");
  }
  Pose camera = defaults.camera_start;
  if (s.has("camera_start")) camera = read_camera_start(s.child("camera_start"));
  else s.raw("camera_start");
  std::string target = defaults.target_id;
  s.read("target", target);

  sim::Scene scene;
  if (s.has("objects")) {
    scene = build_scene(shelf, bounds, read_objects(s.raw("objects"), s.key_path("objects")), target,
                        camera, s.where());
  } else {
    s.raw("objects");
    scene = defaults;
    scene.camera_start = camera;
    scene.target_id = target;
    if (shelf && defaults.shelf) {
      scene.shelf = shelf;
      scene.bounds = shelf->bounds();
      for (std::size_t i = 0; i < scene.objects.size(); ++i) {
        scene.objects[i].center = shelf->place(static_cast<int>(i), scene.objects[i].half_extents);
      }
    }
  }
  s.finish();
  return scene;
}

void read_intrinsics(Section s, perception::CameraIntrinsics& c) {
  s.read("fx", c.fx);
  s.read("fy", c.fy);
  s.read("cx", c.cx);
  s.read("cy", c.cy);
  s.read("width", c.width);
  s.read("height", c.height);
  s.finish();
}

void read_agent(Section s, sim::AgentParams& a) {
  s.read("turn_rate_deg_s", a.turn_rate_deg_s);
  s.read("move_speed_m_s", a.move_speed_m_s);
  s.read("reach_m", a.reach_m);
  s.read("touch_radius_m", a.touch_radius_m);
  s.read("reaction_delay_s", a.reaction_delay_s);
  s.read("sweep_amplitude_deg", a.sweep_amplitude_deg);
  s.read("sweep_rate_deg_s", a.sweep_rate_deg_s);
  s.read("seed", a.seed);
  Section n = s.child("noise");
  n.read("heading_sd_deg", a.noise.heading_sd_deg);
  n.read("speed_jitter", a.noise.speed_jitter);
  n.finish();
  s.finish();
}

void read_session(Section s, sim::SessionConfig& c) {
  s.read("step_s", c.step_s);
  s.read("scan_interval_s", c.scan_interval_s);
  s.read("timeout_s", c.timeout_s);
  s.read("speech_s", c.speech_s);
  s.read("anchor_refresh", c.anchor_refresh);
  s.read("cancel_at_s", c.cancel_at_s);
  Section a = s.child("anchor");
  a.read("ema_alpha", c.anchor.ema_alpha);
  a.read("min_confidence", c.anchor.min_confidence);
  a.finish();
  Section sh = s.child("shake");
  sh.read("window_s", c.shake.window_s);
  sh.read("peak_g", c.shake.peak_g);
  sh.read("min_peaks", c.shake.min_peaks);
  sh.finish();
  s.finish();
}

void read_guidance(Section s, guidance::GuidanceConfig& g) {
  s.read("dir_threshold_deg", g.dir_threshold_deg);
  s.read("arrival_m", g.arrival_m);
  s.read("near_m", g.near_m);
  s.read("far_m", g.far_m);
  s.read("min_gap_s", g.min_gap_s);
  Section h = s.child("haptics");
  h.read("far_hz", g.rates.far_hz);
  h.read("mid_hz", g.rates.mid_hz);
  h.read("near_hz", g.rates.near_hz);
  h.read("arrived_hz", g.rates.arrived_hz);
  h.read("duty", g.rates.duty);
  h.finish();
  s.finish();
}

void read_detector(Section s, sim::DetectorConfig& d) {
  s.read("latency_s", d.latency_s);
  s.read("latency_jitter_s", d.latency_jitter_s);
  s.read("max_range_m", d.max_range);
  s.read("miss_prob", d.noise.miss_prob);
  s.read("false_positive_prob", d.noise.false_positive_prob);
  s.read("occlusion_threshold_m", d.noise.occlusion_threshold_m);
  s.finish();
}

void read_intent(Section s, intent::IntentConfig& c) {
  s.read("strip_possessive", c.strip_possessive);
  s.read("help_reply", c.help_reply);
  if (YAML::Node list = s.raw("need_phrases")) {
    if (!list.IsSequence()) throw ConfigError(s.key_path("need_phrases"), "expected a list");
    c.need_phrases.clear();
    for (std::size_t i = 0; i < list.size(); ++i) {
      Section p(list[i], fmt::format("{}[{}]", s.key_path("need_phrases"), i));
      intent::NeedPhrase np;
      p.read("phrase", np.phrase);
      p.read("question", np.question);
      p.finish();
      if (np.phrase.empty()) throw ConfigError(p.key_path("phrase"), "required");
      c.need_phrases.push_back(std::move(np));
    }
  }
  s.finish();
}

std::vector<std::string> read_string_list(YAML::Node n, const std::string& path) {
  if (!n.IsSequence()) throw ConfigError(path, "expected a list of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n.size(); ++i) {
    out.push_back(Section::convert<std::string>(n[i], fmt::format("{}[{}]", path, i)));
  }
  return out;
}

void read_campaign(Section s, sim::CampaignConfig& c) {
  s.read("participants", c.participants);
  s.read("trials", c.trials);
  s.read("participant_variation", c.participant_variation);
  s.read("jobs", c.jobs);
  if (YAML::Node t = s.raw("targets")) c.targets = read_string_list(t, s.key_path("targets"));
  if (YAML::Node m = s.raw("methods")) {
    c.methods.clear();
    const auto names = read_string_list(m, s.key_path("methods"));
    for (std::size_t i = 0; i < names.size(); ++i) {
      try {
        c.methods.push_back(sim::parse_method(names[i]));
      } catch (const ConfigError& e) {
        throw ConfigError(fmt::format("{}[{}]", s.key_path("methods"), i), e.what());
      }
    }
  }
  s.finish();
}

std::vector<sim::ObjectSpec> default_products() {
  return {
      {"chips", "chips", Vec3(0.10, 0.14, 0.05)},
      {"olive_oil", "olive oil", Vec3(0.04, 0.14, 0.04)},
      {"rotini_pasta", "rotini pasta", Vec3(0.08, 0.12, 0.04)},
      {"penne_pasta", "penne pasta", Vec3(0.08, 0.12, 0.04)},
      {"party_cups", "party cups", Vec3(0.05, 0.15, 0.05)},
      {"laundry_detergent", "laundry detergent", Vec3(0.10, 0.13, 0.07)},
      {"a2_milk", "a2 milk", Vec3(0.045, 0.12, 0.045)},
      {"toilet_paper", "toilet paper", Vec3(0.12, 0.15, 0.12)},
  };
}

std::string num(double x) { return detail::format_double(x); }
std::string vec(const Vec3& v) { return fmt::format("[{}, {}, {}]", num(v.x()), num(v.y()), num(v.z())); }
std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

void emit_shelf(std::ostream& os, const sim::ShelfGrid& g, const std::string& indent) {
  os << indent << "shelf:\n"
     << indent << "  rows: " << g.rows << "\n"
     << indent << "  slots_per_row: " << g.slots_per_row << "\n"
     << indent << "  width_m: " << num(g.width_m) << "\n"
     << indent << "  depth_m: " << num(g.depth_m) << "\n"
     << indent << "  row_spacing_m: " << num(g.row_spacing_m) << "          # vertical gap between shelf surfaces\n"
     << indent << "  top_row_y_m: " << num(g.top_row_y_m) << "          # +Y points down; negative is above the eye\n"
     << indent << "  front_z_m: " << num(g.front_z_m) << "             # distance from the starting position\n";
}

}  // namespace

sim::SimConfig default_sim_config() {
  sim::SimConfig cfg;
  cfg.scene = sim::make_shelf_scene(sim::ShelfGrid{}, default_products(), "a2_milk");
  cfg.campaign.targets = {"a2_milk", "party_cups", "rotini_pasta"};
  return cfg;
}

sim::SimConfig parse_sim_config(const std::string& yaml_text) {
  const YAML::Node root = parse_yaml(yaml_text);
  sim::SimConfig cfg = default_sim_config();
  Section s(root, "");
  if (s.has("scene")) cfg.scene = read_scene(s.child("scene"), cfg.scene);
  else s.raw("scene");
  read_intrinsics(s.child("camera"), cfg.trial.intrinsics);
  read_agent(s.child("agent"), cfg.agent);
  read_session(s.child("session"), cfg.trial.session);
  read_guidance(s.child("guidance"), cfg.trial.guidance);
  read_detector(s.child("detector"), cfg.trial.detector);
  read_intent(s.child("intent"), cfg.trial.intent);
  read_campaign(s.child("campaign"), cfg.campaign);
  s.finish();
  // The default targets belong to the default shelf.
  if (s.has("scene") && !(root["campaign"] && root["campaign"]["targets"])) cfg.campaign.targets.clear();
  cfg.validate();
  return cfg;
}

sim::SimConfig load_sim_config(const std::filesystem::path& path) {
  return parse_sim_config(read_file(path));
}

std::string reference_config_yaml() {
  const sim::SimConfig c = default_sim_config();
  std::ostringstream os;
  os << "# navisense run configuration. Every key is optional; the values below\n"
        "# are the built-in defaults. Units: metres, seconds, degrees.\n"
        "# World frame: +X right, +Y down, +Z forward from the starting position.\n\n";
  os << "scene:\n";
  emit_shelf(os, *c.scene.shelf, "  ");
  os << "  camera_start:\n"
        "    position: [0, 0, 0]\n"
        "    yaw_deg: 0\n"
        "    pitch_deg: 0\n";
  os << "  target: " << c.scene.target_id << "             # used when campaign.targets is empty\n";
  os << "  # Objects fill shelf slots in order (row 0 is the top row) unless a\n"
        "  # slot index or an explicit center is given.\n";
  os << "  objects:\n";
  for (const auto& o : c.scene.objects) {
    os << "    - {id: " << o.id << ", label: " << quoted(o.label) << ", half_extents: " << vec(o.half_extents)
       << "}\n";
  }
  const auto& in = c.trial.intrinsics;
  os << "\ncamera:\n"
     << "  fx: " << num(in.fx) << "\n  fy: " << num(in.fy) << "\n  cx: " << num(in.cx) << "\n  cy: " << num(in.cy)
     << "\n  width: " << in.width << "\n  height: " << in.height << "\n";
  const auto& a = c.agent;
  os << "\nagent:\n"
     << "  turn_rate_deg_s: " << num(a.turn_rate_deg_s) << "\n"
     << "  move_speed_m_s: " << num(a.move_speed_m_s) << "\n"
     << "  reach_m: " << num(a.reach_m) << "                 # hand offset along the view direction\n"
     << "  touch_radius_m: " << num(a.touch_radius_m) << "\n"
     << "  reaction_delay_s: " << num(a.reaction_delay_s) << "\n"
     << "  sweep_amplitude_deg: " << num(a.sweep_amplitude_deg) << "      # idle scan before the first cue\n"
     << "  sweep_rate_deg_s: " << num(a.sweep_rate_deg_s) << "\n"
     << "  seed: " << a.seed << "\n"
     << "  noise:\n"
     << "    heading_sd_deg: " << num(a.noise.heading_sd_deg) << "\n"
     << "    speed_jitter: " << num(a.noise.speed_jitter) << "\n";
  const auto& se = c.trial.session;
  os << "\nsession:\n"
     << "  step_s: " << num(se.step_s) << "               # virtual clock step\n"
     << "  scan_interval_s: " << num(se.scan_interval_s) << "        # detection cadence\n"
     << "  timeout_s: " << num(se.timeout_s) << "\n"
     << "  speech_s: " << num(se.speech_s) << "               # duration of each spoken reply\n"
     << "  anchor_refresh: " << (se.anchor_refresh ? "true" : "false") << "\n"
     << "  cancel_at_s: null          # simulate a shake-to-cancel at this time\n"
     << "  anchor:\n"
     << "    ema_alpha: " << num(se.anchor.ema_alpha) << "\n"
     << "    min_confidence: " << num(se.anchor.min_confidence) << "\n"
     << "  shake:\n"
     << "    window_s: " << num(se.shake.window_s) << "\n"
     << "    peak_g: " << num(se.shake.peak_g) << "\n"
     << "    min_peaks: " << se.shake.min_peaks << "\n";
  const auto& g = c.trial.guidance;
  os << "\nguidance:\n"
     << "  dir_threshold_deg: " << num(g.dir_threshold_deg) << "\n"
     << "  arrival_m: " << num(g.arrival_m) << "\n"
     << "  near_m: " << num(g.near_m) << "\n"
     << "  far_m: " << num(g.far_m) << "\n"
     << "  min_gap_s: " << num(g.min_gap_s) << "            # repeat interval for an unchanged cue\n"
     << "  haptics:\n"
     << "    far_hz: " << num(g.rates.far_hz) << "\n"
     << "    mid_hz: " << num(g.rates.mid_hz) << "\n"
     << "    near_hz: " << num(g.rates.near_hz) << "\n"
     << "    arrived_hz: " << num(g.rates.arrived_hz) << "\n"
     << "    duty: " << num(g.rates.duty) << "\n";
  const auto& d = c.trial.detector;
  os << "\ndetector:\n"
     << "  latency_s: " << num(d.latency_s) << "\n"
     << "  latency_jitter_s: " << num(d.latency_jitter_s) << "\n"
     << "  max_range_m: " << num(d.max_range) << "\n"
     << "  miss_prob: " << num(d.noise.miss_prob) << "\n"
     << "  false_positive_prob: " << num(d.noise.false_positive_prob) << "\n"
     << "  occlusion_threshold_m: " << num(d.noise.occlusion_threshold_m) << "\n";
  const auto& it = c.trial.intent;
  os << "\nintent:\n"
     << "  strip_possessive: " << (it.strip_possessive ? "true" : "false") << "\n"
     << "  help_reply: " << quoted(it.help_reply) << "\n"
     << "  need_phrases:\n";
  for (const auto& np : it.need_phrases) {
    os << "    - {phrase: " << quoted(np.phrase) << ", question: " << quoted(np.question) << "}\n";
  }
  const auto& ca = c.campaign;
  os << "\ncampaign:\n"
     << "  participants: " << ca.participants << "\n"
     << "  trials: " << ca.trials << "                  # per target and method\n"
     << "  targets: [";
  for (std::size_t i = 0; i < ca.targets.size(); ++i) os << (i ? ", " : "") << ca.targets[i];
  os << "]\n  methods: [";
  for (std::size_t i = 0; i < ca.methods.size(); ++i) os << (i ? ", " : "") << sim::to_string(ca.methods[i]);
  os << "]      # navisense, description-only, oneshot-query\n"
     << "  participant_variation: " << num(ca.participant_variation) << "  # +/- fraction on agent rates\n"
     << "  jobs: " << ca.jobs << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Scene sets

namespace {

struct SetScene {
  std::string category;
  std::vector<std::pair<std::string, Vec3>> items;  // label, half extents
  std::vector<int> slots;
};

std::vector<SetScene> default_set_scenes() {
  const std::vector<int> slots = {0, 5, 7, 9, 2};
  return {
      {"kitchen",
       {{"coffee mug", Vec3(0.05, 0.05, 0.05)},
        {"water bottle", Vec3(0.04, 0.12, 0.04)},
        {"cereal box", Vec3(0.10, 0.15, 0.04)},
        {"dish soap", Vec3(0.04, 0.10, 0.03)},
        {"salt shaker", Vec3(0.025, 0.05, 0.025)}},
       slots},
      {"office",
       {{"stapler", Vec3(0.08, 0.03, 0.03)},
        {"notebook", Vec3(0.10, 0.13, 0.015)},
        {"pen holder", Vec3(0.04, 0.06, 0.04)},
        {"desk lamp", Vec3(0.08, 0.18, 0.08)},
        {"headphones", Vec3(0.09, 0.10, 0.05)}},
       slots},
      {"bathroom",
       {{"toothpaste", Vec3(0.10, 0.03, 0.025)},
        {"shampoo bottle", Vec3(0.04, 0.11, 0.03)},
        {"hand towel", Vec3(0.12, 0.06, 0.08)},
        {"hair brush", Vec3(0.12, 0.03, 0.04)},
        {"tissue box", Vec3(0.11, 0.06, 0.06)}},
       slots},
      {"living room",
       {{"tv remote", Vec3(0.03, 0.02, 0.10)},
        {"reading glasses", Vec3(0.07, 0.025, 0.03)},
        {"phone charger", Vec3(0.03, 0.02, 0.04)},
        {"candle", Vec3(0.04, 0.06, 0.04)},
        {"picture frame", Vec3(0.10, 0.13, 0.02)}},
       slots},
      {"pantry",
       {{"peanut butter", Vec3(0.05, 0.07, 0.05)},
        {"soup can", Vec3(0.04, 0.06, 0.04)},
        {"soft drink", Vec3(0.035, 0.07, 0.035)},
        {"rice bag", Vec3(0.10, 0.14, 0.05)},
        {"tea box", Vec3(0.07, 0.04, 0.05)}},
       slots},
  };
}

std::string slug(std::string s) {
  for (char& c : s) {
    if (c == ' ') c = '_';
  }
  return s;
}

}  // namespace

sim::SceneSet parse_scene_set(const std::string& yaml_text) {
  const YAML::Node root = parse_yaml(yaml_text);
  Section s(root, "");
  sim::ShelfGrid shelf;
  if (s.has("shelf")) read_shelf(s.child("shelf"), shelf);
  else s.raw("shelf");
  Pose camera = Pose::identity();
  if (s.has("camera_start")) camera = read_camera_start(s.child("camera_start"));
  else s.raw("camera_start");
  YAML::Node list = s.raw("scenes");
  s.finish();
  if (!list || !list.IsSequence() || list.size() == 0) {
    throw ConfigError("scenes", "expected a non-empty list of scenes");
  }
  sim::SceneSet set;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string path = fmt::format("scenes[{}]", i);
    Section sc(list[i], path);
    std::string category;
    sc.read("category", category);
    if (category.empty()) throw ConfigError(path + ".category", "required");
    auto objects = read_objects(sc.raw("objects"), path + ".objects");
    sc.finish();
    if (objects.empty()) throw ConfigError(path + ".objects", "expected at least one object");
    sim::Scene scene = build_scene(shelf, std::nullopt, objects, "", camera, path);
    scene.validate();
    set.categories.push_back(category);
    set.scenes.push_back(std::move(scene));
  }
  return set;
}

sim::SceneSet load_scene_set(const std::filesystem::path& path) { return parse_scene_set(read_file(path)); }

std::string reference_scene_set_yaml() {
  std::ostringstream os;
  os << "# Everyday-object scene set for frame-level detection sweeps: five\n"
        "# categories of five items, each category on its own shelf.\n\n";
  emit_shelf(os, sim::ShelfGrid{}, "");
  os << "camera_start:\n  position: [0, 0, 0]\n  yaw_deg: 0\n  pitch_deg: 0\n\nscenes:\n";
  for (const auto& sc : default_set_scenes()) {
    os << "  - category: " << quoted(sc.category) << "\n    objects:\n";
    for (std::size_t i = 0; i < sc.items.size(); ++i) {
      const auto& [label, he] = sc.items[i];
      os << "      - {id: " << slug(label) << ", label: " << quoted(label) << ", half_extents: " << vec(he)
         << ", slot: " << sc.slots[i] << "}\n";
    }
  }
  return os.str();
}

sim::SceneSet default_scene_set() { return parse_scene_set(reference_scene_set_yaml()); }

}  // namespace navisense::config
