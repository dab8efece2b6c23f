#pragma once

#include <filesystem>
#include <string>

#include "navisense/sim.hpp"

namespace navisense::config {

/// Loads a YAML run configuration. Unknown keys are rejected; every error
/// is a ConfigError naming the dotted key path.
sim::SimConfig load_sim_config(const std::filesystem::path& path);
sim::SimConfig parse_sim_config(const std::string& yaml_text);

/// Built-in shelf setup: eight grocery and household products on four rows.
sim::SimConfig default_sim_config();

/// Reference YAML with every default spelled out.
std::string reference_config_yaml();

sim::SceneSet load_scene_set(const std::filesystem::path& path);
sim::SceneSet parse_scene_set(const std::string& yaml_text);

/// Everyday-object set: five categories of five items each.
sim::SceneSet default_scene_set();
std::string reference_scene_set_yaml();

}  // namespace navisense::config
