#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "pfloc/particle_filter.hpp"
#include "pfloc/simworld.hpp"
#include "pfloc/tracker.hpp"

namespace pfloc {

struct OutputOptions {
  bool dump_frames = false;
  int dump_stride = 1;
};

/// Declarative description of one experiment: the simulated world, the
/// filter and tracker settings, and the seed range.
struct ScenarioConfig {
  std::string name = "scenario";
  SimulationConfig sim;
  /// Camera attitude angles (degrees) behind sim.trajectory.camera_rotation.
  double roll_deg = 0.0;
  double pitch_deg = 0.0;
  double yaw_deg = 0.0;
  FilterParams filter;
  TrackerParams tracker;
  int n_seeds = 10;
  std::uint64_t base_seed = 1;
  std::pair<double, double> window{200.0, 1000.0};
  OutputOptions output;

  /// Throws ConfigError naming the first offending field.
  void validate() const;
};

/// Parses and validates. Missing sections take their defaults; unknown keys
/// and wrongly typed values raise ConfigError with the field path.
ScenarioConfig parse_config(const nlohmann::json& doc);
ScenarioConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ScenarioConfig& cfg);

}  // namespace pfloc
