#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "radwave/evolve.hpp"
#include "radwave/radial_core.hpp"

namespace radwave::experiment {

using Json = nlohmann::ordered_json;

struct RegionSpec {
  std::string type;  // rectangle, triangle, parallelogram, trapezoid
  Polygon polygon;
};

struct AnnulusProbe {
  double c = 0.5;
  double beta = 0.4;
};

struct Theorem2Probe {
  double R = 0.0;
  double beta = 0.0;
  double kappa = 0.0;
};

struct ScatteringSettings {
  double horizon = 0.0;  // 0: t_end
  double decay_lo = 0.2;
  double decay_hi = 20.0;
  double exterior_label = 0.0;
  std::vector<double> exterior_times;  // empty: {horizon/4, horizon/2, horizon} rounded to the lattice
  std::size_t appendix_windows = 10;
  std::uint32_t appendix_seed = 12345;
  std::optional<double> min_scattered_ratio;
};

struct OutputSettings {
  std::string directory = "out";
  std::size_t stride = 0;  // steps between persisted snapshots; 0: initial and final only
  bool csv = true;
  bool json = true;
};

struct ConvergenceSettings {
  std::vector<double> levels;
  double reference_dr = 0.0;
  std::vector<double> checkpoints;
  double min_order = 1.9;
};

struct ScenarioConfig {
  std::string name;
  ModelParams params;
  GridSpec grid;
  RadialProfile profile;
  std::vector<TraceRequest> traces;
  std::vector<AnnulusProbe> annulus;
  std::vector<double> morawetz_radii;
  std::vector<Theorem2Probe> theorem2;
  std::vector<RegionSpec> regions;
  ScatteringSettings scattering;
  OutputSettings output;
  ConvergenceSettings convergence;
  Json source;  // the document as loaded, echoed into reports
};

// Parses and validates a scenario; every failure is a ConfigError naming the field.
ScenarioConfig parse_config(const Json& doc);
ScenarioConfig parse_config_text(const std::string& text);
ScenarioConfig load_config(const std::string& path);

double scattering_horizon(const ScenarioConfig& config);
std::vector<double> exterior_times(const ScenarioConfig& config);

}  // namespace radwave::experiment
