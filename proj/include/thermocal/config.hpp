#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "thermocal/calibration.hpp"
#include "thermocal/geometry.hpp"
#include "thermocal/study.hpp"

namespace thermocal {

struct GeometryConfig {
  enum class Kind { Example1, Example2, MachineQuadrant, MshImport };
  Kind kind = Kind::Example1;
  // rectangle examples
  double width = 1.0;
  double height = 1.0;
  Eigen::Vector2d disk_center{0.5, 0.5};
  double disk_radius = 0.2;
  double annulus_outer_radius = 0.3;  // example2 only
  int resolution = 64;
  // machine quadrant
  MachineQuadrantSpec machine;
  // msh import
  std::string path;
};

struct BoundaryConfig {
  BcKind kind = BcKind::Neumann;
  double value_K = 293.15;  // Dirichlet temperature or Robin ambient
  double h = 0.0;           // Robin film coefficient [W/(m^2 K)]
  bool follows_t0 = false;  // temperature tracks the operating point's T0
};

struct SensorConfig {
  bool all_nodes = true;  // full-field measurement when no sensor list is given
  SensorSet list;
};

/// Copper volume for g = P/V when operating points give no explicit V_m3:
/// V = sum of powered region areas * stack length * symmetry factor.
struct VolumeConfig {
  bool automatic = false;
  double stack_length_m = 0.0;
  double symmetry_factor = 1.0;
};

struct NoiseConfig {
  double sigma = 1.0;  // K
  std::uint64_t seed = 0;
  int samples_per_op = 100;
};

struct SplitConfig {
  bool present = false;
  double calibration_fraction = 0.5;
  std::uint64_t seed = 1;
};

struct StudyConfig {
  std::vector<int> n_list{1, 10, 100, 1000};
  int seeds_per_n = 5;
  bool exclude_n1_from_fit = true;
};

struct OutputConfig {
  std::string dir = "out";
  bool vtk = true;
  bool csv = true;
};

/// Parsed, validated run configuration with defaults applied. Temperatures in
/// the file are degrees Celsius; everything here is Kelvin.
struct RunConfig {
  std::string id;
  GeometryConfig geometry;
  std::map<int, double> material_lambda;       // region tag -> baseline conductivity
  std::map<int, std::string> material_slots;   // region tag -> parameter slot name
  std::map<int, double> region_source;         // region tag -> baseline g [W/m^3]
  std::vector<int> powered_regions;            // receive g = P/V per operating point
  std::map<int, BoundaryConfig> boundaries;    // boundary tag -> condition
  SensorConfig sensors;
  std::vector<OperatingPoint> ops;
  VolumeConfig volume;
  NoiseConfig noise;
  ParameterSpec parameters;
  OptimizerConfig optimizer;
  StudyConfig study;
  SplitConfig split;
  OutputConfig output;
};

/// Strict parse: unknown keys are rejected with their JSON pointer path.
RunConfig parse_config(const nlohmann::json& j, const std::string& fallback_id);
/// Reads and parses a config file; missing file raises IoError with the path.
RunConfig load_config(const std::string& path);

/// A config bound to a concrete mesh: everything the pipeline needs.
struct Scenario {
  std::string id;
  std::shared_ptr<Mesh> mesh;
  ProblemFamily family;  // points at *mesh
  SensorConfig sensors;
  NoiseConfig noise;
  OptimizerConfig optimizer;
  StudyConfig study;
  SplitConfig split;
  OutputConfig output;

  const SensorSet* sensor_set() const { return sensors.all_nodes ? nullptr : &sensors.list; }
  NoiseSpec noise_spec() const { return {noise.sigma, noise.seed}; }
};

/// Builds the mesh, checks every cross-reference (tags, slots, sensors) and
/// assembles the problem family. Paths in the config resolve against base_dir.
Scenario build_scenario(const RunConfig& config, const std::string& base_dir = ".");

}  // namespace thermocal
