#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "thermocal/problem.hpp"

namespace thermocal {

/// Additive Gaussian measurement noise.
struct NoiseSpec {
  double sigma = 1.0;  // K
  std::uint64_t seed = 0;
};

/// Measured or synthetic temperatures, one row per (operating point, repetition),
/// one column per sensor. Rows are grouped by operating point in input order.
struct SampleSet {
  std::vector<std::string> sensor_ids;
  std::vector<std::string> op_ids;  // per row
  Eigen::MatrixXd values;           // K

  // provenance
  std::uint64_t seed = 0;
  double sigma = 0.0;
  std::map<std::string, double> theta_true;  // empty unless synthetic
  std::uint64_t mesh_hash = 0;

  int rows() const { return static_cast<int>(values.rows()); }
  int sensor_count() const { return static_cast<int>(values.cols()); }
};

// Counter-based noise stream: the draw for (op, sample, sensor) depends only on
// the seed and those indices, never on generation order. Any subset of a sample
// set is therefore bit-reproducible.
std::uint64_t counter_mix(std::uint64_t x);
double counter_gaussian(std::uint64_t seed, std::uint64_t op, std::uint64_t sample,
                        std::uint64_t sensor);

/// N perturbed repetitions per operating point, measured at explicit sensors.
SampleSet generate(const std::vector<TemperatureField>& fields,
                   const std::vector<std::string>& op_ids, const SensorSet& sensors,
                   const NoiseSpec& noise, int n_per_op);

/// Same with every mesh node as a measurement target (full-field data).
SampleSet generate_full_field(const std::vector<TemperatureField>& fields,
                              const std::vector<std::string>& op_ids, const NoiseSpec& noise,
                              int n_per_op);

/// Disjoint, exhaustive partition, stratified by operating point: each op
/// contributes round(fraction * n_op) rows to the calibration half.
std::pair<SampleSet, SampleSet> split(const SampleSet& samples, double calibration_fraction,
                                      std::uint64_t seed);

/// CSV rows `sample_id,op_id,sensor_id,temperature_K` plus a provenance sidecar JSON.
void write_samples(const SampleSet& samples, const std::string& csv_path,
                   const std::string& sidecar_json_path);
SampleSet read_samples(const std::string& csv_path, const std::string& sidecar_json_path);

}  // namespace thermocal
