#pragma once

#include <cstdint>
#include <string>

#include "thermocal/config.hpp"
#include "thermocal/report.hpp"

namespace thermocal {

/// Options shared by every pipeline entry point; CLI flags and the python
/// bindings both land here.
struct RunOptions {
  std::string config_path;
  std::string out_dir;  // empty = the config's output.dir
  std::uint64_t seed = 0;
  bool seed_given = false;  // --seed overrides the config's noise seed
  int samples = 0;          // > 0 overrides noise.samples_per_op
  int threads = 0;          // 0 = THERMOCAL_THREADS or hardware cores
  bool quiet = false;
  bool timing = false;      // fill wall_time_s (off by default: byte-determinism)
  std::string data_path;    // samples CSV for calibrate/validate
  std::string report_path;  // calibration report JSON for validate
};

/// load_config + CLI overrides + build_scenario.
Scenario load_scenario(const RunOptions& opt);

/// `mesh`: build the mesh, export MSH plus a JSON summary.
void run_mesh(const RunOptions& opt);

/// `forward`: solve every operating point at the ground truth when all slots
/// have one (else at the initial guess); export fields and sensor readings.
void run_forward(const RunOptions& opt);

/// `synth`: write a synthetic sample set (CSV + provenance sidecar).
void run_synth(const RunOptions& opt);

/// `calibrate`: fit parameters against --data samples or freshly synthesized
/// statistics; write the calibration report (plus holdout validation when the
/// config requests a split).
CalibrationResult run_calibrate(const RunOptions& opt);

/// `validate`: mean relative mismatch of a calibrated model (--report) against
/// a validation sample set (--data).
ValidationReport run_validate(const RunOptions& opt);

/// `study`: Monte-Carlo convergence study; CSV + gnuplot script + JSON.
StudyRecord run_study(const RunOptions& opt);

}  // namespace thermocal
