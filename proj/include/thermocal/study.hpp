#pragma once

#include <map>
#include <string>
#include <vector>

#include "thermocal/calibration.hpp"

namespace thermocal {

/// Least-squares fit of log10(eps) against log10(N).
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double half_width = 0.0;  // two standard errors of the slope
};

/// Fit over (N, eps) points; requires >= 4 positive points.
SlopeFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points);

struct StudySpec {
  std::vector<int> n_list;  // strictly increasing sample counts
  int seeds_per_n = 5;
  NoiseSpec noise;  // seed acts as the master seed of the study
  bool exclude_n1_from_fit = true;
  int threads = 0;
};

/// Raw and aggregated outcome of a Monte-Carlo convergence study.
struct StudyRecord {
  std::string study_id;
  std::string example_id;
  std::vector<std::string> param_names;
  std::vector<int> n_list;
  int seeds_per_n = 0;
  // errors[n_index][seed][param]; NaN marks a failed replication.
  std::vector<std::vector<std::vector<double>>> errors;
  int failures = 0;
  std::map<std::string, SlopeFit> slopes;  // fitted on per-N means

  double mean_error(int n_index, int param) const;
  double std_error(int n_index, int param) const;  // sample std over seeds
  int completed_seeds(int n_index) const;
};

/// For each N and seed: fresh synthetic data at theta_true, one calibration,
/// per-parameter relative errors. Replications run concurrently; the noise
/// seed of each is a pure function of (master seed, N index, seed index).
StudyRecord convergence_study(const ProblemFamily& family, const Eigen::VectorXd& theta_true,
                              const SensorSet* sensors, const StudySpec& study,
                              const OptimizerConfig& optimizer,
                              const std::string& example_id = "");

}  // namespace thermocal
