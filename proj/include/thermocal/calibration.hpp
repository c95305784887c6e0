#pragma once

#include <Eigen/Core>
#include <atomic>
#include <string>
#include <vector>

#include "thermocal/lbfgsb.hpp"
#include "thermocal/solve.hpp"
#include "thermocal/synthetic.hpp"

namespace thermocal {

enum class ParamScale { Linear, Log10 };
enum class ParamTarget { RegionLambda, BoundaryH };

/// One unknown of the inverse problem: a conductivity shared by one or more
/// region tags, or a Robin coefficient on boundary tags.
struct ParameterSlot {
  std::string name;
  ParamTarget target = ParamTarget::RegionLambda;
  std::vector<int> tags;  // all receive the same value (supports tied regions)
  double lower = 1e-3;
  double upper = 1e3;
  double initial = 1.0;
  double truth = 0.0;  // ground truth for synthetic studies; 0 = unknown
  ParamScale scale = ParamScale::Log10;
};

struct ParameterSpec {
  std::vector<ParameterSlot> slots;

  int size() const { return static_cast<int>(slots.size()); }
  void validate() const;  // bounds ordered, initial feasible, log10 needs positive bounds

  // Optimizer coordinates: z = theta (linear) or log10(theta) per slot.
  Eigen::VectorXd to_optimizer(const Eigen::VectorXd& physical) const;
  Eigen::VectorXd to_physical(const Eigen::VectorXd& z) const;
  Eigen::VectorXd initial_physical() const;
  Eigen::VectorXd truth_physical() const;  // throws if any slot lacks a truth value
  Eigen::VectorXd lower_bounds() const;
  Eigen::VectorXd upper_bounds() const;
  std::vector<std::string> names() const;
};

/// The parametrized forward problem: one mesh, a base spec, operating points,
/// and the parameter binding. Solving for a given theta factorizes the
/// stiffness matrix once and back-substitutes per operating point.
struct ProblemFamily {
  const Mesh* mesh = nullptr;
  ProblemSpec base;
  std::vector<OperatingPoint> ops;  // at least one
  std::vector<int> powered_regions;  // receive g = P/V per operating point
  std::vector<int> t0_dirichlet;     // Dirichlet tags tracking op T0
  std::vector<int> t0_robin;         // Robin tags whose ambient tracks op T0
  ParameterSpec params;
  SolveOptions solve_options;

  std::vector<std::string> op_ids() const;
  /// Base spec with theta substituted and one operating point applied.
  ProblemSpec instantiate(const Eigen::VectorXd& theta_physical, const OperatingPoint& op) const;
  /// Temperature fields for all operating points at one theta.
  std::vector<TemperatureField> solve_all(const Eigen::VectorXd& theta_physical) const;
};

/// Per-(operating point, sensor) sufficient statistics of a sample set:
/// count n_o, sensor means, and sums of squared deviations. The squared-misfit
/// cost J decomposes as sum_o [ n_o * |T_sim,o - mean_o|^2 + sum(sse_o) ],
/// identical to the row-wise double sum but independent of the row count.
struct SampleStats {
  std::vector<std::string> op_ids;  // per operating point, family order
  std::vector<double> count;
  std::vector<Eigen::VectorXd> mean;
  std::vector<Eigen::VectorXd> sse;
  double sq_sum = 0.0;  // sum of squared sample temperatures (for relative checks)
  long long rows = 0;
};

/// Stats from an in-memory sample set; rows are matched to family operating
/// points by op id. Throws ConfigError on unknown ids or missing coverage.
SampleStats compute_stats(const SampleSet& samples, const std::vector<std::string>& op_order);

/// Stats of synthetic noise draws without materializing the sample matrix:
/// exactly the statistics of generate(...) with the same noise spec and N.
SampleStats synth_stats(const std::vector<Eigen::VectorXd>& exact_per_op,
                        const std::vector<std::string>& op_ids, const NoiseSpec& noise,
                        int n_per_op);

struct OptimizerConfig {
  double tolerance = 1e-6;
  int max_iterations = 500;
  int memory_pairs = 10;
  double fd_rel_step = 1e-6;
  int threads = 0;  // 0 = auto
};

struct CalibrationResult {
  std::vector<std::string> names;
  Eigen::VectorXd theta;  // physical units
  double cost = 0.0;
  int iterations = 0;
  int evaluations = 0;
  opt::Termination status = opt::Termination::MaxIterations;
  std::vector<double> trace;                 // accepted costs, non-increasing
  std::vector<Eigen::VectorXd> theta_trace;  // accepted iterates, physical units
  int fd_bound_warnings = 0;
  double wall_time_s = 0.0;  // filled only when timing is requested
  std::string message;
};

/// Squared misfit between simulated sensor temperatures and the samples.
/// Measurement target: explicit sensors, or every node when `sensors` is null.
class CostModel {
 public:
  CostModel(const ProblemFamily& family, const SampleStats& stats, const SensorSet* sensors);

  double cost(const Eigen::VectorXd& theta_physical) const;
  double cost_scaled(const Eigen::VectorXd& z) const;
  /// Central finite differences in optimizer coordinates, step
  /// fd_rel_step * max(|z_k|, 1), shrunk at bounds (counted in fd_bound_warnings).
  Eigen::VectorXd gradient_scaled(const Eigen::VectorXd& z, double fd_rel_step,
                                  int threads) const;

  const ProblemFamily& family() const { return *family_; }
  int fd_bound_warnings() const { return fd_bound_warnings_.load(); }

 private:
  const ProblemFamily* family_;
  SampleStats stats_;  // owned copy: callers may pass a temporary
  std::vector<LocateResult> located_;  // empty for full-field targets
  bool full_field_;
  mutable std::atomic<int> fd_bound_warnings_{0};
};

/// Full inverse run: minimize the cost over the parameter box from the spec's
/// initial guess. Records accepted iterates and costs.
CalibrationResult calibrate(const CostModel& model, const OptimizerConfig& config);

/// |estimated - truth| / |truth|; throws ConfigError when truth is zero.
double relative_error(double estimated, double truth);

/// Per-sensor and overall mean relative temperature mismatch of a calibrated
/// model against a validation sample set, on the Kelvin scale of the samples.
struct ValidationReport {
  std::vector<std::string> sensor_ids;
  Eigen::VectorXd per_sensor_mean;  // mean over validation rows per sensor
  double overall_mean = 0.0;
  std::string temperature_scale = "kelvin";
};

ValidationReport validate(const ProblemFamily& family, const Eigen::VectorXd& theta_physical,
                          const SampleSet& validation, const SensorSet* sensors);

}  // namespace thermocal
