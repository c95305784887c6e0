#include "thermocal/study.hpp"

#include <atomic>
#include <cmath>
#include <limits>

#include "thermocal/errors.hpp"
#include "thermocal/parallel.hpp"

namespace thermocal {

SlopeFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 4) throw ConfigError("slope fit: need at least 4 points");
  const int n = static_cast<int>(points.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [N, eps] : points) {
    if (!(N > 0.0) || !(eps > 0.0))
      throw ConfigError("slope fit: points must be positive for the log-log fit");
    double x = std::log10(N), y = std::log10(eps);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double det = n * sxx - sx * sx;
  if (det == 0.0) throw ConfigError("slope fit: degenerate abscissae");
  SlopeFit fit;
  fit.slope = (n * sxy - sx * sy) / det;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss_res = 0.0;
  for (const auto& [N, eps] : points) {
    double r = std::log10(eps) - (fit.intercept + fit.slope * std::log10(N));
    ss_res += r * r;
  }
  double var = ss_res / (n - 2);
  fit.half_width = 2.0 * std::sqrt(var * n / det);
  return fit;
}

double StudyRecord::mean_error(int n_index, int param) const {
  double sum = 0.0;
  int cnt = 0;
  for (const std::vector<double>& seed_errors : errors[n_index]) {
    if (std::isnan(seed_errors[param])) continue;
    sum += seed_errors[param];
    ++cnt;
  }
  return cnt > 0 ? sum / cnt : std::numeric_limits<double>::quiet_NaN();
}

double StudyRecord::std_error(int n_index, int param) const {
  double mean = mean_error(n_index, param);
  if (std::isnan(mean)) return mean;
  double ss = 0.0;
  int cnt = 0;
  for (const std::vector<double>& seed_errors : errors[n_index]) {
    if (std::isnan(seed_errors[param])) continue;
    ss += (seed_errors[param] - mean) * (seed_errors[param] - mean);
    ++cnt;
  }
  return cnt > 1 ? std::sqrt(ss / (cnt - 1)) : 0.0;
}

int StudyRecord::completed_seeds(int n_index) const {
  int cnt = 0;
  for (const std::vector<double>& seed_errors : errors[n_index])
    if (!seed_errors.empty() && !std::isnan(seed_errors[0])) ++cnt;
  return cnt;
}

StudyRecord convergence_study(const ProblemFamily& family, const Eigen::VectorXd& theta_true,
                              const SensorSet* sensors, const StudySpec& study,
                              const OptimizerConfig& optimizer, const std::string& example_id) {
  if (study.n_list.empty()) throw ConfigError("study: empty N list");
  for (std::size_t i = 1; i < study.n_list.size(); ++i)
    if (study.n_list[i] <= study.n_list[i - 1])
      throw ConfigError("study: N list must be strictly increasing");
  if (study.seeds_per_n < 1) throw ConfigError("study: seeds per N must be >= 1");

  const int p = family.params.size();
  StudyRecord rec;
  rec.study_id = example_id.empty() ? "study" : example_id;
  rec.example_id = example_id;
  rec.param_names = family.params.names();
  rec.n_list = study.n_list;
  rec.seeds_per_n = study.seeds_per_n;
  rec.errors.assign(study.n_list.size(),
                    std::vector<std::vector<double>>(
                        study.seeds_per_n, std::vector<double>(p, std::numeric_limits<double>::quiet_NaN())));

  // Ground truth fields are shared by every replication.
  std::vector<TemperatureField> fields = family.solve_all(theta_true);
  std::vector<Eigen::VectorXd> exact;
  exact.reserve(fields.size());
  if (sensors) {
    std::vector<LocateResult> located;
    for (const Eigen::Vector2d& pos : sensors->positions) located.push_back(locate(*family.mesh, pos));
    for (const TemperatureField& f : fields) exact.push_back(evaluate(f, located));
  } else {
    for (const TemperatureField& f : fields) exact.push_back(f.u);
  }
  const std::vector<std::string> ids = family.op_ids();

  const int total = static_cast<int>(study.n_list.size()) * study.seeds_per_n;
  std::atomic<int> failures{0};

  // Replications are independent; each worker runs its own single-threaded
  // calibration so the study parallelism is the only level of concurrency.
  OptimizerConfig rep_optimizer = optimizer;
  rep_optimizer.threads = 1;

  parallel_for(total, study.threads, [&](int task) {
    int n_index = task / study.seeds_per_n;
    int rep = task % study.seeds_per_n;
    std::uint64_t rep_seed = counter_mix(
        counter_mix(study.noise.seed ^ 0xA5B35705u) ^
        ((static_cast<std::uint64_t>(n_index) << 32) | static_cast<std::uint64_t>(rep)));
    try {
      NoiseSpec noise{study.noise.sigma, rep_seed};
      SampleStats stats = synth_stats(exact, ids, noise, study.n_list[n_index]);
      CostModel model(family, stats, sensors);
      CalibrationResult result = calibrate(model, rep_optimizer);
      for (int k = 0; k < p; ++k)
        rec.errors[n_index][rep][k] = relative_error(result.theta[k], theta_true[k]);
    } catch (const std::exception&) {
      ++failures;  // recorded, study continues
    }
  });

  rec.failures = failures.load();

  // Slope fit on per-N mean errors, optionally excluding N = 1.
  for (int k = 0; k < p; ++k) {
    std::vector<std::pair<double, double>> points;
    for (std::size_t i = 0; i < study.n_list.size(); ++i) {
      if (study.exclude_n1_from_fit && study.n_list[i] == 1) continue;
      double m = rec.mean_error(static_cast<int>(i), k);
      if (!std::isnan(m) && m > 0.0) points.emplace_back(study.n_list[i], m);
    }
    if (points.size() >= 4) rec.slopes[rec.param_names[k]] = fit_loglog_slope(points);
  }
  return rec;
}

}  // namespace thermocal
