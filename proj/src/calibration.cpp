#include "thermocal/calibration.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "thermocal/errors.hpp"
#include "thermocal/parallel.hpp"

namespace thermocal {

void ParameterSpec::validate() const {
  // An empty spec is valid: forward-only problems have nothing to calibrate.
  std::vector<std::string> seen;
  for (const ParameterSlot& s : slots) {
    if (s.name.empty()) throw ConfigError("parameters: slot without a name");
    if (std::find(seen.begin(), seen.end(), s.name) != seen.end())
      throw ConfigError("parameters: duplicate slot name '" + s.name + "'");
    seen.push_back(s.name);
    if (!(s.lower < s.upper))
      throw ConfigError("parameters: slot '" + s.name + "' needs lower < upper");
    if (s.initial < s.lower || s.initial > s.upper)
      throw ConfigError("parameters: slot '" + s.name + "' initial guess outside bounds");
    if (s.scale == ParamScale::Log10 && !(s.lower > 0.0))
      throw ConfigError("parameters: slot '" + s.name + "' log10 scale requires positive bounds");
    if (s.tags.empty()) throw ConfigError("parameters: slot '" + s.name + "' binds no tags");
  }
}

Eigen::VectorXd ParameterSpec::to_optimizer(const Eigen::VectorXd& physical) const {
  Eigen::VectorXd z(size());
  for (int k = 0; k < size(); ++k)
    z[k] = slots[k].scale == ParamScale::Log10 ? std::log10(physical[k]) : physical[k];
  return z;
}

Eigen::VectorXd ParameterSpec::to_physical(const Eigen::VectorXd& z) const {
  Eigen::VectorXd theta(size());
  for (int k = 0; k < size(); ++k)
    theta[k] = slots[k].scale == ParamScale::Log10 ? std::pow(10.0, z[k]) : z[k];
  return theta;
}

Eigen::VectorXd ParameterSpec::initial_physical() const {
  Eigen::VectorXd theta(size());
  for (int k = 0; k < size(); ++k) theta[k] = slots[k].initial;
  return theta;
}

Eigen::VectorXd ParameterSpec::truth_physical() const {
  Eigen::VectorXd theta(size());
  for (int k = 0; k < size(); ++k) {
    if (slots[k].truth == 0.0)
      throw ConfigError("parameters: slot '" + slots[k].name + "' has no ground-truth value");
    theta[k] = slots[k].truth;
  }
  return theta;
}

Eigen::VectorXd ParameterSpec::lower_bounds() const {
  Eigen::VectorXd lo(size());
  for (int k = 0; k < size(); ++k) lo[k] = slots[k].lower;
  return lo;
}

Eigen::VectorXd ParameterSpec::upper_bounds() const {
  Eigen::VectorXd hi(size());
  for (int k = 0; k < size(); ++k) hi[k] = slots[k].upper;
  return hi;
}

std::vector<std::string> ParameterSpec::names() const {
  std::vector<std::string> out;
  out.reserve(slots.size());
  for (const ParameterSlot& s : slots) out.push_back(s.name);
  return out;
}

std::vector<std::string> ProblemFamily::op_ids() const {
  std::vector<std::string> ids;
  ids.reserve(ops.size());
  for (const OperatingPoint& op : ops) ids.push_back(op.id);
  return ids;
}

ProblemSpec ProblemFamily::instantiate(const Eigen::VectorXd& theta_physical,
                                       const OperatingPoint& op) const {
  if (theta_physical.size() != params.size())
    throw ConfigError("problem family: parameter vector size mismatch");
  ProblemSpec spec = base;
  for (int k = 0; k < params.size(); ++k) {
    const ParameterSlot& slot = params.slots[k];
    double v = theta_physical[k];
    for (int tag : slot.tags) {
      if (slot.target == ParamTarget::RegionLambda) {
        spec.region_lambda[tag] = v;
      } else {
        auto it = spec.boundary.find(tag);
        if (it == spec.boundary.end() || it->second.kind != BcKind::Robin)
          throw ConfigError("problem family: slot '" + slot.name +
                            "' targets a non-Robin boundary tag");
        it->second.h = v;
      }
    }
  }
  for (int tag : powered_regions) spec.region_source[tag] = op.source_density();
  for (int tag : t0_dirichlet) {
    auto it = spec.boundary.find(tag);
    if (it == spec.boundary.end() || it->second.kind != BcKind::Dirichlet)
      throw ConfigError("problem family: T0-tracking tag is not Dirichlet");
    it->second.value = op.T0_K;
  }
  for (int tag : t0_robin) {
    auto it = spec.boundary.find(tag);
    if (it == spec.boundary.end() || it->second.kind != BcKind::Robin)
      throw ConfigError("problem family: T0-tracking tag is not Robin");
    it->second.T_ref = op.T0_K;
  }
  return spec;
}

std::vector<TemperatureField> ProblemFamily::solve_all(
    const Eigen::VectorXd& theta_physical) const {
  if (ops.empty()) throw ConfigError("problem family: no operating points");
  // Conductivities and Robin coefficients are shared across operating points,
  // so one factorization serves every back-substitution.
  ConductionSolver solver(*mesh, instantiate(theta_physical, ops[0]), solve_options);
  std::vector<TemperatureField> fields;
  fields.reserve(ops.size());
  fields.push_back(solver.solve());
  for (std::size_t o = 1; o < ops.size(); ++o)
    fields.push_back(solver.solve(instantiate(theta_physical, ops[o])));
  return fields;
}

SampleStats compute_stats(const SampleSet& samples, const std::vector<std::string>& op_order) {
  std::map<std::string, int> op_index;
  for (std::size_t o = 0; o < op_order.size(); ++o) op_index[op_order[o]] = static_cast<int>(o);

  const int n_ops = static_cast<int>(op_order.size());
  const int m = samples.sensor_count();
  SampleStats st;
  st.op_ids = op_order;
  st.count.assign(n_ops, 0.0);
  st.mean.assign(n_ops, Eigen::VectorXd::Zero(m));
  st.sse.assign(n_ops, Eigen::VectorXd::Zero(m));
  st.rows = samples.rows();

  for (int r = 0; r < samples.rows(); ++r) {
    auto it = op_index.find(samples.op_ids[r]);
    if (it == op_index.end())
      throw ConfigError("samples: row references unknown operating point '" + samples.op_ids[r] +
                        "'");
    st.count[it->second] += 1.0;
    st.mean[it->second] += samples.values.row(r).transpose();
  }
  for (int o = 0; o < n_ops; ++o)
    if (st.count[o] > 0.0) st.mean[o] /= st.count[o];
  for (int r = 0; r < samples.rows(); ++r) {
    int o = op_index.at(samples.op_ids[r]);
    Eigen::VectorXd d = samples.values.row(r).transpose() - st.mean[o];
    st.sse[o] += d.cwiseProduct(d);
  }
  st.sq_sum = samples.values.squaredNorm();
  return st;
}

SampleStats synth_stats(const std::vector<Eigen::VectorXd>& exact_per_op,
                        const std::vector<std::string>& op_ids, const NoiseSpec& noise,
                        int n_per_op) {
  if (n_per_op < 1) throw ConfigError("synth_stats: sample count must be >= 1");
  if (exact_per_op.empty() || exact_per_op.size() != op_ids.size())
    throw ConfigError("synth_stats: need one exact vector per operating point");

  const int n_ops = static_cast<int>(exact_per_op.size());
  const Eigen::Index m = exact_per_op[0].size();
  SampleStats st;
  st.op_ids = op_ids;
  st.count.assign(n_ops, static_cast<double>(n_per_op));
  st.mean.assign(n_ops, Eigen::VectorXd::Zero(m));
  st.sse.assign(n_ops, Eigen::VectorXd::Zero(m));
  st.rows = static_cast<long long>(n_ops) * n_per_op;

  // Accumulate noise deviations around the exact values; identical draws to
  // generate(...) by the shared counter keying (op, sample, sensor).
  for (int o = 0; o < n_ops; ++o) {
    Eigen::VectorXd sum_d = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd sumsq_d = Eigen::VectorXd::Zero(m);
    if (noise.sigma > 0.0) {
      for (int s = 0; s < n_per_op; ++s) {
        for (Eigen::Index j = 0; j < m; ++j) {
          double d = noise.sigma * counter_gaussian(noise.seed, o, s, j);
          sum_d[j] += d;
          sumsq_d[j] += d * d;
        }
      }
    }
    st.mean[o] = exact_per_op[o] + sum_d / n_per_op;
    st.sse[o] = (sumsq_d - sum_d.cwiseProduct(sum_d) / n_per_op).cwiseMax(0.0);
    st.sq_sum += n_per_op * exact_per_op[o].squaredNorm() +
                 2.0 * exact_per_op[o].dot(sum_d) + sumsq_d.sum();
  }
  return st;
}

CostModel::CostModel(const ProblemFamily& family, const SampleStats& stats,
                     const SensorSet* sensors)
    : family_(&family), stats_(stats) {
  if (family.params.slots.empty()) throw ConfigError("cost: no parameter slots to calibrate");
  full_field_ = sensors == nullptr;
  const Eigen::Index m = stats.mean.empty() ? 0 : stats.mean[0].size();
  if (full_field_) {
    if (m != family.mesh->node_count())
      throw ConfigError("cost: full-field samples must cover every mesh node");
  } else {
    if (m != sensors->size())
      throw ConfigError("cost: sample sensor count does not match the sensor set");
    located_.reserve(sensors->positions.size());
    for (const Eigen::Vector2d& p : sensors->positions) located_.push_back(locate(*family.mesh, p));
  }
  if (stats.op_ids != family.op_ids())
    throw ConfigError("cost: sample operating points do not match the problem family");
}

double CostModel::cost(const Eigen::VectorXd& theta_physical) const {
  std::vector<TemperatureField> fields = family_->solve_all(theta_physical);
  double J = 0.0;
  for (std::size_t o = 0; o < fields.size(); ++o) {
    if (stats_.count[o] == 0.0) continue;
    Eigen::VectorXd sim = full_field_ ? fields[o].u : evaluate(fields[o], located_);
    J += stats_.count[o] * (sim - stats_.mean[o]).squaredNorm() + stats_.sse[o].sum();
  }
  return J;
}

double CostModel::cost_scaled(const Eigen::VectorXd& z) const {
  return cost(family_->params.to_physical(z));
}

Eigen::VectorXd CostModel::gradient_scaled(const Eigen::VectorXd& z, double fd_rel_step,
                                           int threads) const {
  const int p = static_cast<int>(z.size());
  const Eigen::VectorXd lo = family_->params.to_optimizer(family_->params.lower_bounds());
  const Eigen::VectorXd hi = family_->params.to_optimizer(family_->params.upper_bounds());

  struct Task {
    Eigen::VectorXd point;
    double value = 0.0;
  };
  std::vector<Task> tasks;
  std::vector<std::array<int, 2>> eval_of(p, {-1, -1});  // task index of +h / -h
  std::vector<std::array<double, 2>> steps(p, {0.0, 0.0});
  int base_task = -1;

  for (int k = 0; k < p; ++k) {
    double h = fd_rel_step * std::max(std::abs(z[k]), 1.0);
    double hp = std::min(h, hi[k] - z[k]);
    double hm = std::min(h, z[k] - lo[k]);
    if (hp < h || hm < h) ++fd_bound_warnings_;
    if (hp <= 0.0 && hm <= 0.0)
      throw NumericalError("gradient: no room for a finite-difference step inside the bounds");
    steps[k] = {hp, hm};
    if (hp > 0.0) {
      Eigen::VectorXd zp = z;
      zp[k] += hp;
      eval_of[k][0] = static_cast<int>(tasks.size());
      tasks.push_back({zp, 0.0});
    }
    if (hm > 0.0) {
      Eigen::VectorXd zm = z;
      zm[k] -= hm;
      eval_of[k][1] = static_cast<int>(tasks.size());
      tasks.push_back({zm, 0.0});
    }
    if ((hp <= 0.0 || hm <= 0.0) && base_task < 0) {
      base_task = static_cast<int>(tasks.size());
      tasks.push_back({z, 0.0});
    }
  }

  parallel_for(static_cast<int>(tasks.size()), threads,
               [&](int i) { tasks[i].value = cost_scaled(tasks[i].point); });

  Eigen::VectorXd grad(p);
  for (int k = 0; k < p; ++k) {
    auto [hp, hm] = steps[k];
    double fp = eval_of[k][0] >= 0 ? tasks[eval_of[k][0]].value : tasks[base_task].value;
    double fm = eval_of[k][1] >= 0 ? tasks[eval_of[k][1]].value : tasks[base_task].value;
    grad[k] = (fp - fm) / (hp + hm);
  }
  return grad;
}

CalibrationResult calibrate(const CostModel& model, const OptimizerConfig& config) {
  const ParameterSpec& params = model.family().params;
  params.validate();

  opt::Options opts;
  opts.tol = config.tolerance;
  opts.max_iter = config.max_iterations;
  opts.memory = config.memory_pairs;

  CalibrationResult result;
  result.names = params.names();
  opts.on_accept = [&](const Eigen::VectorXd& zx, double) {
    result.theta_trace.push_back(params.to_physical(zx));
  };

  int threads = resolve_threads(config.threads);
  auto objective = [&](const Eigen::VectorXd& zx, Eigen::VectorXd& grad) {
    grad = model.gradient_scaled(zx, config.fd_rel_step, threads);
    return model.cost_scaled(zx);
  };

  opt::Result r = opt::minimize(objective, params.to_optimizer(params.initial_physical()),
                                params.to_optimizer(params.lower_bounds()),
                                params.to_optimizer(params.upper_bounds()), opts);

  result.theta = params.to_physical(r.x);
  result.cost = r.f;
  result.iterations = r.iterations;
  result.evaluations = r.evaluations;
  result.status = r.status;
  result.trace = r.trace;
  result.fd_bound_warnings = model.fd_bound_warnings();
  result.message = r.message;
  return result;
}

double relative_error(double estimated, double truth) {
  if (truth == 0.0) throw ConfigError("relative_error: reference value is zero");
  return std::abs(estimated - truth) / std::abs(truth);
}

ValidationReport validate(const ProblemFamily& family, const Eigen::VectorXd& theta_physical,
                          const SampleSet& validation, const SensorSet* sensors) {
  if (validation.rows() == 0) throw ConfigError("validate: empty validation set");

  std::vector<TemperatureField> fields = family.solve_all(theta_physical);
  std::map<std::string, int> op_index;
  std::vector<std::string> ids = family.op_ids();
  for (std::size_t o = 0; o < ids.size(); ++o) op_index[ids[o]] = static_cast<int>(o);

  std::vector<Eigen::VectorXd> sim(fields.size());
  if (sensors) {
    if (validation.sensor_count() != sensors->size())
      throw ConfigError("validate: sample sensor count does not match the sensor set");
    std::vector<LocateResult> located;
    for (const Eigen::Vector2d& p : sensors->positions) located.push_back(locate(*family.mesh, p));
    for (std::size_t o = 0; o < fields.size(); ++o) sim[o] = evaluate(fields[o], located);
  } else {
    if (validation.sensor_count() != family.mesh->node_count())
      throw ConfigError("validate: full-field samples must cover every mesh node");
    for (std::size_t o = 0; o < fields.size(); ++o) sim[o] = fields[o].u;
  }

  ValidationReport report;
  report.sensor_ids = validation.sensor_ids;
  report.per_sensor_mean = Eigen::VectorXd::Zero(validation.sensor_count());
  double total = 0.0;
  for (int r = 0; r < validation.rows(); ++r) {
    auto it = op_index.find(validation.op_ids[r]);
    if (it == op_index.end())
      throw ConfigError("validate: row references unknown operating point '" +
                        validation.op_ids[r] + "'");
    for (int j = 0; j < validation.sensor_count(); ++j) {
      double measured = validation.values(r, j);
      if (measured == 0.0) throw ConfigError("validate: zero measured temperature");
      double e = std::abs(sim[it->second][j] - measured) / std::abs(measured);
      report.per_sensor_mean[j] += e;
      total += e;
    }
  }
  report.per_sensor_mean /= validation.rows();
  report.overall_mean = total / (static_cast<double>(validation.rows()) * validation.sensor_count());
  return report;
}

}  // namespace thermocal
