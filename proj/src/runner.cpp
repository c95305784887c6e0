#include "thermocal/runner.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>

#include "thermocal/errors.hpp"
#include "thermocal/field_io.hpp"
#include "thermocal/io_util.hpp"
#include "thermocal/msh_io.hpp"
#include "thermocal/parallel.hpp"

namespace thermocal {

namespace {

namespace fs = std::filesystem;

void info(const RunOptions& opt, const std::string& line) {
  if (!opt.quiet) std::cout << line << "\n";
}

std::string out_path(const Scenario& sc, const std::string& suffix) {
  return (fs::path(sc.output.dir) / (sc.id + suffix)).string();
}

std::string sidecar_of(const std::string& csv_path) {
  fs::path p(csv_path);
  p.replace_extension(".json");
  return p.string();
}

bool all_truths(const ParameterSpec& p) {
  if (p.slots.empty()) return false;
  return std::all_of(p.slots.begin(), p.slots.end(),
                     [](const ParameterSlot& s) { return s.truth > 0.0; });
}

Eigen::VectorXd require_truth(const ParameterSpec& p, const char* verb) {
  if (!all_truths(p)) {
    throw ConfigError(std::string(verb) +
                      " needs a 'truth' value on every parameter slot (synthetic ground truth)");
  }
  return p.truth_physical();
}

/// Ground truth when fully specified, otherwise the initial guess.
Eigen::VectorXd forward_theta(const ParameterSpec& p, bool* used_truth) {
  const bool truth = all_truths(p);
  if (used_truth) *used_truth = truth;
  if (p.slots.empty()) return Eigen::VectorXd();
  return truth ? p.truth_physical() : p.initial_physical();
}

std::map<std::string, double> truth_map(const ParameterSpec& p) {
  std::map<std::string, double> m;
  for (const ParameterSlot& s : p.slots) m[s.name] = s.truth;
  return m;
}

/// Exact (noise-free) measurement vectors, one per operating point.
std::vector<Eigen::VectorXd> exact_measurements(const Scenario& sc,
                                                const Eigen::VectorXd& theta) {
  std::vector<TemperatureField> fields = sc.family.solve_all(theta);
  std::vector<Eigen::VectorXd> exact(fields.size());
  for (std::size_t o = 0; o < fields.size(); ++o) {
    exact[o] = sc.sensors.all_nodes ? fields[o].u : evaluate(fields[o], sc.sensors.list);
  }
  return exact;
}

SampleSet generate_samples(const Scenario& sc, const Eigen::VectorXd& truth, int n_per_op) {
  std::vector<TemperatureField> fields = sc.family.solve_all(truth);
  SampleSet samples =
      sc.sensors.all_nodes
          ? generate_full_field(fields, sc.family.op_ids(), sc.noise_spec(), n_per_op)
          : generate(fields, sc.family.op_ids(), sc.sensors.list, sc.noise_spec(), n_per_op);
  samples.theta_true = truth_map(sc.family.params);
  return samples;
}

void check_mesh_hash(const Scenario& sc, const SampleSet& samples, const std::string& path) {
  if (samples.mesh_hash != 0 && samples.mesh_hash != sc.mesh->content_hash()) {
    throw ConfigError("samples '" + path + "' were generated on a different mesh");
  }
}

std::string summarize(const CalibrationResult& res, const ParameterSpec& params) {
  std::string line;
  for (std::size_t i = 0; i < res.names.size(); ++i) {
    line += res.names[i] + " = " + format_shortest(res.theta[static_cast<Eigen::Index>(i)]);
    if (params.slots[i].truth > 0.0) {
      line += " (rel err " +
              format_shortest(relative_error(res.theta[static_cast<Eigen::Index>(i)],
                                             params.slots[i].truth)) +
              ")";
    }
    line += "\n";
  }
  return line;
}

}  // namespace

Scenario load_scenario(const RunOptions& opt) {
  if (opt.config_path.empty()) throw ConfigError("no --config given");
  RunConfig config = load_config(opt.config_path);
  const std::string base_dir = fs::path(opt.config_path).parent_path().string();
  Scenario sc = build_scenario(config, base_dir.empty() ? "." : base_dir);
  if (opt.seed_given) sc.noise.seed = opt.seed;
  if (opt.samples > 0) sc.noise.samples_per_op = opt.samples;
  if (opt.threads > 0) sc.optimizer.threads = opt.threads;
  if (!opt.out_dir.empty()) sc.output.dir = opt.out_dir;
  return sc;
}

void run_mesh(const RunOptions& opt) {
  Scenario sc = load_scenario(opt);
  const Mesh& mesh = *sc.mesh;

  const std::string msh = out_path(sc, "_mesh.msh");
  export_msh(mesh, msh);

  nlohmann::json j;
  j["nodes"] = mesh.node_count();
  j["triangles"] = mesh.triangle_count();
  j["total_area"] = mesh.total_area();
  nlohmann::json areas;
  for (int tag : mesh.region_tags()) areas[std::to_string(tag)] = mesh.region_area(tag);
  j["region_area"] = std::move(areas);
  j["boundary_tags"] = mesh.boundary_tags();
  j["mesh_hash"] = mesh.content_hash();
  const std::string summary = out_path(sc, "_mesh.json");
  write_file_atomic(summary, j.dump(2) + "\n");

  info(opt, "mesh: " + std::to_string(mesh.node_count()) + " nodes, " +
                std::to_string(mesh.triangle_count()) + " triangles -> " + msh);
}

void run_forward(const RunOptions& opt) {
  Scenario sc = load_scenario(opt);
  bool used_truth = false;
  const Eigen::VectorXd theta = forward_theta(sc.family.params, &used_truth);
  if (!sc.family.params.slots.empty()) {
    info(opt, std::string("forward: using ") + (used_truth ? "ground-truth" : "initial") +
                  " parameter values");
  }

  std::vector<TemperatureField> fields = sc.family.solve_all(theta);
  const std::vector<std::string> op_ids = sc.family.op_ids();
  for (std::size_t o = 0; o < fields.size(); ++o) {
    if (sc.output.vtk) write_field_vtk(fields[o], out_path(sc, "_" + op_ids[o] + ".vtk"));
    if (sc.output.csv) write_field_csv(fields[o], out_path(sc, "_" + op_ids[o] + ".csv"));
    info(opt, "forward: " + op_ids[o] + " T in [" + format_shortest(fields[o].u.minCoeff()) +
                  ", " + format_shortest(fields[o].u.maxCoeff()) + "] K");
  }

  if (!sc.sensors.all_nodes) {
    std::string csv = "op_id,sensor_id,x,y,temperature_K\n";
    for (std::size_t o = 0; o < fields.size(); ++o) {
      Eigen::VectorXd values = evaluate(fields[o], sc.sensors.list);
      for (int s = 0; s < sc.sensors.list.size(); ++s) {
        csv += op_ids[o] + "," + sc.sensors.list.ids[s] + "," +
               format_shortest(sc.sensors.list.positions[s].x()) + "," +
               format_shortest(sc.sensors.list.positions[s].y()) + "," +
               format_shortest(values[s]) + "\n";
      }
    }
    write_file_atomic(out_path(sc, "_sensors.csv"), csv);
  }
}

void run_synth(const RunOptions& opt) {
  Scenario sc = load_scenario(opt);
  const Eigen::VectorXd truth = require_truth(sc.family.params, "synth");
  SampleSet samples = generate_samples(sc, truth, sc.noise.samples_per_op);
  const std::string csv = out_path(sc, "_samples.csv");
  write_samples(samples, csv, sidecar_of(csv));
  info(opt, "synth: " + std::to_string(samples.rows()) + " rows x " +
                std::to_string(samples.sensor_count()) + " sensors -> " + csv);
}

CalibrationResult run_calibrate(const RunOptions& opt) {
  Scenario sc = load_scenario(opt);
  const SensorSet* sensors = sc.sensor_set();

  SampleStats stats;
  std::optional<SampleSet> holdout;
  if (!opt.data_path.empty()) {
    SampleSet data = read_samples(opt.data_path, sidecar_of(opt.data_path));
    check_mesh_hash(sc, data, opt.data_path);
    if (sc.split.present) {
      auto [cal, val] = split(data, sc.split.calibration_fraction, sc.split.seed);
      stats = compute_stats(cal, sc.family.op_ids());
      holdout = std::move(val);
    } else {
      stats = compute_stats(data, sc.family.op_ids());
    }
  } else {
    const Eigen::VectorXd truth = require_truth(sc.family.params, "calibrate without --data");
    const int n = sc.noise.samples_per_op;
    if (sc.split.present) {
      SampleSet data = generate_samples(sc, truth, n);
      auto [cal, val] = split(data, sc.split.calibration_fraction, sc.split.seed);
      stats = compute_stats(cal, sc.family.op_ids());
      holdout = std::move(val);
    } else {
      stats = synth_stats(exact_measurements(sc, truth), sc.family.op_ids(), sc.noise_spec(), n);
    }
  }

  CostModel model(sc.family, stats, sensors);
  const auto t0 = std::chrono::steady_clock::now();
  CalibrationResult result = calibrate(model, sc.optimizer);
  if (opt.timing) {
    result.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }

  ReportContext ctx;
  ctx.noise_seed = sc.noise.seed;
  ctx.sigma = sc.noise.sigma;
  ctx.mesh_hash = sc.mesh->content_hash();
  const std::string report = out_path(sc, "_report.json");
  emit_report(result, sc.family.params, ctx, report);

  info(opt, "calibrate: " + result.message + " after " + std::to_string(result.iterations) +
                " iterations, cost " + format_shortest(result.cost));
  if (!opt.quiet) std::cout << summarize(result, sc.family.params);
  info(opt, "calibrate: report -> " + report);

  if (holdout) {
    ValidationReport vr = validate(sc.family, result.theta, *holdout, sensors);
    const std::string vpath = out_path(sc, "_validation.json");
    emit_validation_json(vr, vpath);
    info(opt, "calibrate: holdout mean relative error " + format_shortest(vr.overall_mean) +
                  " -> " + vpath);
  }
  return result;
}

ValidationReport run_validate(const RunOptions& opt) {
  Scenario sc = load_scenario(opt);
  if (opt.data_path.empty()) throw ConfigError("validate needs --data samples");
  if (opt.report_path.empty()) throw ConfigError("validate needs --report from a calibration");

  SampleSet data = read_samples(opt.data_path, sidecar_of(opt.data_path));
  check_mesh_hash(sc, data, opt.data_path);

  const std::vector<std::pair<std::string, double>> reported = read_report_theta(opt.report_path);
  const std::vector<std::string> names = sc.family.params.names();
  Eigen::VectorXd theta(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    auto it = std::find_if(reported.begin(), reported.end(),
                           [&](const auto& p) { return p.first == names[i]; });
    if (it == reported.end()) {
      throw ConfigError("report '" + opt.report_path + "' has no value for parameter '" +
                        names[i] + "'");
    }
    theta[static_cast<Eigen::Index>(i)] = it->second;
  }

  ValidationReport vr = validate(sc.family, theta, data, sc.sensor_set());
  const std::string vpath = out_path(sc, "_validation.json");
  emit_validation_json(vr, vpath);
  info(opt, "validate: overall mean relative error " + format_shortest(vr.overall_mean) +
                " -> " + vpath);
  return vr;
}

StudyRecord run_study(const RunOptions& opt) {
  Scenario sc = load_scenario(opt);
  const Eigen::VectorXd truth = require_truth(sc.family.params, "study");

  StudySpec spec;
  spec.n_list = sc.study.n_list;
  spec.seeds_per_n = sc.study.seeds_per_n;
  spec.noise = sc.noise_spec();
  spec.exclude_n1_from_fit = sc.study.exclude_n1_from_fit;
  spec.threads = opt.threads;

  StudyRecord record =
      convergence_study(sc.family, truth, sc.sensor_set(), spec, sc.optimizer, sc.id);

  const std::string csv = out_path(sc, "_study.csv");
  emit_study_csv(record, csv);
  emit_study_gnuplot(record, fs::path(csv).filename().string(), out_path(sc, "_study.gp"));
  emit_study_json(record, out_path(sc, "_study.json"));

  for (const auto& [name, fit] : record.slopes) {
    info(opt, "study: " + name + " slope " + format_shortest(fit.slope) + " +/- " +
                  format_shortest(fit.half_width));
  }
  if (record.failures > 0) {
    info(opt, "study: " + std::to_string(record.failures) + " replications failed");
  }
  info(opt, "study: results -> " + csv);
  return record;
}

}  // namespace thermocal
