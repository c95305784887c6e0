#include "thermocal/report.hpp"

#include <cmath>
#include <sstream>

#include "thermocal/errors.hpp"
#include "thermocal/io_util.hpp"

namespace thermocal {

nlohmann::json report_json(const CalibrationResult& result, const ParameterSpec& params,
                           const ReportContext& ctx) {
  if (result.names.size() != params.slots.size()) {
    throw ConfigError("report: result/parameter spec size mismatch");
  }
  nlohmann::json j;
  j["version"] = kVersion;
  j["kind"] = "calibration_report";
  j["temperature_scale"] = ctx.temperature_scale;

  nlohmann::json plist = nlohmann::json::array();
  for (std::size_t i = 0; i < params.slots.size(); ++i) {
    const ParameterSlot& s = params.slots[i];
    nlohmann::json p;
    p["name"] = result.names[i];
    p["value"] = result.theta[static_cast<Eigen::Index>(i)];
    p["initial"] = s.initial;
    p["lower"] = s.lower;
    p["upper"] = s.upper;
    p["scale"] = s.scale == ParamScale::Log10 ? "log10" : "linear";
    if (s.truth > 0.0) {
      p["truth"] = s.truth;
      p["rel_error"] =
          std::abs(result.theta[static_cast<Eigen::Index>(i)] - s.truth) / std::abs(s.truth);
    }
    plist.push_back(std::move(p));
  }
  j["parameters"] = std::move(plist);

  j["cost"] = {{"final", result.cost}, {"trace", result.trace}};
  j["termination"] = opt::to_string(result.status);
  j["message"] = result.message;
  j["iterations"] = result.iterations;
  j["evaluations"] = result.evaluations;
  j["fd_bound_warnings"] = result.fd_bound_warnings;
  j["wall_time_s"] = result.wall_time_s;
  j["seeds"] = {{"noise", ctx.noise_seed}};
  j["sigma"] = ctx.sigma;
  j["mesh_hash"] = ctx.mesh_hash;
  return j;
}

void emit_report(const CalibrationResult& result, const ParameterSpec& params,
                 const ReportContext& ctx, const std::string& path) {
  write_file_atomic(path, report_json(result, params, ctx).dump(2) + "\n");
}

std::vector<std::pair<std::string, double>> read_report_theta(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("report '" + path + "': " + e.what());
  }
  if (!j.contains("parameters") || !j["parameters"].is_array()) {
    throw IoError("report '" + path + "': missing 'parameters' array");
  }
  std::vector<std::pair<std::string, double>> out;
  for (const auto& p : j["parameters"]) {
    if (!p.contains("name") || !p.contains("value")) {
      throw IoError("report '" + path + "': parameter entry without name/value");
    }
    out.emplace_back(p["name"].get<std::string>(), p["value"].get<double>());
  }
  if (out.empty()) throw IoError("report '" + path + "': no parameters");
  return out;
}

namespace {

void require_nonempty(const StudyRecord& record) {
  if (record.n_list.empty() || record.param_names.empty()) {
    throw ConfigError("study '" + record.study_id + "': no replications configured");
  }
  std::size_t completed = 0;
  for (std::size_t ni = 0; ni < record.n_list.size(); ++ni) {
    completed += static_cast<std::size_t>(record.completed_seeds(static_cast<int>(ni)));
  }
  if (completed == 0) {
    throw ConfigError("study '" + record.study_id + "': every replication failed");
  }
}

}  // namespace

void emit_study_csv(const StudyRecord& record, const std::string& path) {
  require_nonempty(record);
  std::string out = "N,parameter,mean_rel_error,std_rel_error,n_seeds\n";
  for (std::size_t ni = 0; ni < record.n_list.size(); ++ni) {
    const int seeds = record.completed_seeds(static_cast<int>(ni));
    for (std::size_t pi = 0; pi < record.param_names.size(); ++pi) {
      out += std::to_string(record.n_list[ni]);
      out += ',';
      out += record.param_names[pi];
      out += ',';
      out += format_shortest(record.mean_error(static_cast<int>(ni), static_cast<int>(pi)));
      out += ',';
      out += format_shortest(record.std_error(static_cast<int>(ni), static_cast<int>(pi)));
      out += ',';
      out += std::to_string(seeds);
      out += '\n';
    }
  }
  write_file_atomic(path, out);
}

void emit_study_gnuplot(const StudyRecord& record, const std::string& csv_filename,
                        const std::string& path) {
  require_nonempty(record);
  std::ostringstream s;
  s << "# gnuplot script, expects " << csv_filename << " next to it\n";
  s << "set terminal pngcairo size 960,720\n";
  s << "set output '" << record.study_id << ".png'\n";
  s << "set datafile separator ','\n";
  s << "set logscale xy\n";
  s << "set xlabel 'samples per operating point N'\n";
  s << "set ylabel 'mean relative error'\n";
  s << "set key top right\n";
  s << "set grid\n";
  s << "plot \\\n";
  for (std::size_t pi = 0; pi < record.param_names.size(); ++pi) {
    const std::string& name = record.param_names[pi];
    s << "  '" << csv_filename << "' skip 1 using 1:(strcol(2) eq '" << name
      << "' ? column(3) : NaN) with linespoints title '" << name << "'";
    s << ", \\\n";
  }
  // N^(-1/2) guide anchored at the first parameter's fitted intercept.
  double anchor = 1.0;
  if (!record.param_names.empty()) {
    auto it = record.slopes.find(record.param_names.front());
    if (it != record.slopes.end() && std::isfinite(it->second.intercept)) {
      anchor = std::pow(10.0, it->second.intercept);
    }
  }
  s << "  " << format_shortest(anchor) << " * x**(-0.5) with lines dashtype 2 lc 'gray'"
    << " title 'N^{-1/2}'\n";
  write_file_atomic(path, s.str());
}

nlohmann::json study_json(const StudyRecord& record) {
  require_nonempty(record);
  nlohmann::json j;
  j["version"] = kVersion;
  j["kind"] = "study_report";
  j["study_id"] = record.study_id;
  j["example_id"] = record.example_id;
  j["n_list"] = record.n_list;
  j["seeds_per_n"] = record.seeds_per_n;
  j["parameters"] = record.param_names;
  j["failures"] = record.failures;

  nlohmann::json table = nlohmann::json::array();
  for (std::size_t ni = 0; ni < record.n_list.size(); ++ni) {
    nlohmann::json row;
    row["N"] = record.n_list[ni];
    row["n_seeds"] = record.completed_seeds(static_cast<int>(ni));
    nlohmann::json mean, stdev;
    for (std::size_t pi = 0; pi < record.param_names.size(); ++pi) {
      // NaN (all seeds failed) serializes as null.
      mean[record.param_names[pi]] = record.mean_error(static_cast<int>(ni), static_cast<int>(pi));
      stdev[record.param_names[pi]] = record.std_error(static_cast<int>(ni), static_cast<int>(pi));
    }
    row["mean_rel_error"] = std::move(mean);
    row["std_rel_error"] = std::move(stdev);
    table.push_back(std::move(row));
  }
  j["table"] = std::move(table);

  nlohmann::json slopes;
  for (const auto& [name, fit] : record.slopes) {
    slopes[name] = {{"slope", fit.slope},
                    {"intercept", fit.intercept},
                    {"half_width", fit.half_width}};
  }
  j["slopes"] = std::move(slopes);
  return j;
}

void emit_study_json(const StudyRecord& record, const std::string& path) {
  write_file_atomic(path, study_json(record).dump(2) + "\n");
}

nlohmann::json validation_json(const ValidationReport& report) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["kind"] = "validation_report";
  j["temperature_scale"] = report.temperature_scale;
  nlohmann::json per;
  for (std::size_t i = 0; i < report.sensor_ids.size(); ++i) {
    per[report.sensor_ids[i]] = report.per_sensor_mean[i];
  }
  j["per_sensor_mean_rel_error"] = std::move(per);
  j["overall_mean_rel_error"] = report.overall_mean;
  return j;
}

void emit_validation_json(const ValidationReport& report, const std::string& path) {
  write_file_atomic(path, validation_json(report).dump(2) + "\n");
}

}  // namespace thermocal
