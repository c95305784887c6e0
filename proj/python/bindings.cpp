#include <optional>
#include <string>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "thermocal/errors.hpp"
#include "thermocal/runner.hpp"
#include "thermocal/synthetic.hpp"

namespace py = pybind11;
using namespace thermocal;

namespace {

RunOptions make_options(const std::string& config, const std::string& out,
                        std::optional<std::uint64_t> seed, int samples, int threads, bool quiet,
                        bool timing, const std::string& data, const std::string& report) {
  RunOptions opt;
  opt.config_path = config;
  opt.out_dir = out;
  if (seed) {
    opt.seed = *seed;
    opt.seed_given = true;
  }
  opt.samples = samples;
  opt.threads = threads;
  opt.quiet = quiet;
  opt.timing = timing;
  opt.data_path = data;
  opt.report_path = report;
  return opt;
}

py::dict to_dict(const CalibrationResult& r) {
  py::dict d;
  d["names"] = r.names;
  py::list theta;
  for (Eigen::Index i = 0; i < r.theta.size(); ++i) theta.append(r.theta[i]);
  d["theta"] = std::move(theta);
  d["cost"] = r.cost;
  d["iterations"] = r.iterations;
  d["evaluations"] = r.evaluations;
  d["status"] = opt::to_string(r.status);
  d["trace"] = r.trace;
  d["fd_bound_warnings"] = r.fd_bound_warnings;
  d["wall_time_s"] = r.wall_time_s;
  d["message"] = r.message;
  return d;
}

py::dict to_dict(const ValidationReport& r) {
  py::dict d;
  d["sensor_ids"] = r.sensor_ids;
  py::list per;
  for (Eigen::Index i = 0; i < r.per_sensor_mean.size(); ++i) per.append(r.per_sensor_mean[i]);
  d["per_sensor_mean"] = std::move(per);
  d["overall_mean"] = r.overall_mean;
  d["temperature_scale"] = r.temperature_scale;
  return d;
}

py::dict to_dict(const StudyRecord& r) {
  py::dict d;
  d["study_id"] = r.study_id;
  d["n_list"] = r.n_list;
  d["seeds_per_n"] = r.seeds_per_n;
  d["parameters"] = r.param_names;
  d["failures"] = r.failures;
  py::dict slopes;
  for (const auto& [name, fit] : r.slopes) {
    py::dict f;
    f["slope"] = fit.slope;
    f["intercept"] = fit.intercept;
    f["half_width"] = fit.half_width;
    slopes[py::str(name)] = std::move(f);
  }
  d["slopes"] = std::move(slopes);
  py::dict mean;
  for (std::size_t pi = 0; pi < r.param_names.size(); ++pi) {
    py::list per_n;
    for (std::size_t ni = 0; ni < r.n_list.size(); ++ni) {
      per_n.append(r.mean_error(static_cast<int>(ni), static_cast<int>(pi)));
    }
    mean[py::str(r.param_names[pi])] = std::move(per_n);
  }
  d["mean_rel_error"] = std::move(mean);
  return d;
}

py::dict mesh_info(const std::string& config) {
  RunOptions opt;
  opt.config_path = config;
  opt.quiet = true;
  Scenario sc = load_scenario(opt);
  py::dict d;
  d["nodes"] = sc.mesh->node_count();
  d["triangles"] = sc.mesh->triangle_count();
  d["total_area"] = sc.mesh->total_area();
  py::dict areas;
  for (int tag : sc.mesh->region_tags()) {
    areas[py::str(std::to_string(tag))] = sc.mesh->region_area(tag);
  }
  d["region_area"] = std::move(areas);
  d["boundary_tags"] = sc.mesh->boundary_tags();
  d["mesh_hash"] = sc.mesh->content_hash();
  return d;
}

}  // namespace

PYBIND11_MODULE(_thermocal, m) {
  m.doc() = "Steady-state 2D thermal models: forward solves, synthetic data, "
            "conductivity calibration and convergence studies";
  m.attr("__version__") = kVersion;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def("mesh_info", &mesh_info, py::arg("config"),
        "Mesh summary (node/triangle counts, region areas, content hash) for a config.");

  m.def(
      "run_mesh",
      [](const std::string& config, const std::string& out, bool quiet) {
        run_mesh(make_options(config, out, std::nullopt, 0, 0, quiet, false, "", ""));
      },
      py::arg("config"), py::arg("out") = "", py::arg("quiet") = true,
      py::call_guard<py::gil_scoped_release>(), "Build the configured mesh and export it.");

  m.def(
      "run_forward",
      [](const std::string& config, const std::string& out, bool quiet) {
        run_forward(make_options(config, out, std::nullopt, 0, 0, quiet, false, "", ""));
      },
      py::arg("config"), py::arg("out") = "", py::arg("quiet") = true,
      py::call_guard<py::gil_scoped_release>(),
      "Solve every operating point and export the temperature fields.");

  m.def(
      "run_synth",
      [](const std::string& config, const std::string& out, std::optional<std::uint64_t> seed,
         int samples, bool quiet) {
        run_synth(make_options(config, out, seed, samples, 0, quiet, false, "", ""));
      },
      py::arg("config"), py::arg("out") = "", py::arg("seed") = std::nullopt,
      py::arg("samples") = 0, py::arg("quiet") = true,
      py::call_guard<py::gil_scoped_release>(), "Generate a synthetic sample set.");

  // The run_* wrappers below build python dicts from their results, so the
  // GIL is released only around the C++ work, not the whole call.
  m.def(
      "run_calibrate",
      [](const std::string& config, const std::string& out, std::optional<std::uint64_t> seed,
         int samples, int threads, bool quiet, bool timing, const std::string& data) {
        CalibrationResult r;
        {
          py::gil_scoped_release release;
          r = run_calibrate(make_options(config, out, seed, samples, threads, quiet, timing, data, ""));
        }
        return to_dict(r);
      },
      py::arg("config"), py::arg("out") = "", py::arg("seed") = std::nullopt,
      py::arg("samples") = 0, py::arg("threads") = 0, py::arg("quiet") = true,
      py::arg("timing") = false, py::arg("data") = "",
      "Fit the configured parameters and write a calibration report.");

  m.def(
      "run_validate",
      [](const std::string& config, const std::string& data, const std::string& report,
         const std::string& out, bool quiet) {
        ValidationReport r;
        {
          py::gil_scoped_release release;
          r = run_validate(make_options(config, out, std::nullopt, 0, 0, quiet, false, data, report));
        }
        return to_dict(r);
      },
      py::arg("config"), py::arg("data"), py::arg("report"), py::arg("out") = "",
      py::arg("quiet") = true,
      "Mean relative mismatch of a calibrated model against a validation sample set.");

  m.def(
      "run_study",
      [](const std::string& config, const std::string& out, std::optional<std::uint64_t> seed,
         int threads, bool quiet) {
        StudyRecord r;
        {
          py::gil_scoped_release release;
          r = run_study(make_options(config, out, seed, 0, threads, quiet, false, "", ""));
        }
        return to_dict(r);
      },
      py::arg("config"), py::arg("out") = "", py::arg("seed") = std::nullopt,
      py::arg("threads") = 0, py::arg("quiet") = true, "Monte-Carlo convergence study.");

  m.def("noise_draw", &counter_gaussian, py::arg("seed"), py::arg("op"), py::arg("sample"),
        py::arg("sensor"),
        "Standard normal draw of the counter-based noise stream (order independent).");
}
