#include <doctest.h>

#include <filesystem>

#include <nlohmann/json.hpp>

#include "thermocal/errors.hpp"
#include "thermocal/io_util.hpp"
#include "thermocal/runner.hpp"

using namespace thermocal;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Low-resolution variant of the disk benchmark so pipeline tests stay fast.
std::string fixture_config(const fs::path& dir, const std::string& id, int resolution,
                           json extra = json::object()) {
  json j = {
      {"id", id},
      {"geometry", {{"kind", "example1"}, {"resolution", resolution}, {"disk_radius", 0.2}}},
      {"materials", {{"1", 1.0}, {"2", "lambda_disk"}}},
      {"powered_regions", {2}},
      {"boundaries",
       {{"1", {{"kind", "dirichlet"}, {"T_C", 20.0}}},
        {"2", {{"kind", "dirichlet"}, {"T_C", 20.0}}},
        {"3", {{"kind", "neumann"}}},
        {"4", {{"kind", "neumann"}}}}},
      {"sensors", {{"all_nodes", true}}},
      {"operating_points", {{{"id", "op1"}, {"P_W", 2500.0}, {"T0_C", 20.0}}}},
      {"noise", {{"sigma_K", 1.0}, {"seed", 42}, {"samples_per_op", 20}}},
      {"parameters",
       {{{"name", "lambda_disk"},
         {"target", "region_lambda"},
         {"tags", {2}},
         {"lower", 1e-3},
         {"upper", 1e3},
         {"initial", 1.5},
         {"truth", 0.5},
         {"scale", "log10"}}}},
      {"optimizer", {{"tolerance", 1e-9}}},
      {"output", {{"dir", (dir / ("out_" + id)).string()}}},
  };
  for (auto& [k, v] : extra.items()) j[k] = v;
  fs::path p = dir / (id + ".json");
  write_file_atomic(p.string(), j.dump(2) + "\n");
  return p.string();
}

fs::path work_dir() {
  fs::path d = fs::temp_directory_path() / "thermocal_pipeline_test";
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("mesh and forward runs write their artifacts") {
  fs::path dir = work_dir();
  RunOptions ro;
  ro.config_path = fixture_config(dir, "pipe", 12);
  ro.quiet = true;

  run_mesh(ro);
  fs::path out = dir / "out_pipe";
  CHECK(fs::exists(out / "pipe_mesh.msh"));
  json mesh_info = json::parse(read_file((out / "pipe_mesh.json").string()));
  CHECK(mesh_info.at("nodes").get<int>() > 100);
  CHECK(mesh_info.at("total_area").get<double>() == doctest::Approx(1.0));
  CHECK(mesh_info.at("region_area").contains("2"));

  run_forward(ro);
  CHECK(fs::exists(out / "pipe_op1.vtk"));
  CHECK(fs::exists(out / "pipe_op1.csv"));

  // vtk output is byte-deterministic across runs
  std::string first = read_file((out / "pipe_op1.vtk").string());
  run_forward(ro);
  CHECK(read_file((out / "pipe_op1.vtk").string()) == first);
}

TEST_CASE("synth, calibrate from file, and validate chain together") {
  fs::path dir = work_dir();
  RunOptions ro;
  ro.config_path = fixture_config(dir, "chain", 10);
  ro.quiet = true;
  ro.samples = 15;

  run_synth(ro);
  fs::path out = dir / "out_chain";
  REQUIRE(fs::exists(out / "chain_samples.csv"));
  json sidecar = json::parse(read_file((out / "chain_samples.json").string()));
  CHECK(sidecar.at("sigma") == 1.0);
  CHECK(sidecar.at("theta_true").at("lambda_disk") == 0.5);

  // calibrate against the file we just wrote
  RunOptions cal = ro;
  cal.data_path = (out / "chain_samples.csv").string();
  CalibrationResult r = run_calibrate(cal);
  CHECK(r.status == opt::Termination::Converged);
  CHECK(relative_error(r.theta(0), 0.5) < 0.05);  // 15 noisy full-field samples
  REQUIRE(fs::exists(out / "chain_report.json"));

  // calibrating from streamed statistics with the same seed gives the same fit
  CalibrationResult r2 = run_calibrate(ro);
  CHECK(relative_error(r2.theta(0), r.theta(0)) < 1e-6);

  // validate the report against the same samples
  RunOptions val = cal;
  val.report_path = (out / "chain_report.json").string();
  ValidationReport vr = run_validate(val);
  CHECK(vr.overall_mean < 0.01);  // noise floor: sigma / T around 0.3 %
  CHECK(fs::exists(out / "chain_validation.json"));
}

TEST_CASE("calibrate rejects samples from a different mesh") {
  fs::path dir = work_dir();
  RunOptions coarse;
  coarse.config_path = fixture_config(dir, "coarse", 10);
  coarse.quiet = true;
  run_synth(coarse);

  RunOptions fine;
  fine.config_path = fixture_config(dir, "fine", 16);
  fine.quiet = true;
  fine.data_path = (dir / "out_coarse" / "coarse_samples.csv").string();
  CHECK_THROWS_WITH_AS(run_calibrate(fine), doctest::Contains("different mesh"), ConfigError);
}

TEST_CASE("split config calibrates on one half and validates on the other") {
  fs::path dir = work_dir();
  RunOptions ro;
  ro.config_path = fixture_config(dir, "holdout", 10,
                                   {{"split", {{"calibration_fraction", 0.5}, {"seed", 7}}}});
  ro.quiet = true;
  ro.samples = 10;
  CalibrationResult r = run_calibrate(ro);
  CHECK(r.status == opt::Termination::Converged);
  // holdout validation runs automatically
  json vj = json::parse(read_file((dir / "out_holdout" / "holdout_validation.json").string()));
  CHECK(vj.at("kind") == "validation_report");
  CHECK(vj.at("overall_mean_rel_error").get<double>() < 0.02);
}

TEST_CASE("seed and sample overrides change the synthetic draw") {
  fs::path dir = work_dir();
  RunOptions a;
  a.config_path = fixture_config(dir, "seeded", 10);
  a.quiet = true;

  RunOptions b = a;
  b.seed = 1234;
  b.seed_given = true;

  CalibrationResult ra = run_calibrate(a);
  CalibrationResult rb = run_calibrate(b);
  CHECK(ra.theta(0) != rb.theta(0));  // different noise, different fit

  json report = json::parse(read_file((dir / "out_seeded" / "seeded_report.json").string()));
  CHECK(report.at("seeds").at("noise") == 1234);  // last run wrote with the override
}

TEST_CASE("study run writes csv, gnuplot script and json summary") {
  fs::path dir = work_dir();
  RunOptions ro;
  ro.config_path = fixture_config(
      dir, "mini_study", 10,
      {{"study", {{"n_list", {1, 4, 16, 64}}, {"seeds_per_n", 2}}},
       {"optimizer", {{"tolerance", 1e-8}}}});
  ro.quiet = true;
  StudyRecord rec = run_study(ro);
  CHECK(rec.failures == 0);

  fs::path out = dir / "out_mini_study";
  REQUIRE(fs::exists(out / "mini_study_study.csv"));
  REQUIRE(fs::exists(out / "mini_study_study.gp"));
  json sj = json::parse(read_file((out / "mini_study_study.json").string()));
  CHECK(sj.at("kind") == "study_report");
  CHECK(sj.at("example_id") == "mini_study");

  // repeated runs produce byte-identical artifacts
  std::string csv = read_file((out / "mini_study_study.csv").string());
  std::string gp = read_file((out / "mini_study_study.gp").string());
  std::string js = read_file((out / "mini_study_study.json").string());
  run_study(ro);
  CHECK(read_file((out / "mini_study_study.csv").string()) == csv);
  CHECK(read_file((out / "mini_study_study.gp").string()) == gp);
  CHECK(read_file((out / "mini_study_study.json").string()) == js);
}

TEST_CASE("validate requires both data and report") {
  fs::path dir = work_dir();
  RunOptions ro;
  ro.config_path = fixture_config(dir, "noval", 10);
  ro.quiet = true;
  CHECK_THROWS_AS(run_validate(ro), ConfigError);
}
