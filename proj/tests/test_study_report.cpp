#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "thermocal/errors.hpp"
#include "thermocal/geometry.hpp"
#include "thermocal/io_util.hpp"
#include "thermocal/report.hpp"
#include "thermocal/study.hpp"

using namespace thermocal;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir() {
  fs::path d = fs::temp_directory_path() / "thermocal_report_test";
  fs::create_directories(d);
  return d;
}

ProblemFamily tiny_family(const Mesh& mesh) {
  ProblemFamily fam;
  fam.mesh = &mesh;
  fam.base.region_lambda = {{1, 1.0}, {2, 1.0}};
  fam.base.boundary = {{1, BoundaryCondition::dirichlet(293.15)},
                       {2, BoundaryCondition::dirichlet(293.15)},
                       {3, BoundaryCondition::neumann()},
                       {4, BoundaryCondition::neumann()}};
  fam.ops = {{"op1", 2500.0, 1.0, 293.15}};
  fam.powered_regions = {2};
  fam.t0_dirichlet = {1, 2};
  ParameterSlot slot;
  slot.name = "lambda_disk";
  slot.tags = {2};
  slot.lower = 1e-3;
  slot.upper = 1e3;
  slot.initial = 1.5;
  slot.truth = 0.5;
  fam.params.slots = {slot};
  return fam;
}

}  // namespace

TEST_CASE("log-log slope fit reproduces exact power laws") {
  // eps = 3 * N^{-1/2}: slope -0.5, intercept log10(3), zero spread
  std::vector<std::pair<double, double>> pts;
  for (double n : {10.0, 100.0, 1000.0, 10000.0}) pts.push_back({n, 3.0 / std::sqrt(n)});
  SlopeFit fit = fit_loglog_slope(pts);
  CHECK(fit.slope == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(std::log10(3.0)).epsilon(1e-12));
  CHECK(fit.half_width <= 1e-10);

  // fewer than 4 usable points is an error
  pts.resize(3);
  CHECK_THROWS_AS(fit_loglog_slope(pts), ConfigError);
  // non-positive errors are unusable
  std::vector<std::pair<double, double>> bad = {{1, 1.0}, {10, 0.0}, {100, 0.1}, {1000, 0.01}};
  CHECK_THROWS_AS(fit_loglog_slope(bad), ConfigError);

  // noisy points widen the confidence band
  std::vector<std::pair<double, double>> wobble = {
      {10, 1.2}, {100, 0.2}, {1000, 0.14}, {10000, 0.02}};
  CHECK(fit_loglog_slope(wobble).half_width > 1e-3);
}

TEST_CASE("convergence study: shape, determinism, decreasing errors") {
  Mesh mesh = build_example1(1.0, 1.0, {0.5, 0.5}, 0.2, 10);
  ProblemFamily fam = tiny_family(mesh);
  Eigen::VectorXd truth(1);
  truth << 0.5;

  StudySpec spec;
  spec.n_list = {1, 4, 16, 64, 256};
  spec.seeds_per_n = 3;
  spec.noise = {1.0, 123};
  spec.threads = 2;
  OptimizerConfig cfg;
  cfg.tolerance = 1e-10;

  StudyRecord rec = convergence_study(fam, truth, nullptr, spec, cfg, "tiny");
  CHECK(rec.example_id == "tiny");
  CHECK(rec.param_names == std::vector<std::string>{"lambda_disk"});
  CHECK(rec.n_list == spec.n_list);
  CHECK(rec.seeds_per_n == 3);
  REQUIRE(rec.errors.size() == 5);
  for (const auto& per_seed : rec.errors) {
    REQUIRE(per_seed.size() == 3);
    for (const auto& per_param : per_seed) {
      REQUIRE(per_param.size() == 1);
      CHECK(std::isfinite(per_param[0]));
      CHECK(per_param[0] >= 0.0);
    }
  }
  CHECK(rec.failures == 0);
  CHECK(rec.completed_seeds(0) == 3);

  // full-field data at N=64 pins the parameter much better than N=1
  CHECK(rec.mean_error(4, 0) < rec.mean_error(0, 0));
  CHECK(rec.slopes.count("lambda_disk") == 1);

  // byte-level determinism of a repeated study
  StudyRecord rec2 = convergence_study(fam, truth, nullptr, spec, cfg, "tiny");
  CHECK(study_json(rec2).dump() == study_json(rec).dump());

  // a different master seed changes the outcome
  StudySpec other = spec;
  other.noise.seed = 321;
  StudyRecord rec3 = convergence_study(fam, truth, nullptr, other, cfg, "tiny");
  CHECK(study_json(rec3).dump() != study_json(rec).dump());

  SUBCASE("csv, gnuplot and json artifacts") {
    fs::path csv = tmp_dir() / "tiny_study.csv";
    fs::path gp = tmp_dir() / "tiny_study.gp";
    fs::path js = tmp_dir() / "tiny_study.json";
    emit_study_csv(rec, csv.string());
    emit_study_gnuplot(rec, "tiny_study.csv", gp.string());
    emit_study_json(rec, js.string());

    std::string text = read_file(csv.string());
    CHECK(text.rfind("N,parameter,mean_rel_error,std_rel_error,n_seeds\n", 0) == 0);
    // one row per (N, parameter)
    CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 5);
    CHECK(text.find("256,lambda_disk,") != std::string::npos);

    std::string plot = read_file(gp.string());
    CHECK(plot.find("logscale") != std::string::npos);
    CHECK(plot.find("tiny_study.csv") != std::string::npos);

    nlohmann::json j = nlohmann::json::parse(read_file(js.string()));
    CHECK(j.at("kind") == "study_report");
    CHECK(j.at("n_list").size() == 5);
    CHECK(j.at("slopes").contains("lambda_disk"));
    CHECK(j.at("failures") == 0);

    // emitting twice is byte-identical
    fs::path csv2 = tmp_dir() / "tiny_study_2.csv";
    emit_study_csv(rec, csv2.string());
    CHECK(read_file(csv.string()) == read_file(csv2.string()));
  }
}

TEST_CASE("study seed derivation is order-independent across thread counts") {
  Mesh mesh = build_example1(1.0, 1.0, {0.5, 0.5}, 0.2, 10);
  ProblemFamily fam = tiny_family(mesh);
  Eigen::VectorXd truth(1);
  truth << 0.5;
  StudySpec spec;
  spec.n_list = {1, 2, 4, 8};
  spec.seeds_per_n = 2;
  spec.noise = {1.0, 9};
  OptimizerConfig cfg;
  cfg.tolerance = 1e-9;

  spec.threads = 1;
  StudyRecord serial = convergence_study(fam, truth, nullptr, spec, cfg);
  spec.threads = 4;
  StudyRecord parallel = convergence_study(fam, truth, nullptr, spec, cfg);
  CHECK(study_json(serial).dump() == study_json(parallel).dump());
  CHECK(serial.study_id == "study");  // fallback id when no example id is given
}

TEST_CASE("empty or fully failed studies are rejected before writing") {
  StudyRecord rec;
  rec.study_id = "empty";
  CHECK_THROWS_WITH_AS(emit_study_csv(rec, (tmp_dir() / "never.csv").string()),
                       doctest::Contains("no replications"), ConfigError);
  CHECK_FALSE(fs::exists(tmp_dir() / "never.csv"));

  rec.param_names = {"p"};
  rec.n_list = {1, 2};
  rec.seeds_per_n = 1;
  double nan = std::nan("");
  rec.errors = {{{nan}}, {{nan}}};
  rec.failures = 2;
  CHECK_THROWS_WITH_AS(emit_study_csv(rec, (tmp_dir() / "never.csv").string()),
                       doctest::Contains("every replication failed"), ConfigError);
}

TEST_CASE("calibration report json: content and round trip") {
  CalibrationResult result;
  result.names = {"lambda_disk"};
  result.theta.resize(1);
  result.theta << 0.4987;
  result.cost = 12.5;
  result.iterations = 9;
  result.evaluations = 40;
  result.status = opt::Termination::Converged;
  result.trace = {100.0, 20.0, 12.5};
  result.fd_bound_warnings = 0;
  result.message = "ok";

  ParameterSpec params;
  ParameterSlot slot;
  slot.name = "lambda_disk";
  slot.tags = {2};
  slot.lower = 1e-3;
  slot.upper = 1e3;
  slot.initial = 1.5;
  slot.truth = 0.5;
  params.slots = {slot};

  ReportContext ctx;
  ctx.noise_seed = 42;
  ctx.sigma = 1.0;
  ctx.mesh_hash = 777;

  nlohmann::json j = report_json(result, params, ctx);
  CHECK(j.at("kind") == "calibration_report");
  CHECK(j.at("version") == kVersion);
  CHECK(j.at("termination") == "Converged");
  CHECK(j.at("cost").at("final") == 12.5);
  CHECK(j.at("cost").at("trace").size() == 3);
  CHECK(j.at("seeds").at("noise") == 42);
  CHECK(j.at("sigma") == 1.0);
  CHECK(j.at("mesh_hash") == 777);
  const auto& p = j.at("parameters").at(0);
  CHECK(p.at("name") == "lambda_disk");
  CHECK(p.at("value") == 0.4987);
  CHECK(p.at("initial") == 1.5);
  CHECK(p.at("truth") == 0.5);
  CHECK(p.at("rel_error") == doctest::Approx(std::abs(0.4987 - 0.5) / 0.5).epsilon(1e-12));

  fs::path path = tmp_dir() / "report.json";
  emit_report(result, params, ctx, path.string());
  auto theta = read_report_theta(path.string());
  REQUIRE(theta.size() == 1);
  CHECK(theta[0].first == "lambda_disk");
  CHECK(theta[0].second == 0.4987);

  // deterministic bytes
  fs::path path2 = tmp_dir() / "report2.json";
  emit_report(result, params, ctx, path2.string());
  CHECK(read_file(path.string()) == read_file(path2.string()));

  // unknown-truth slots omit truth and rel_error
  params.slots[0].truth = 0.0;
  nlohmann::json j2 = report_json(result, params, ctx);
  CHECK_FALSE(j2.at("parameters").at(0).contains("truth"));
  CHECK_FALSE(j2.at("parameters").at(0).contains("rel_error"));

  CHECK_THROWS_AS(read_report_theta((tmp_dir() / "missing.json").string()), IoError);
}

namespace {

// Structural check against the schema subset used in docs/: type, const, enum,
// required, properties, additionalProperties, items, minItems, minimum,
// minLength. Returns the first violation as "<path>: <reason>", empty if valid.
std::string schema_violation(const nlohmann::json& schema, const nlohmann::json& doc,
                             const std::string& where = "") {
  using nlohmann::json;
  if (schema.contains("const") && doc != schema["const"]) return where + ": unexpected value";
  if (schema.contains("enum")) {
    bool hit = false;
    for (const auto& v : schema["enum"]) hit = hit || doc == v;
    if (!hit) return where + ": not in enum";
  }
  if (schema.contains("type")) {
    const std::string t = schema["type"];
    bool ok = (t == "object" && doc.is_object()) || (t == "array" && doc.is_array()) ||
              (t == "string" && doc.is_string()) || (t == "number" && doc.is_number()) ||
              (t == "integer" && doc.is_number_integer());
    if (!ok) return where + ": expected " + t;
  }
  if (schema.contains("minimum") && doc.is_number() &&
      doc.get<double>() < schema["minimum"].get<double>())
    return where + ": below minimum";
  if (schema.contains("minLength") && doc.is_string() &&
      doc.get<std::string>().size() < schema["minLength"].get<std::size_t>())
    return where + ": too short";
  if (doc.is_object()) {
    if (schema.contains("required"))
      for (const auto& k : schema["required"])
        if (!doc.contains(k.get<std::string>()))
          return where + ": missing " + k.get<std::string>();
    const json props = schema.value("properties", json::object());
    for (const auto& [k, v] : doc.items()) {
      if (props.contains(k)) {
        std::string r = schema_violation(props[k], v, where + "/" + k);
        if (!r.empty()) return r;
      } else if (schema.value("additionalProperties", json(true)) == json(false)) {
        return where + ": unknown key " + k;
      }
    }
  }
  if (doc.is_array()) {
    if (schema.contains("minItems") && doc.size() < schema["minItems"].get<std::size_t>())
      return where + ": too few items";
    if (schema.contains("items"))
      for (std::size_t i = 0; i < doc.size(); ++i) {
        std::string r = schema_violation(schema["items"], doc[i], where + "/" + std::to_string(i));
        if (!r.empty()) return r;
      }
  }
  return "";
}

}  // namespace

TEST_CASE("calibration reports validate against the shipped schema") {
  CalibrationResult result;
  result.names = {"lambda_disk"};
  result.theta.resize(1);
  result.theta << 0.4987;
  result.cost = 12.5;
  result.iterations = 9;
  result.evaluations = 40;
  result.status = opt::Termination::Converged;
  result.trace = {100.0, 20.0, 12.5};
  result.message = "ok";

  ParameterSpec params;
  ParameterSlot slot;
  slot.name = "lambda_disk";
  slot.tags = {2};
  slot.initial = 1.5;
  slot.truth = 0.5;
  params.slots = {slot};

  ReportContext ctx;
  ctx.noise_seed = 42;
  ctx.sigma = 1.0;
  ctx.mesh_hash = 777;

  nlohmann::json schema = nlohmann::json::parse(
      read_file(std::string(THERMOCAL_REPO_DIR) + "/docs/report.schema.json"));

  nlohmann::json j = report_json(result, params, ctx);
  CHECK(schema_violation(schema, j) == "");

  // the truth-omitting variant must also validate
  params.slots[0].truth = 0.0;
  CHECK(schema_violation(schema, report_json(result, params, ctx)) == "");

  // and the check has teeth: bad enum, missing key, unknown key all flagged
  nlohmann::json bad = j;
  bad["termination"] = "Happy";
  CHECK(schema_violation(schema, bad) != "");
  bad = j;
  bad.erase("sigma");
  CHECK(schema_violation(schema, bad) != "");
  bad = j;
  bad["debug_notes"] = "x";
  CHECK(schema_violation(schema, bad) != "");
  bad = j;
  bad["cost"]["trace"] = nlohmann::json::array();
  CHECK(schema_violation(schema, bad) != "");
}

TEST_CASE("validation report json carries the kelvin scale") {
  ValidationReport vr;
  vr.sensor_ids = {"a", "b"};
  vr.per_sensor_mean.resize(2);
  vr.per_sensor_mean << 0.001, 0.003;
  vr.overall_mean = 0.002;
  nlohmann::json j = validation_json(vr);
  CHECK(j.at("kind") == "validation_report");
  CHECK(j.at("temperature_scale") == "kelvin");
  CHECK(j.at("per_sensor_mean_rel_error").at("b") == 0.003);
  CHECK(j.at("overall_mean_rel_error") == 0.002);
}
