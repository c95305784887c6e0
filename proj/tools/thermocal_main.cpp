#include <cstdint>
#include <exception>
#include <functional>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "thermocal/errors.hpp"
#include "thermocal/runner.hpp"

namespace {

int dispatch(const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const thermocal::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const thermocal::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 2;
  } catch (const thermocal::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Steady-state 2D thermal models: forward solves, synthetic data, "
               "conductivity calibration and convergence studies"};
  app.set_version_flag("--version", thermocal::kVersion);
  app.require_subcommand(1);

  thermocal::RunOptions opt;
  std::string seed_str;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opt.config_path, "run configuration (JSON)")->required();
    cmd->add_option("--out", opt.out_dir, "output directory (overrides the config)");
    cmd->add_option("--seed", seed_str, "noise seed (overrides the config)");
    cmd->add_option("--threads", opt.threads, "worker threads (default: all cores)")
        ->check(CLI::NonNegativeNumber);
    cmd->add_flag("--quiet", opt.quiet, "suppress progress output");
  };

  CLI::App* mesh = app.add_subcommand("mesh", "Build the configured mesh and export it");
  add_common(mesh);

  CLI::App* forward = app.add_subcommand("forward", "Solve all operating points, export fields");
  add_common(forward);

  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic sample set");
  add_common(synth);
  synth->add_option("--samples", opt.samples, "repetitions per operating point")
      ->check(CLI::PositiveNumber);

  CLI::App* calibrate = app.add_subcommand("calibrate", "Fit parameters, write a report");
  add_common(calibrate);
  calibrate->add_option("--samples", opt.samples, "repetitions per operating point")
      ->check(CLI::PositiveNumber);
  calibrate->add_option("--data", opt.data_path, "measured sample CSV (default: synthetic)");
  calibrate->add_flag("--timing", opt.timing, "record wall time in the report");

  CLI::App* validate = app.add_subcommand("validate", "Check a calibrated model against samples");
  add_common(validate);
  validate->add_option("--data", opt.data_path, "validation sample CSV")->required();
  validate->add_option("--report", opt.report_path, "calibration report JSON")->required();

  CLI::App* study = app.add_subcommand("study", "Monte-Carlo convergence study");
  add_common(study);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage problems exit 1, --help/--version exit 0
  }

  if (!seed_str.empty()) {
    try {
      opt.seed = std::stoull(seed_str);
      opt.seed_given = true;
    } catch (const std::exception&) {
      std::cerr << "error: --seed expects an unsigned integer, got '" << seed_str << "'\n";
      return 1;
    }
  }

  if (mesh->parsed()) return dispatch([&] { thermocal::run_mesh(opt); });
  if (forward->parsed()) return dispatch([&] { thermocal::run_forward(opt); });
  if (synth->parsed()) return dispatch([&] { thermocal::run_synth(opt); });
  if (calibrate->parsed()) return dispatch([&] { thermocal::run_calibrate(opt); });
  if (validate->parsed()) return dispatch([&] { thermocal::run_validate(opt); });
  if (study->parsed()) return dispatch([&] { thermocal::run_study(opt); });
  return 1;
}
