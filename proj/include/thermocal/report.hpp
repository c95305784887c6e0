#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "thermocal/calibration.hpp"
#include "thermocal/study.hpp"

namespace thermocal {

inline constexpr const char* kVersion = "0.1.0";

/// Provenance carried into a calibration report.
struct ReportContext {
  std::uint64_t noise_seed = 0;
  double sigma = 0.0;
  std::uint64_t mesh_hash = 0;
  std::string temperature_scale = "kelvin";
};

nlohmann::json report_json(const CalibrationResult& result, const ParameterSpec& params,
                           const ReportContext& ctx);
/// Byte-deterministic JSON report (schema in docs/report.schema.json).
void emit_report(const CalibrationResult& result, const ParameterSpec& params,
                 const ReportContext& ctx, const std::string& path);

/// Parameter (name, value) pairs back out of a report file.
std::vector<std::pair<std::string, double>> read_report_theta(const std::string& path);

/// Rows `N,parameter,mean_rel_error,std_rel_error,n_seeds`. Throws on an empty
/// or fully failed study before touching the filesystem.
void emit_study_csv(const StudyRecord& record, const std::string& path);

/// Log-log gnuplot script plotting every parameter curve of the study CSV.
void emit_study_gnuplot(const StudyRecord& record, const std::string& csv_filename,
                        const std::string& path);

nlohmann::json study_json(const StudyRecord& record);
void emit_study_json(const StudyRecord& record, const std::string& path);

nlohmann::json validation_json(const ValidationReport& report);
void emit_validation_json(const ValidationReport& report, const std::string& path);

}  // namespace thermocal
