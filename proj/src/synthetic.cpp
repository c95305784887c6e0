#include "thermocal/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "thermocal/errors.hpp"
#include "thermocal/io_util.hpp"
#include "thermocal/solve.hpp"

namespace thermocal {

std::uint64_t counter_mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

namespace {

double uniform01(std::uint64_t h) {
  // 53 high bits, offset by half an ulp: strictly inside (0,1).
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

double counter_gaussian(std::uint64_t seed, std::uint64_t op, std::uint64_t sample,
                        std::uint64_t sensor) {
  std::uint64_t key = counter_mix(seed ^ 0x243F6A8885A308D3ull);
  key = counter_mix(key ^ op);
  key = counter_mix(key ^ sample);
  key = counter_mix(key ^ sensor);
  double u1 = uniform01(counter_mix(key ^ 0xD1B54A32D192ED03ull));
  double u2 = uniform01(counter_mix(key ^ 0x8CB92BA72F3D8DD7ull));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

SampleSet generate_impl(const std::vector<TemperatureField>& fields,
                        const std::vector<std::string>& op_ids, std::vector<std::string> sensor_ids,
                        const std::vector<Eigen::VectorXd>& exact, const NoiseSpec& noise,
                        int n_per_op) {
  if (n_per_op < 1) throw ConfigError("generate: sample count must be >= 1");
  if (noise.sigma < 0.0) throw ConfigError("generate: sigma must be >= 0");
  if (fields.empty() || fields.size() != op_ids.size())
    throw ConfigError("generate: need one field per operating point id");

  const int n_ops = static_cast<int>(fields.size());
  const int n_sensors = static_cast<int>(sensor_ids.size());

  SampleSet out;
  out.sensor_ids = std::move(sensor_ids);
  out.seed = noise.seed;
  out.sigma = noise.sigma;
  out.mesh_hash = fields[0].mesh->content_hash();
  out.values.resize(static_cast<Eigen::Index>(n_ops) * n_per_op, n_sensors);
  out.op_ids.reserve(static_cast<std::size_t>(n_ops) * n_per_op);

  for (int o = 0; o < n_ops; ++o) {
    for (int s = 0; s < n_per_op; ++s) {
      Eigen::Index row = static_cast<Eigen::Index>(o) * n_per_op + s;
      out.op_ids.push_back(op_ids[o]);
      for (int j = 0; j < n_sensors; ++j) {
        double eps = noise.sigma == 0.0 ? 0.0
                                        : noise.sigma * counter_gaussian(noise.seed, o, s, j);
        out.values(row, j) = exact[o][j] + eps;
      }
    }
  }
  return out;
}

}  // namespace

SampleSet generate(const std::vector<TemperatureField>& fields,
                   const std::vector<std::string>& op_ids, const SensorSet& sensors,
                   const NoiseSpec& noise, int n_per_op) {
  if (sensors.size() == 0) throw ConfigError("generate: empty sensor set");
  std::vector<Eigen::VectorXd> exact;
  exact.reserve(fields.size());
  for (const TemperatureField& f : fields) exact.push_back(evaluate(f, sensors));
  return generate_impl(fields, op_ids, sensors.ids, exact, noise, n_per_op);
}

SampleSet generate_full_field(const std::vector<TemperatureField>& fields,
                              const std::vector<std::string>& op_ids, const NoiseSpec& noise,
                              int n_per_op) {
  if (fields.empty()) throw ConfigError("generate: no fields given");
  const int n = fields[0].mesh->node_count();
  std::vector<std::string> ids;
  ids.reserve(n);
  for (int j = 0; j < n; ++j) ids.push_back("n" + std::to_string(j));
  std::vector<Eigen::VectorXd> exact;
  exact.reserve(fields.size());
  for (const TemperatureField& f : fields) exact.push_back(f.u);
  return generate_impl(fields, op_ids, std::move(ids), exact, noise, n_per_op);
}

std::pair<SampleSet, SampleSet> split(const SampleSet& samples, double calibration_fraction,
                                      std::uint64_t seed) {
  if (!(calibration_fraction > 0.0 && calibration_fraction < 1.0))
    throw ConfigError("split: calibration fraction must lie in (0,1)");

  // Strata = runs of rows per operating point id, in first-appearance order.
  std::vector<std::string> stratum_ids;
  std::map<std::string, std::vector<int>> strata;
  for (int r = 0; r < samples.rows(); ++r) {
    auto [it, inserted] = strata.try_emplace(samples.op_ids[r]);
    if (inserted) stratum_ids.push_back(samples.op_ids[r]);
    it->second.push_back(r);
  }

  std::vector<int> cal_rows, val_rows;
  for (const std::string& op : stratum_ids) {
    const std::vector<int>& rows = strata[op];
    int n = static_cast<int>(rows.size());
    int k = static_cast<int>(std::lround(calibration_fraction * n));
    if (k < 1 || k >= n)
      throw ConfigError("split: operating point '" + op +
                        "' would leave an empty calibration or validation stratum");
    // Deterministic per-stratum shuffle (Fisher-Yates on a counter stream).
    std::vector<int> perm = rows;
    std::uint64_t h = counter_mix(seed ^ counter_mix(std::hash<std::string>{}(op)));
    for (int i = n - 1; i > 0; --i) {
      h = counter_mix(h);
      int j = static_cast<int>(h % static_cast<std::uint64_t>(i + 1));
      std::swap(perm[i], perm[j]);
    }
    cal_rows.insert(cal_rows.end(), perm.begin(), perm.begin() + k);
    val_rows.insert(val_rows.end(), perm.begin() + k, perm.end());
  }
  std::sort(cal_rows.begin(), cal_rows.end());
  std::sort(val_rows.begin(), val_rows.end());

  auto take = [&samples](const std::vector<int>& rows) {
    SampleSet out;
    out.sensor_ids = samples.sensor_ids;
    out.seed = samples.seed;
    out.sigma = samples.sigma;
    out.theta_true = samples.theta_true;
    out.mesh_hash = samples.mesh_hash;
    out.values.resize(static_cast<Eigen::Index>(rows.size()), samples.values.cols());
    out.op_ids.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out.values.row(static_cast<Eigen::Index>(i)) = samples.values.row(rows[i]);
      out.op_ids.push_back(samples.op_ids[rows[i]]);
    }
    return out;
  };
  return {take(cal_rows), take(val_rows)};
}

void write_samples(const SampleSet& samples, const std::string& csv_path,
                   const std::string& sidecar_json_path) {
  std::ostringstream csv;
  csv << "sample_id,op_id,sensor_id,temperature_K\n";
  for (int r = 0; r < samples.rows(); ++r)
    for (int j = 0; j < samples.sensor_count(); ++j)
      csv << r << ',' << samples.op_ids[r] << ',' << samples.sensor_ids[j] << ','
          << format_shortest(samples.values(r, j)) << "\n";
  write_file_atomic(csv_path, csv.str());

  nlohmann::json side;
  side["seed"] = samples.seed;
  side["sigma"] = samples.sigma;
  side["mesh_hash"] = samples.mesh_hash;
  side["sensor_ids"] = samples.sensor_ids;
  side["theta_true"] = samples.theta_true;
  write_file_atomic(sidecar_json_path, side.dump(2) + "\n");
}

SampleSet read_samples(const std::string& csv_path, const std::string& sidecar_json_path) {
  SampleSet out;
  nlohmann::json side;
  try {
    side = nlohmann::json::parse(read_file(sidecar_json_path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("samples sidecar " + sidecar_json_path + ": " + e.what());
  }
  out.seed = side.value("seed", std::uint64_t{0});
  out.sigma = side.value("sigma", 0.0);
  out.mesh_hash = side.value("mesh_hash", std::uint64_t{0});
  out.sensor_ids = side.value("sensor_ids", std::vector<std::string>{});
  if (side.contains("theta_true"))
    out.theta_true = side["theta_true"].get<std::map<std::string, double>>();

  std::map<std::string, int> sensor_col;
  for (std::size_t j = 0; j < out.sensor_ids.size(); ++j)
    sensor_col[out.sensor_ids[j]] = static_cast<int>(j);

  std::istringstream in(read_file(csv_path));
  std::string line;
  if (!std::getline(in, line)) throw IoError("samples csv " + csv_path + ": empty file");
  std::vector<std::array<std::string, 2>> row_meta;  // sample_id, op_id
  std::vector<Eigen::VectorXd> row_values;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string sample_id, op_id, sensor_id, temp;
    if (!std::getline(ls, sample_id, ',') || !std::getline(ls, op_id, ',') ||
        !std::getline(ls, sensor_id, ',') || !std::getline(ls, temp))
      throw IoError("samples csv " + csv_path + ": line " + std::to_string(line_no) +
                    ": expected sample_id,op_id,sensor_id,temperature_K");
    auto jt = sensor_col.find(sensor_id);
    if (jt == sensor_col.end())
      throw IoError("samples csv " + csv_path + ": line " + std::to_string(line_no) +
                    ": sensor '" + sensor_id + "' not in sidecar");
    if (row_meta.empty() || row_meta.back()[0] != sample_id) {
      row_meta.push_back({sample_id, op_id});
      row_values.emplace_back(Eigen::VectorXd::Constant(
          static_cast<Eigen::Index>(out.sensor_ids.size()), std::nan("")));
    }
    row_values.back()[jt->second] = std::stod(temp);
  }
  if (row_meta.empty()) throw IoError("samples csv " + csv_path + ": no data rows");

  out.values.resize(static_cast<Eigen::Index>(row_meta.size()),
                    static_cast<Eigen::Index>(out.sensor_ids.size()));
  for (std::size_t r = 0; r < row_meta.size(); ++r) {
    if (!row_values[r].allFinite())
      throw IoError("samples csv " + csv_path + ": sample " + row_meta[r][0] +
                    " is missing sensor readings");
    out.values.row(static_cast<Eigen::Index>(r)) = row_values[r];
    out.op_ids.push_back(row_meta[r][1]);
  }
  return out;
}

}  // namespace thermocal
