#include "thermocal/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <set>

#include "thermocal/errors.hpp"
#include "thermocal/io_util.hpp"
#include "thermocal/msh_io.hpp"

namespace thermocal {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& pointer, const std::string& what) {
  throw ConfigError("config " + pointer + ": " + what);
}

const json& expect_object(const json& j, const std::string& ptr) {
  if (!j.is_object()) fail(ptr, "expected an object");
  return j;
}

void check_keys(const json& obj, const std::string& ptr, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; }) == allowed.end()) {
      fail(ptr + "/" + key, "unknown key");
    }
  }
}

double as_double(const json& j, const std::string& ptr) {
  if (!j.is_number()) fail(ptr, "expected a number");
  return j.get<double>();
}

int as_int(const json& j, const std::string& ptr) {
  if (!j.is_number_integer()) fail(ptr, "expected an integer");
  return j.get<int>();
}

std::uint64_t as_u64(const json& j, const std::string& ptr) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<long long>() >= 0) {
    return static_cast<std::uint64_t>(j.get<long long>());
  }
  fail(ptr, "expected a non-negative integer");
}

std::string as_string(const json& j, const std::string& ptr) {
  if (!j.is_string()) fail(ptr, "expected a string");
  return j.get<std::string>();
}

bool as_bool(const json& j, const std::string& ptr) {
  if (!j.is_boolean()) fail(ptr, "expected a boolean");
  return j.get<bool>();
}

double get_double(const json& obj, const std::string& ptr, const char* key, double fallback) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : as_double(*it, ptr + "/" + key);
}

int get_int(const json& obj, const std::string& ptr, const char* key, int fallback) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : as_int(*it, ptr + "/" + key);
}

bool get_bool(const json& obj, const std::string& ptr, const char* key, bool fallback) {
  auto it = obj.find(key);
  return it == obj.end() ? fallback : as_bool(*it, ptr + "/" + key);
}

int parse_tag(const std::string& key, const std::string& ptr) {
  int tag = 0;
  const char* begin = key.data();
  const char* end = begin + key.size();
  auto [p, ec] = std::from_chars(begin, end, tag);
  if (ec != std::errc() || p != end) fail(ptr + "/" + key, "tag keys must be integers");
  return tag;
}

Eigen::Vector2d as_point(const json& j, const std::string& ptr) {
  if (!j.is_array() || j.size() != 2) fail(ptr, "expected [x, y]");
  return {as_double(j[0], ptr + "/0"), as_double(j[1], ptr + "/1")};
}

constexpr double kCelsiusOffset = 273.15;

GeometryConfig parse_geometry(const json& j) {
  const std::string ptr = "/geometry";
  expect_object(j, ptr);
  auto it = j.find("kind");
  if (it == j.end()) fail(ptr, "missing required key 'kind'");
  const std::string kind = as_string(*it, ptr + "/kind");

  GeometryConfig g;
  if (kind == "example1" || kind == "example2") {
    g.kind = kind == "example1" ? GeometryConfig::Kind::Example1 : GeometryConfig::Kind::Example2;
    if (kind == "example1") {
      check_keys(j, ptr, {"kind", "width", "height", "disk_center", "disk_radius", "resolution"});
    } else {
      check_keys(j, ptr, {"kind", "width", "height", "disk_center", "disk_radius",
                          "annulus_outer_radius", "resolution"});
      g.annulus_outer_radius = get_double(j, ptr, "annulus_outer_radius", g.annulus_outer_radius);
    }
    g.width = get_double(j, ptr, "width", g.width);
    g.height = get_double(j, ptr, "height", g.height);
    if (j.contains("disk_center")) g.disk_center = as_point(j["disk_center"], ptr + "/disk_center");
    g.disk_radius = get_double(j, ptr, "disk_radius", g.disk_radius);
    g.resolution = get_int(j, ptr, "resolution", g.resolution);
  } else if (kind == "machine_quadrant") {
    g.kind = GeometryConfig::Kind::MachineQuadrant;
    check_keys(j, ptr,
               {"kind", "shaft_radius", "rotor_yoke_radius", "air_gap_radius",
                "stator_bore_radius", "stator_yoke_radius", "jacket_radius", "slot_count",
                "slot_fill", "liner_thickness", "radial_resolution", "angular_per_slot"});
    MachineQuadrantSpec& m = g.machine;
    m.shaft_radius = get_double(j, ptr, "shaft_radius", m.shaft_radius);
    m.rotor_yoke_radius = get_double(j, ptr, "rotor_yoke_radius", m.rotor_yoke_radius);
    m.air_gap_radius = get_double(j, ptr, "air_gap_radius", m.air_gap_radius);
    m.stator_bore_radius = get_double(j, ptr, "stator_bore_radius", m.stator_bore_radius);
    m.stator_yoke_radius = get_double(j, ptr, "stator_yoke_radius", m.stator_yoke_radius);
    m.jacket_radius = get_double(j, ptr, "jacket_radius", m.jacket_radius);
    m.slot_count = get_int(j, ptr, "slot_count", m.slot_count);
    m.slot_fill = get_double(j, ptr, "slot_fill", m.slot_fill);
    m.liner_thickness = get_double(j, ptr, "liner_thickness", m.liner_thickness);
    m.radial_resolution = get_int(j, ptr, "radial_resolution", m.radial_resolution);
    m.angular_per_slot = get_int(j, ptr, "angular_per_slot", m.angular_per_slot);
  } else if (kind == "msh_import") {
    g.kind = GeometryConfig::Kind::MshImport;
    check_keys(j, ptr, {"kind", "path"});
    auto pit = j.find("path");
    if (pit == j.end()) fail(ptr, "msh_import requires 'path'");
    g.path = as_string(*pit, ptr + "/path");
  } else {
    fail(ptr + "/kind",
         "unknown geometry kind '" + kind +
             "' (expected example1, example2, machine_quadrant or msh_import)");
  }
  return g;
}

BoundaryConfig parse_boundary(const json& j, const std::string& ptr) {
  expect_object(j, ptr);
  auto kit = j.find("kind");
  if (kit == j.end()) fail(ptr, "missing required key 'kind'");
  const std::string kind = as_string(*kit, ptr + "/kind");

  BoundaryConfig b;
  if (kind == "dirichlet") {
    b.kind = BcKind::Dirichlet;
    check_keys(j, ptr, {"kind", "T_C", "follows_T0"});
    b.follows_t0 = get_bool(j, ptr, "follows_T0", false);
    if (j.contains("T_C")) {
      if (b.follows_t0) fail(ptr, "'T_C' and 'follows_T0' are mutually exclusive");
      b.value_K = as_double(j["T_C"], ptr + "/T_C") + kCelsiusOffset;
    } else if (!b.follows_t0) {
      fail(ptr, "dirichlet needs 'T_C' or 'follows_T0'");
    }
  } else if (kind == "neumann") {
    b.kind = BcKind::Neumann;
    check_keys(j, ptr, {"kind"});
  } else if (kind == "robin") {
    b.kind = BcKind::Robin;
    check_keys(j, ptr, {"kind", "h", "T_C", "follows_T0"});
    auto hit = j.find("h");
    if (hit == j.end()) fail(ptr, "robin requires 'h'");
    b.h = as_double(*hit, ptr + "/h");
    if (b.h < 0.0) fail(ptr + "/h", "film coefficient must be non-negative");
    b.follows_t0 = get_bool(j, ptr, "follows_T0", false);
    if (j.contains("T_C")) {
      if (b.follows_t0) fail(ptr, "'T_C' and 'follows_T0' are mutually exclusive");
      b.value_K = as_double(j["T_C"], ptr + "/T_C") + kCelsiusOffset;
    } else if (!b.follows_t0) {
      fail(ptr, "robin needs 'T_C' or 'follows_T0'");
    }
  } else {
    fail(ptr + "/kind", "unknown boundary kind '" + kind + "'");
  }
  return b;
}

SensorConfig parse_sensors(const json& j) {
  const std::string ptr = "/sensors";
  expect_object(j, ptr);
  check_keys(j, ptr, {"all_nodes", "list"});
  SensorConfig s;
  const bool all = get_bool(j, ptr, "all_nodes", false);
  const bool has_list = j.contains("list");
  if (all && has_list) fail(ptr, "'all_nodes' and 'list' are mutually exclusive");
  if (!all && !has_list) fail(ptr, "give 'all_nodes': true or a sensor 'list'");
  s.all_nodes = all;
  if (has_list) {
    const json& list = j["list"];
    if (!list.is_array() || list.empty()) fail(ptr + "/list", "expected a non-empty array");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string ep = ptr + "/list/" + std::to_string(i);
      expect_object(list[i], ep);
      check_keys(list[i], ep, {"id", "x", "y"});
      std::string id = list[i].contains("id") ? as_string(list[i]["id"], ep + "/id")
                                              : "s" + std::to_string(i + 1);
      if (!seen.insert(id).second) fail(ep, "duplicate sensor id '" + id + "'");
      if (!list[i].contains("x") || !list[i].contains("y")) fail(ep, "sensor needs 'x' and 'y'");
      s.list.ids.push_back(std::move(id));
      s.list.positions.emplace_back(as_double(list[i]["x"], ep + "/x"),
                                    as_double(list[i]["y"], ep + "/y"));
    }
  }
  return s;
}

std::vector<OperatingPoint> parse_ops(const json& j) {
  const std::string ptr = "/operating_points";
  if (!j.is_array() || j.empty()) fail(ptr, "expected a non-empty array");
  std::vector<OperatingPoint> ops;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string ep = ptr + "/" + std::to_string(i);
    expect_object(j[i], ep);
    check_keys(j[i], ep, {"id", "P_W", "T0_C", "V_m3"});
    OperatingPoint op;
    op.id = j[i].contains("id") ? as_string(j[i]["id"], ep + "/id")
                                : "op" + std::to_string(i + 1);
    if (!seen.insert(op.id).second) fail(ep, "duplicate operating point id '" + op.id + "'");
    auto pit = j[i].find("P_W");
    if (pit == j[i].end()) fail(ep, "missing required key 'P_W'");
    op.P_W = as_double(*pit, ep + "/P_W");
    op.T0_K = get_double(j[i], ep, "T0_C", 20.0) + kCelsiusOffset;
    op.V_m3 = get_double(j[i], ep, "V_m3", 0.0);  // 0 = fill from the volume block
    if (j[i].contains("V_m3") && op.V_m3 <= 0.0) fail(ep + "/V_m3", "volume must be positive");
    ops.push_back(std::move(op));
  }
  return ops;
}

ParameterSpec parse_parameters(const json& j) {
  const std::string ptr = "/parameters";
  if (!j.is_array()) fail(ptr, "expected an array");
  ParameterSpec spec;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string ep = ptr + "/" + std::to_string(i);
    expect_object(j[i], ep);
    check_keys(j[i], ep, {"name", "target", "tags", "lower", "upper", "initial", "truth", "scale"});
    ParameterSlot s;
    auto nit = j[i].find("name");
    if (nit == j[i].end()) fail(ep, "missing required key 'name'");
    s.name = as_string(*nit, ep + "/name");
    if (s.name.empty()) fail(ep + "/name", "empty slot name");
    if (j[i].contains("target")) {
      const std::string t = as_string(j[i]["target"], ep + "/target");
      if (t == "region_lambda") {
        s.target = ParamTarget::RegionLambda;
      } else if (t == "boundary_h") {
        s.target = ParamTarget::BoundaryH;
      } else {
        fail(ep + "/target", "expected 'region_lambda' or 'boundary_h'");
      }
    }
    auto tit = j[i].find("tags");
    if (tit == j[i].end()) fail(ep, "missing required key 'tags'");
    if (!tit->is_array() || tit->empty()) fail(ep + "/tags", "expected a non-empty array");
    for (std::size_t k = 0; k < tit->size(); ++k) {
      s.tags.push_back(as_int((*tit)[k], ep + "/tags/" + std::to_string(k)));
    }
    s.lower = get_double(j[i], ep, "lower", s.lower);
    s.upper = get_double(j[i], ep, "upper", s.upper);
    s.initial = get_double(j[i], ep, "initial", s.initial);
    s.truth = get_double(j[i], ep, "truth", s.truth);
    if (j[i].contains("truth") && s.truth <= 0.0) fail(ep + "/truth", "truth must be positive");
    if (j[i].contains("scale")) {
      const std::string sc = as_string(j[i]["scale"], ep + "/scale");
      if (sc == "log10") {
        s.scale = ParamScale::Log10;
      } else if (sc == "linear") {
        s.scale = ParamScale::Linear;
      } else {
        fail(ep + "/scale", "expected 'log10' or 'linear'");
      }
    }
    spec.slots.push_back(std::move(s));
  }
  return spec;
}

}  // namespace

RunConfig parse_config(const json& j, const std::string& fallback_id) {
  expect_object(j, "");
  check_keys(j, "",
             {"id", "geometry", "materials", "sources", "powered_regions", "boundaries",
              "sensors", "operating_points", "volume", "noise", "parameters", "optimizer",
              "study", "split", "output"});

  RunConfig c;
  c.id = j.contains("id") ? as_string(j["id"], "/id") : fallback_id;
  if (c.id.empty()) fail("/id", "empty id");

  auto git = j.find("geometry");
  if (git == j.end()) fail("", "missing required key 'geometry'");
  c.geometry = parse_geometry(*git);

  auto mit = j.find("materials");
  if (mit == j.end()) fail("", "missing required key 'materials'");
  expect_object(*mit, "/materials");
  for (const auto& [key, value] : mit->items()) {
    const int tag = parse_tag(key, "/materials");
    const std::string ep = "/materials/" + key;
    if (value.is_number()) {
      const double lambda = value.get<double>();
      if (lambda <= 0.0) fail(ep, "conductivity must be positive");
      c.material_lambda[tag] = lambda;
    } else if (value.is_string()) {
      c.material_slots[tag] = value.get<std::string>();
    } else {
      fail(ep, "expected a conductivity or a parameter slot name");
    }
  }

  if (j.contains("sources")) {
    expect_object(j["sources"], "/sources");
    for (const auto& [key, value] : j["sources"].items()) {
      c.region_source[parse_tag(key, "/sources")] = as_double(value, "/sources/" + key);
    }
  }

  if (j.contains("powered_regions")) {
    const json& pr = j["powered_regions"];
    if (!pr.is_array()) fail("/powered_regions", "expected an array");
    for (std::size_t i = 0; i < pr.size(); ++i) {
      c.powered_regions.push_back(as_int(pr[i], "/powered_regions/" + std::to_string(i)));
    }
  }

  auto bit = j.find("boundaries");
  if (bit == j.end()) fail("", "missing required key 'boundaries'");
  expect_object(*bit, "/boundaries");
  for (const auto& [key, value] : bit->items()) {
    c.boundaries[parse_tag(key, "/boundaries")] = parse_boundary(value, "/boundaries/" + key);
  }

  if (j.contains("sensors")) c.sensors = parse_sensors(j["sensors"]);

  if (j.contains("operating_points")) {
    c.ops = parse_ops(j["operating_points"]);
  } else {
    OperatingPoint op;
    op.id = "op1";
    op.P_W = 0.0;
    op.V_m3 = 0.0;
    op.T0_K = 20.0 + kCelsiusOffset;
    c.ops.push_back(op);
  }

  if (j.contains("volume")) {
    const json& v = j["volume"];
    expect_object(v, "/volume");
    check_keys(v, "/volume", {"stack_length_m", "symmetry_factor"});
    auto sit = v.find("stack_length_m");
    if (sit == v.end()) fail("/volume", "missing required key 'stack_length_m'");
    c.volume.automatic = true;
    c.volume.stack_length_m = as_double(*sit, "/volume/stack_length_m");
    c.volume.symmetry_factor = get_double(v, "/volume", "symmetry_factor", 1.0);
    if (c.volume.stack_length_m <= 0.0) fail("/volume/stack_length_m", "must be positive");
    if (c.volume.symmetry_factor <= 0.0) fail("/volume/symmetry_factor", "must be positive");
  }

  if (j.contains("noise")) {
    const json& n = j["noise"];
    expect_object(n, "/noise");
    check_keys(n, "/noise", {"sigma_K", "seed", "samples_per_op"});
    c.noise.sigma = get_double(n, "/noise", "sigma_K", c.noise.sigma);
    if (c.noise.sigma < 0.0) fail("/noise/sigma_K", "sigma must be non-negative");
    if (n.contains("seed")) c.noise.seed = as_u64(n["seed"], "/noise/seed");
    c.noise.samples_per_op = get_int(n, "/noise", "samples_per_op", c.noise.samples_per_op);
    if (c.noise.samples_per_op < 1) fail("/noise/samples_per_op", "need at least one sample");
  }

  if (j.contains("parameters")) c.parameters = parse_parameters(j["parameters"]);
  c.parameters.validate();

  if (j.contains("optimizer")) {
    const json& o = j["optimizer"];
    expect_object(o, "/optimizer");
    check_keys(o, "/optimizer", {"tolerance", "max_iterations", "memory_pairs", "fd_rel_step"});
    c.optimizer.tolerance = get_double(o, "/optimizer", "tolerance", c.optimizer.tolerance);
    c.optimizer.max_iterations = get_int(o, "/optimizer", "max_iterations",
                                         c.optimizer.max_iterations);
    c.optimizer.memory_pairs = get_int(o, "/optimizer", "memory_pairs", c.optimizer.memory_pairs);
    c.optimizer.fd_rel_step = get_double(o, "/optimizer", "fd_rel_step", c.optimizer.fd_rel_step);
    if (c.optimizer.tolerance <= 0.0) fail("/optimizer/tolerance", "must be positive");
    if (c.optimizer.max_iterations < 1) fail("/optimizer/max_iterations", "must be positive");
    if (c.optimizer.memory_pairs < 1) fail("/optimizer/memory_pairs", "must be positive");
    if (c.optimizer.fd_rel_step <= 0.0) fail("/optimizer/fd_rel_step", "must be positive");
  }

  if (j.contains("study")) {
    const json& s = j["study"];
    expect_object(s, "/study");
    check_keys(s, "/study", {"n_list", "seeds_per_n", "exclude_n1_from_fit"});
    if (s.contains("n_list")) {
      const json& nl = s["n_list"];
      if (!nl.is_array() || nl.empty()) fail("/study/n_list", "expected a non-empty array");
      c.study.n_list.clear();
      for (std::size_t i = 0; i < nl.size(); ++i) {
        c.study.n_list.push_back(as_int(nl[i], "/study/n_list/" + std::to_string(i)));
      }
      for (std::size_t i = 0; i < c.study.n_list.size(); ++i) {
        if (c.study.n_list[i] < 1 || (i > 0 && c.study.n_list[i] <= c.study.n_list[i - 1])) {
          fail("/study/n_list", "sample counts must be positive and strictly increasing");
        }
      }
    }
    c.study.seeds_per_n = get_int(s, "/study", "seeds_per_n", c.study.seeds_per_n);
    if (c.study.seeds_per_n < 1) fail("/study/seeds_per_n", "need at least one seed");
    c.study.exclude_n1_from_fit =
        get_bool(s, "/study", "exclude_n1_from_fit", c.study.exclude_n1_from_fit);
  }

  if (j.contains("split")) {
    const json& s = j["split"];
    expect_object(s, "/split");
    check_keys(s, "/split", {"calibration_fraction", "seed"});
    c.split.present = true;
    c.split.calibration_fraction =
        get_double(s, "/split", "calibration_fraction", c.split.calibration_fraction);
    if (c.split.calibration_fraction <= 0.0 || c.split.calibration_fraction >= 1.0) {
      fail("/split/calibration_fraction", "must lie strictly between 0 and 1");
    }
    if (s.contains("seed")) c.split.seed = as_u64(s["seed"], "/split/seed");
  }

  if (j.contains("output")) {
    const json& o = j["output"];
    expect_object(o, "/output");
    check_keys(o, "/output", {"dir", "vtk", "csv"});
    if (o.contains("dir")) c.output.dir = as_string(o["dir"], "/output/dir");
    c.output.vtk = get_bool(o, "/output", "vtk", c.output.vtk);
    c.output.csv = get_bool(o, "/output", "csv", c.output.csv);
  }

  return c;
}

RunConfig load_config(const std::string& path) {
  const std::string text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
  return parse_config(j, std::filesystem::path(path).stem().string());
}

Scenario build_scenario(const RunConfig& config, const std::string& base_dir) {
  Scenario sc;
  sc.id = config.id;

  const GeometryConfig& g = config.geometry;
  switch (g.kind) {
    case GeometryConfig::Kind::Example1:
      sc.mesh = std::make_shared<Mesh>(
          build_example1(g.width, g.height, g.disk_center, g.disk_radius, g.resolution));
      break;
    case GeometryConfig::Kind::Example2:
      sc.mesh = std::make_shared<Mesh>(build_example2(
          g.width, g.height, g.disk_center, g.disk_radius, g.annulus_outer_radius, g.resolution));
      break;
    case GeometryConfig::Kind::MachineQuadrant:
      sc.mesh = std::make_shared<Mesh>(build_machine_quadrant(g.machine));
      break;
    case GeometryConfig::Kind::MshImport: {
      std::filesystem::path p(g.path);
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      sc.mesh = std::make_shared<Mesh>(import_msh(p.string()));
      break;
    }
  }
  const Mesh& mesh = *sc.mesh;

  const std::vector<int> regions = mesh.region_tags();
  const std::vector<int> btags = mesh.boundary_tags();
  auto has_region = [&](int t) { return std::find(regions.begin(), regions.end(), t) != regions.end(); };
  auto has_btag = [&](int t) { return std::find(btags.begin(), btags.end(), t) != btags.end(); };

  ProblemFamily& fam = sc.family;
  fam.mesh = sc.mesh.get();
  fam.params = config.parameters;

  // Baseline conductivities: literals, then slot initials for slot-bound regions.
  for (const auto& [tag, lambda] : config.material_lambda) {
    if (!has_region(tag)) throw ConfigError("config /materials: mesh has no region " + std::to_string(tag));
    fam.base.region_lambda[tag] = lambda;
  }
  for (const auto& [tag, slot_name] : config.material_slots) {
    if (!has_region(tag)) throw ConfigError("config /materials: mesh has no region " + std::to_string(tag));
    const ParameterSlot* slot = nullptr;
    for (const ParameterSlot& s : config.parameters.slots) {
      if (s.name == slot_name) {
        slot = &s;
        break;
      }
    }
    if (slot == nullptr) {
      throw ConfigError("config /materials: unknown parameter slot '" + slot_name + "'");
    }
    if (slot->target != ParamTarget::RegionLambda) {
      throw ConfigError("config /materials: slot '" + slot_name + "' does not set a conductivity");
    }
    if (std::find(slot->tags.begin(), slot->tags.end(), tag) == slot->tags.end()) {
      throw ConfigError("config /materials: slot '" + slot_name + "' does not cover region " +
                        std::to_string(tag));
    }
    fam.base.region_lambda[tag] = slot->initial;
  }
  for (int tag : regions) {
    if (fam.base.region_lambda.find(tag) == fam.base.region_lambda.end()) {
      throw ConfigError("config /materials: region " + std::to_string(tag) +
                        " has no conductivity");
    }
  }

  for (const ParameterSlot& s : config.parameters.slots) {
    for (int tag : s.tags) {
      if (s.target == ParamTarget::RegionLambda) {
        if (!has_region(tag)) {
          throw ConfigError("config /parameters: slot '" + s.name + "' references region " +
                            std::to_string(tag) + " which is not in the mesh");
        }
      } else {
        auto bc = config.boundaries.find(tag);
        if (bc == config.boundaries.end() || bc->second.kind != BcKind::Robin) {
          throw ConfigError("config /parameters: slot '" + s.name + "' needs a robin boundary " +
                            std::to_string(tag));
        }
      }
    }
  }

  for (const auto& [tag, src] : config.region_source) {
    if (!has_region(tag)) throw ConfigError("config /sources: mesh has no region " + std::to_string(tag));
    fam.base.region_source[tag] = src;
  }

  for (int tag : config.powered_regions) {
    if (!has_region(tag)) {
      throw ConfigError("config /powered_regions: mesh has no region " + std::to_string(tag));
    }
  }
  fam.powered_regions = config.powered_regions;

  for (const auto& [tag, bc] : config.boundaries) {
    if (!has_btag(tag)) {
      throw ConfigError("config /boundaries: mesh has no boundary tag " + std::to_string(tag));
    }
    switch (bc.kind) {
      case BcKind::Dirichlet:
        fam.base.boundary[tag] = BoundaryCondition::dirichlet(bc.value_K);
        if (bc.follows_t0) fam.t0_dirichlet.push_back(tag);
        break;
      case BcKind::Neumann:
        fam.base.boundary[tag] = BoundaryCondition::neumann();
        break;
      case BcKind::Robin:
        fam.base.boundary[tag] = BoundaryCondition::robin(bc.h, bc.value_K);
        if (bc.follows_t0) fam.t0_robin.push_back(tag);
        break;
    }
  }
  for (int tag : btags) {
    if (fam.base.boundary.find(tag) == fam.base.boundary.end()) {
      throw ConfigError("config /boundaries: boundary tag " + std::to_string(tag) +
                        " has no condition");
    }
  }

  fam.ops = config.ops;
  double auto_volume = 0.0;
  if (config.volume.automatic) {
    double area = 0.0;
    for (int tag : config.powered_regions) area += mesh.region_area(tag);
    if (area <= 0.0) {
      throw ConfigError("config /volume: automatic volume needs powered regions with area");
    }
    auto_volume = area * config.volume.stack_length_m * config.volume.symmetry_factor;
  }
  for (OperatingPoint& op : fam.ops) {
    if (op.V_m3 <= 0.0) op.V_m3 = config.volume.automatic ? auto_volume : 1.0;
  }

  fam.base.validate_against(mesh);  // baseline (slot initials) must already be well posed

  sc.sensors = config.sensors;
  if (!sc.sensors.all_nodes) {
    for (std::size_t i = 0; i < sc.sensors.list.positions.size(); ++i) {
      try {
        locate(mesh, sc.sensors.list.positions[i]);
      } catch (const ConfigError& e) {
        throw ConfigError("config /sensors/list/" + std::to_string(i) + " ('" +
                          sc.sensors.list.ids[i] + "'): " + e.what());
      }
    }
  }

  sc.noise = config.noise;
  sc.optimizer = config.optimizer;
  sc.study = config.study;
  sc.split = config.split;
  sc.output = config.output;
  return sc;
}

}  // namespace thermocal
