#include "thermocal/geometry.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <string>

#include "thermocal/errors.hpp"

namespace thermocal {

namespace {

// Structured grid over [0,w]x[0,h], two triangles per cell, region by centroid test.
template <typename RegionFn>
Mesh build_rectangle(double width, double height, int nx, int ny, RegionFn region_of) {
  Mesh mesh;
  mesh.nodes.reserve((nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      mesh.nodes.emplace_back(width * i / nx, height * j / ny);

  auto node = [nx](int i, int j) { return j * (nx + 1) + i; };

  mesh.triangles.reserve(2 * nx * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      int n00 = node(i, j), n10 = node(i + 1, j);
      int n11 = node(i + 1, j + 1), n01 = node(i, j + 1);
      for (const auto& tri : {std::array<int, 3>{n00, n10, n11}, {n00, n11, n01}}) {
        Eigen::Vector2d c = (mesh.nodes[tri[0]] + mesh.nodes[tri[1]] + mesh.nodes[tri[2]]) / 3.0;
        mesh.triangles.push_back({tri, region_of(c)});
      }
    }
  }

  // Boundary edges in counter-clockwise traversal order.
  for (int i = 0; i < nx; ++i)
    mesh.boundary_edges.push_back({{node(i, 0), node(i + 1, 0)}, rect::kBottom});
  for (int j = 0; j < ny; ++j)
    mesh.boundary_edges.push_back({{node(nx, j), node(nx, j + 1)}, rect::kRight});
  for (int i = nx; i > 0; --i)
    mesh.boundary_edges.push_back({{node(i, ny), node(i - 1, ny)}, rect::kTop});
  for (int j = ny; j > 0; --j)
    mesh.boundary_edges.push_back({{node(0, j), node(0, j - 1)}, rect::kLeft});
  return mesh;
}

void check_rectangle_args(double width, double height, const Eigen::Vector2d& c, double r_outer,
                          int resolution, double r_inner) {
  if (width <= 0.0 || height <= 0.0) throw ConfigError("geometry: rectangle dimensions must be positive");
  if (r_inner <= 0.0) throw ConfigError("geometry: disk radius must be positive");
  if (r_outer < r_inner) throw ConfigError("geometry: annulus outer radius must exceed disk radius");
  if (c.x() - r_outer <= 0.0 || c.x() + r_outer >= width || c.y() - r_outer <= 0.0 ||
      c.y() + r_outer >= height)
    throw ConfigError("geometry: disk/annulus must lie strictly inside the rectangle");
  if (resolution < 1) throw ConfigError("geometry: resolution must be >= 1");
  double cell = width / resolution;
  if (2.0 * r_inner / cell < 4.0)
    throw ConfigError("geometry: resolution too coarse, need >= 4 elements across the disk diameter");
}

}  // namespace

Mesh build_example1(double width, double height, const Eigen::Vector2d& disk_center,
                    double disk_radius, int resolution) {
  check_rectangle_args(width, height, disk_center, disk_radius, resolution, disk_radius);
  int nx = resolution;
  int ny = std::max(1, static_cast<int>(std::lround(resolution * height / width)));
  Mesh mesh = build_rectangle(width, height, nx, ny, [&](const Eigen::Vector2d& c) {
    return (c - disk_center).norm() < disk_radius ? rect::kDisk : rect::kBackground;
  });
  mesh.validate();
  return mesh;
}

Mesh build_example2(double width, double height, const Eigen::Vector2d& disk_center,
                    double disk_radius, double annulus_outer_radius, int resolution) {
  if (annulus_outer_radius <= disk_radius)
    throw ConfigError("geometry: annulus outer radius must exceed the disk radius");
  check_rectangle_args(width, height, disk_center, annulus_outer_radius, resolution, disk_radius);
  int nx = resolution;
  int ny = std::max(1, static_cast<int>(std::lround(resolution * height / width)));
  Mesh mesh = build_rectangle(width, height, nx, ny, [&](const Eigen::Vector2d& c) {
    double d = (c - disk_center).norm();
    if (d < disk_radius) return rect::kDisk;
    if (d < annulus_outer_radius) return rect::kAnnulus;
    return rect::kBackground;
  });
  mesh.validate();
  return mesh;
}

Mesh build_machine_quadrant(const MachineQuadrantSpec& spec) {
  const double r1 = spec.shaft_radius, r2 = spec.rotor_yoke_radius, r3 = spec.air_gap_radius;
  const double r4 = spec.stator_bore_radius, r5 = spec.stator_yoke_radius, r6 = spec.jacket_radius;
  if (!(r1 > 0.0 && r1 < r2 && r2 < r3 && r3 < r4 && r4 < r5 && r5 < r6))
    throw ConfigError("geometry: machine radii must be positive and strictly increasing");
  if (spec.slot_count < 1) throw ConfigError("geometry: slot count must be >= 1");
  if (spec.slot_fill <= 0.0 || spec.slot_fill >= 1.0)
    throw ConfigError("geometry: slot fill must lie in (0,1), slots may not overlap");

  const double t = spec.liner_thickness;
  const double pitch = (std::numbers::pi / 2.0) / spec.slot_count;
  const double half_slot = 0.5 * spec.slot_fill * pitch;  // angular half width [rad]
  const double r_mid = 0.5 * (r4 + r5);
  if (t <= 0.0) throw ConfigError("geometry: liner thickness must be positive");
  if (r5 - r4 <= 3.0 * t)
    throw ConfigError("geometry: slot depth leaves no copper after liner and layer separation");
  if (half_slot * r4 <= t)
    throw ConfigError("geometry: slot width leaves no copper after the side liners");

  // Radial rings: band and slot-layer interfaces are forced onto rings so the
  // centroid classification is exact in r; gaps are subdivided per the resolution hint.
  const std::set<double> forced = {r1, r2, r3, r4, r4 + t, r_mid - 0.5 * t,
                                   r_mid + 0.5 * t, r5 - t, r5, r6};
  std::vector<double> rings;
  double prev = r1;
  rings.push_back(r1);
  for (double rf : forced) {
    if (rf <= prev) continue;
    int n = std::max(1, static_cast<int>(std::lround(spec.radial_resolution * (rf - prev) / (r6 - r1))));
    for (int k = 1; k <= n; ++k) rings.push_back(prev + (rf - prev) * k / n);
    prev = rf;
  }
  const int nr = static_cast<int>(rings.size()) - 1;
  const int nphi = std::max(4, spec.angular_per_slot * spec.slot_count);
  const double dphi = (std::numbers::pi / 2.0) / nphi;

  Mesh mesh;
  mesh.nodes.reserve((nr + 1) * (nphi + 1));
  for (int j = 0; j <= nphi; ++j)
    for (int i = 0; i <= nr; ++i)
      mesh.nodes.emplace_back(rings[i] * std::cos(j * dphi), rings[i] * std::sin(j * dphi));

  auto node = [nr](int i, int j) { return j * (nr + 1) + i; };

  auto region_of = [&](const Eigen::Vector2d& c) {
    double r = c.norm();
    double phi = std::atan2(c.y(), c.x());
    if (r < r2) return machine::kShaft;
    if (r < r3) return machine::kRotorIron;
    if (r < r4) return machine::kAirGap;
    if (r >= r5) return machine::kStatorIron;  // yoke
    int s = std::min(spec.slot_count - 1, std::max(0, static_cast<int>(phi / pitch)));
    double off = std::abs(phi - (s + 0.5) * pitch);
    if (off > half_slot) return machine::kStatorIron;  // tooth
    bool copper_ang = off <= half_slot - t / r;
    if (copper_ang && r > r4 + t && r < r_mid - 0.5 * t) return machine::kCopperLower;
    if (copper_ang && r > r_mid + 0.5 * t && r < r5 - t) return machine::kCopperUpper;
    return machine::kInsulation;
  };

  mesh.triangles.reserve(2 * nr * nphi);
  for (int j = 0; j < nphi; ++j) {
    for (int i = 0; i < nr; ++i) {
      int n00 = node(i, j), n10 = node(i + 1, j);
      int n11 = node(i + 1, j + 1), n01 = node(i, j + 1);
      for (const auto& tri : {std::array<int, 3>{n00, n10, n11}, {n00, n11, n01}}) {
        Eigen::Vector2d c = (mesh.nodes[tri[0]] + mesh.nodes[tri[1]] + mesh.nodes[tri[2]]) / 3.0;
        mesh.triangles.push_back({tri, region_of(c)});
      }
    }
  }

  for (int i = 0; i < nr; ++i)
    mesh.boundary_edges.push_back({{node(i, 0), node(i + 1, 0)}, machine::kCutX});
  for (int j = 0; j < nphi; ++j)
    mesh.boundary_edges.push_back({{node(nr, j), node(nr, j + 1)}, machine::kJacket});
  for (int i = nr; i > 0; --i)
    mesh.boundary_edges.push_back({{node(i, nphi), node(i - 1, nphi)}, machine::kCutY});
  for (int j = nphi; j > 0; --j)
    mesh.boundary_edges.push_back({{node(0, j), node(0, j - 1)}, machine::kBore});

  mesh.validate();
  return mesh;
}

}  // namespace thermocal
