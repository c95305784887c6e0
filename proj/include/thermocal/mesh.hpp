#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace thermocal {

/// First-order triangle with a material region tag.
struct Triangle {
  std::array<int, 3> v;  // node indices, counter-clockwise
  int region = 0;
};

/// Boundary edge with a boundary tag (used to attach boundary conditions).
struct BoundaryEdge {
  std::array<int, 2> v;
  int tag = 0;
};

/// Result of point location: containing triangle plus barycentric coordinates.
struct LocateResult {
  int triangle = -1;
  std::array<double, 3> bary{0.0, 0.0, 0.0};
};

/// Conforming triangle mesh of a planar domain.
///
/// Invariants (checked by validate()):
///  - all indices are in range, triangles are non-degenerate and counter-clockwise,
///  - every boundary edge belongs to exactly one triangle,
///  - every interior edge belongs to exactly two triangles.
struct Mesh {
  std::vector<Eigen::Vector2d> nodes;
  std::vector<Triangle> triangles;
  std::vector<BoundaryEdge> boundary_edges;

  int node_count() const { return static_cast<int>(nodes.size()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }

  /// Signed area of triangle t (positive for counter-clockwise orientation).
  double triangle_area(int t) const;
  double total_area() const;
  /// Sum of areas of triangles carrying the given region tag.
  double region_area(int region) const;
  /// Sorted unique region tags.
  std::vector<int> region_tags() const;
  /// Sorted unique boundary tags.
  std::vector<int> boundary_tags() const;

  Eigen::AlignedBox2d bounding_box() const;
  /// Diagonal of the bounding box; used as the length scale for snap tolerances.
  double diameter() const;

  /// FNV-1a hash over node coordinates, connectivity and tags. Stable across runs;
  /// stored with synthetic data so a sample set can be matched to its mesh.
  std::uint64_t content_hash() const;

  /// Throws ConfigError if any invariant is violated.
  void validate() const;
};

/// Find the triangle containing `point` and its barycentric coordinates.
/// Points within `snap_tol` (default 1e-9 * mesh.diameter()) of the domain are
/// snapped to the nearest point of the nearest triangle; anything farther out
/// throws ConfigError.
LocateResult locate(const Mesh& mesh, const Eigen::Vector2d& point, double snap_tol = -1.0);

/// Named measurement positions.
struct SensorSet {
  std::vector<std::string> ids;
  std::vector<Eigen::Vector2d> positions;

  int size() const { return static_cast<int>(ids.size()); }
};

}  // namespace thermocal
