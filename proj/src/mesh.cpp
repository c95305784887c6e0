#include "thermocal/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <set>

#include "thermocal/errors.hpp"

namespace thermocal {

double Mesh::triangle_area(int t) const {
  const Triangle& tri = triangles[t];
  const Eigen::Vector2d& a = nodes[tri.v[0]];
  const Eigen::Vector2d& b = nodes[tri.v[1]];
  const Eigen::Vector2d& c = nodes[tri.v[2]];
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

double Mesh::total_area() const {
  double area = 0.0;
  for (int t = 0; t < triangle_count(); ++t) area += triangle_area(t);
  return area;
}

double Mesh::region_area(int region) const {
  double area = 0.0;
  for (int t = 0; t < triangle_count(); ++t)
    if (triangles[t].region == region) area += triangle_area(t);
  return area;
}

std::vector<int> Mesh::region_tags() const {
  std::set<int> tags;
  for (const Triangle& tri : triangles) tags.insert(tri.region);
  return {tags.begin(), tags.end()};
}

std::vector<int> Mesh::boundary_tags() const {
  std::set<int> tags;
  for (const BoundaryEdge& e : boundary_edges) tags.insert(e.tag);
  return {tags.begin(), tags.end()};
}

Eigen::AlignedBox2d Mesh::bounding_box() const {
  Eigen::AlignedBox2d box;
  for (const Eigen::Vector2d& p : nodes) box.extend(p);
  return box;
}

double Mesh::diameter() const {
  if (nodes.empty()) return 0.0;
  return bounding_box().diagonal().norm();
}

namespace {

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a_u64(std::uint64_t h, std::uint64_t v) { return fnv1a(h, &v, sizeof v); }

std::uint64_t fnv1a_double(std::uint64_t h, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  return fnv1a_u64(h, bits);
}

}  // namespace

std::uint64_t Mesh::content_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  h = fnv1a_u64(h, nodes.size());
  for (const Eigen::Vector2d& p : nodes) {
    h = fnv1a_double(h, p.x());
    h = fnv1a_double(h, p.y());
  }
  h = fnv1a_u64(h, triangles.size());
  for (const Triangle& t : triangles) {
    for (int k = 0; k < 3; ++k) h = fnv1a_u64(h, static_cast<std::uint64_t>(t.v[k]));
    h = fnv1a_u64(h, static_cast<std::uint64_t>(t.region));
  }
  h = fnv1a_u64(h, boundary_edges.size());
  for (const BoundaryEdge& e : boundary_edges) {
    h = fnv1a_u64(h, static_cast<std::uint64_t>(e.v[0]));
    h = fnv1a_u64(h, static_cast<std::uint64_t>(e.v[1]));
    h = fnv1a_u64(h, static_cast<std::uint64_t>(e.tag));
  }
  return h;
}

void Mesh::validate() const {
  const int nn = node_count();
  if (nn < 3 || triangles.empty()) throw ConfigError("mesh: needs at least 3 nodes and 1 triangle");

  for (int t = 0; t < triangle_count(); ++t) {
    for (int k = 0; k < 3; ++k) {
      int v = triangles[t].v[k];
      if (v < 0 || v >= nn) throw ConfigError("mesh: triangle node index out of range");
    }
    if (triangle_area(t) <= 0.0)
      throw ConfigError("mesh: triangle " + std::to_string(t) +
                        " is degenerate or clockwise (non-positive area)");
  }

  // Edge incidence: key is the sorted node pair.
  std::map<std::pair<int, int>, int> edge_count;
  for (const Triangle& tri : triangles) {
    for (int k = 0; k < 3; ++k) {
      int a = tri.v[k], b = tri.v[(k + 1) % 3];
      ++edge_count[std::minmax(a, b)];
    }
  }
  for (const auto& [edge, count] : edge_count) {
    if (count > 2)
      throw ConfigError("mesh: edge shared by more than two triangles (non-manifold)");
  }

  std::set<std::pair<int, int>> boundary_set;
  for (const BoundaryEdge& e : boundary_edges) {
    if (e.v[0] < 0 || e.v[0] >= nn || e.v[1] < 0 || e.v[1] >= nn)
      throw ConfigError("mesh: boundary edge node index out of range");
    auto key = std::minmax(e.v[0], e.v[1]);
    if (!boundary_set.insert(key).second)
      throw ConfigError("mesh: duplicate boundary edge");
    auto it = edge_count.find(key);
    if (it == edge_count.end() || it->second != 1)
      throw ConfigError("mesh: boundary edge does not belong to exactly one triangle");
  }
  for (const auto& [edge, count] : edge_count) {
    if (count == 1 && boundary_set.find(edge) == boundary_set.end())
      throw ConfigError("mesh: triangle edge on the boundary carries no boundary tag");
  }
}

namespace {

// Barycentric coordinates of p in triangle (a,b,c); assumes positive area.
std::array<double, 3> barycentric(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                                  const Eigen::Vector2d& c, const Eigen::Vector2d& p) {
  double det = (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
  double l1 = ((b.x() - p.x()) * (c.y() - p.y()) - (c.x() - p.x()) * (b.y() - p.y())) / det;
  double l2 = ((c.x() - p.x()) * (a.y() - p.y()) - (a.x() - p.x()) * (c.y() - p.y())) / det;
  return {l1, l2, 1.0 - l1 - l2};
}

double point_segment_dist2(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                           const Eigen::Vector2d& b) {
  Eigen::Vector2d ab = b - a;
  double t = ab.squaredNorm() > 0.0 ? (p - a).dot(ab) / ab.squaredNorm() : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * ab)).squaredNorm();
}

}  // namespace

LocateResult locate(const Mesh& mesh, const Eigen::Vector2d& point, double snap_tol) {
  if (snap_tol < 0.0) snap_tol = 1e-9 * mesh.diameter();

  // Exact containment first; then closest triangle for snapping.
  int best = -1;
  double best_dist2 = std::numeric_limits<double>::infinity();
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const Triangle& tri = mesh.triangles[t];
    const Eigen::Vector2d& a = mesh.nodes[tri.v[0]];
    const Eigen::Vector2d& b = mesh.nodes[tri.v[1]];
    const Eigen::Vector2d& c = mesh.nodes[tri.v[2]];
    std::array<double, 3> bc = barycentric(a, b, c, point);
    if (bc[0] >= 0.0 && bc[1] >= 0.0 && bc[2] >= 0.0) return {t, bc};
    double d2 = std::min({point_segment_dist2(point, a, b), point_segment_dist2(point, b, c),
                          point_segment_dist2(point, c, a)});
    if (d2 < best_dist2) {
      best_dist2 = d2;
      best = t;
    }
  }

  if (best < 0 || std::sqrt(best_dist2) > snap_tol)
    throw ConfigError("locate: point (" + std::to_string(point.x()) + ", " +
                      std::to_string(point.y()) + ") lies outside the mesh");

  // Snap: clamp barycentric coordinates of the nearest triangle and renormalize.
  const Triangle& tri = mesh.triangles[best];
  std::array<double, 3> bc = barycentric(mesh.nodes[tri.v[0]], mesh.nodes[tri.v[1]],
                                         mesh.nodes[tri.v[2]], point);
  double sum = 0.0;
  for (double& l : bc) {
    l = std::max(l, 0.0);
    sum += l;
  }
  for (double& l : bc) l /= sum;
  return {best, bc};
}

}  // namespace thermocal
