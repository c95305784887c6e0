#include "thermocal/assembly.hpp"

#include <map>
#include <string>

#include "thermocal/errors.hpp"

namespace thermocal {

void ProblemSpec::validate_against(const Mesh& mesh) const {
  for (int tag : mesh.region_tags()) {
    auto it = region_lambda.find(tag);
    if (it == region_lambda.end())
      throw ConfigError("problem: region tag " + std::to_string(tag) + " has no conductivity");
    if (!(it->second > 0.0))
      throw ConfigError("problem: conductivity for region " + std::to_string(tag) +
                        " must be positive");
  }
  for (int tag : mesh.boundary_tags()) {
    auto it = boundary.find(tag);
    if (it == boundary.end())
      throw ConfigError("problem: boundary tag " + std::to_string(tag) + " has no condition");
    if (it->second.kind == BcKind::Robin && it->second.h < 0.0)
      throw ConfigError("problem: Robin coefficient for boundary " + std::to_string(tag) +
                        " must be non-negative");
  }
}

namespace {

double signed_area2(const Eigen::Vector2d& p0, const Eigen::Vector2d& p1,
                    const Eigen::Vector2d& p2) {
  return (p1.x() - p0.x()) * (p2.y() - p0.y()) - (p2.x() - p0.x()) * (p1.y() - p0.y());
}

}  // namespace

Eigen::Matrix3d element_stiffness(const Eigen::Vector2d& p0, const Eigen::Vector2d& p1,
                                  const Eigen::Vector2d& p2, double lambda) {
  double det = signed_area2(p0, p1, p2);  // 2A
  if (det == 0.0) throw NumericalError("element_stiffness: zero-area triangle");
  // Gradients of the linear shape functions: grad N_i = (b_i, c_i) / (2A).
  double b[3] = {p1.y() - p2.y(), p2.y() - p0.y(), p0.y() - p1.y()};
  double c[3] = {p2.x() - p1.x(), p0.x() - p2.x(), p1.x() - p0.x()};
  Eigen::Matrix3d K;
  double scale = lambda / (2.0 * det);  // lambda / (4A)
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) K(i, j) = scale * (b[i] * b[j] + c[i] * c[j]);
  return K;
}

Eigen::Vector3d element_load(const Eigen::Vector2d& p0, const Eigen::Vector2d& p1,
                             const Eigen::Vector2d& p2, double g) {
  double det = signed_area2(p0, p1, p2);
  if (det == 0.0) throw NumericalError("element_load: zero-area triangle");
  return Eigen::Vector3d::Constant(g * det / 6.0);  // g * A / 3
}

Eigen::Matrix2d robin_edge_matrix(double h, double length) {
  Eigen::Matrix2d M;
  M << 2.0, 1.0, 1.0, 2.0;
  return (h * length / 6.0) * M;
}

Eigen::Vector2d robin_edge_load(double h, double T_ref, double length) {
  return Eigen::Vector2d::Constant(h * T_ref * length / 2.0);
}

namespace {

// Dirichlet nodes with values; later edges win at shared corners (deterministic
// by boundary_edges order). Dirichlet beats Neumann/Robin at a corner node.
void collect_dirichlet(const Mesh& mesh, const ProblemSpec& spec, std::vector<int>& nodes,
                       Eigen::VectorXd& values) {
  std::map<int, double> fixed;
  for (const BoundaryEdge& e : mesh.boundary_edges) {
    const BoundaryCondition& bc = spec.boundary.at(e.tag);
    if (bc.kind != BcKind::Dirichlet) continue;
    fixed[e.v[0]] = bc.value;
    fixed[e.v[1]] = bc.value;
  }
  nodes.clear();
  values.resize(static_cast<Eigen::Index>(fixed.size()));
  Eigen::Index k = 0;
  for (const auto& [n, v] : fixed) {
    nodes.push_back(n);
    values[k++] = v;
  }
}

double element_source(const ProblemSpec& spec, int region, const Eigen::Vector2d& centroid) {
  if (spec.source_field) return spec.source_field(centroid);
  auto it = spec.region_source.find(region);
  return it == spec.region_source.end() ? 0.0 : it->second;
}

}  // namespace

AssembledSystem assemble(const Mesh& mesh, const ProblemSpec& spec) {
  spec.validate_against(mesh);
  const int n = mesh.node_count();

  AssembledSystem sys;
  sys.rhs = Eigen::VectorXd::Zero(n);

  // Upper-triangle triplets only; the final matrix is mirrored, so K is
  // symmetric by construction.
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(6 * mesh.triangle_count() + 3 * mesh.boundary_edges.size());
  auto add = [&trip](int i, int j, double v) {
    if (i <= j)
      trip.emplace_back(i, j, v);
    else
      trip.emplace_back(j, i, v);
  };

  for (const Triangle& tri : mesh.triangles) {
    const Eigen::Vector2d& p0 = mesh.nodes[tri.v[0]];
    const Eigen::Vector2d& p1 = mesh.nodes[tri.v[1]];
    const Eigen::Vector2d& p2 = mesh.nodes[tri.v[2]];
    Eigen::Matrix3d Ke = element_stiffness(p0, p1, p2, spec.region_lambda.at(tri.region));
    for (int i = 0; i < 3; ++i) {
      add(tri.v[i], tri.v[i], Ke(i, i));
      for (int j = i + 1; j < 3; ++j) add(tri.v[i], tri.v[j], Ke(i, j));
    }
    double g = element_source(spec, tri.region, (p0 + p1 + p2) / 3.0);
    if (g != 0.0) {
      Eigen::Vector3d fe = element_load(p0, p1, p2, g);
      for (int i = 0; i < 3; ++i) sys.rhs[tri.v[i]] += fe[i];
    }
  }

  for (const BoundaryEdge& e : mesh.boundary_edges) {
    const BoundaryCondition& bc = spec.boundary.at(e.tag);
    if (bc.kind != BcKind::Robin || bc.h == 0.0) continue;
    sys.has_robin = true;
    double len = (mesh.nodes[e.v[1]] - mesh.nodes[e.v[0]]).norm();
    Eigen::Matrix2d Me = robin_edge_matrix(bc.h, len);
    add(e.v[0], e.v[0], Me(0, 0));
    add(e.v[1], e.v[1], Me(1, 1));
    add(e.v[0], e.v[1], Me(0, 1));
    Eigen::Vector2d fe = robin_edge_load(bc.h, bc.T_ref, len);
    sys.rhs[e.v[0]] += fe[0];
    sys.rhs[e.v[1]] += fe[1];
  }

  Eigen::SparseMatrix<double> upper(n, n);
  upper.setFromTriplets(trip.begin(), trip.end());
  sys.K = upper.selfadjointView<Eigen::Upper>();

  collect_dirichlet(mesh, spec, sys.dirichlet_nodes, sys.dirichlet_values);
  return sys;
}

void assemble_rhs(const Mesh& mesh, const ProblemSpec& spec, Eigen::VectorXd& rhs,
                  std::vector<int>& dirichlet_nodes, Eigen::VectorXd& dirichlet_values) {
  rhs = Eigen::VectorXd::Zero(mesh.node_count());
  for (const Triangle& tri : mesh.triangles) {
    const Eigen::Vector2d& p0 = mesh.nodes[tri.v[0]];
    const Eigen::Vector2d& p1 = mesh.nodes[tri.v[1]];
    const Eigen::Vector2d& p2 = mesh.nodes[tri.v[2]];
    double g = element_source(spec, tri.region, (p0 + p1 + p2) / 3.0);
    if (g == 0.0) continue;
    Eigen::Vector3d fe = element_load(p0, p1, p2, g);
    for (int i = 0; i < 3; ++i) rhs[tri.v[i]] += fe[i];
  }
  for (const BoundaryEdge& e : mesh.boundary_edges) {
    const BoundaryCondition& bc = spec.boundary.at(e.tag);
    if (bc.kind != BcKind::Robin || bc.h == 0.0) continue;
    double len = (mesh.nodes[e.v[1]] - mesh.nodes[e.v[0]]).norm();
    Eigen::Vector2d fe = robin_edge_load(bc.h, bc.T_ref, len);
    rhs[e.v[0]] += fe[0];
    rhs[e.v[1]] += fe[1];
  }
  collect_dirichlet(mesh, spec, dirichlet_nodes, dirichlet_values);
}

}  // namespace thermocal
