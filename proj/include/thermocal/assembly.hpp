#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <vector>

#include "thermocal/problem.hpp"

namespace thermocal {

/// Stiffness contribution of one linear triangle:
/// K_ij = lambda/(4A) * (b_i b_j + c_i c_j) with the usual shape-gradient
/// coefficients b_i, c_i. Symmetric with zero row sums.
Eigen::Matrix3d element_stiffness(const Eigen::Vector2d& p0, const Eigen::Vector2d& p1,
                                  const Eigen::Vector2d& p2, double lambda);

/// Load contribution of a constant source g over one triangle: g*A/3 per node.
Eigen::Vector3d element_load(const Eigen::Vector2d& p0, const Eigen::Vector2d& p1,
                             const Eigen::Vector2d& p2, double g);

/// Exact Robin edge blocks for linear shape functions on an edge of length L:
/// mass block h*L/6*[[2,1],[1,2]], load h*T_ref*L/2*(1,1).
Eigen::Matrix2d robin_edge_matrix(double h, double length);
Eigen::Vector2d robin_edge_load(double h, double T_ref, double length);

/// Global system before Dirichlet elimination. K includes the Robin mass terms,
/// rhs the volumetric loads plus the Robin ambient terms.
struct AssembledSystem {
  Eigen::SparseMatrix<double> K;
  Eigen::VectorXd rhs;
  std::vector<int> dirichlet_nodes;   // ascending
  Eigen::VectorXd dirichlet_values;   // aligned with dirichlet_nodes
  bool has_robin = false;
};

/// Assemble the full system. Throws ConfigError on missing tag coverage or
/// non-positive lambda, NumericalError on degenerate triangles.
AssembledSystem assemble(const Mesh& mesh, const ProblemSpec& spec);

/// Rhs and Dirichlet values only; used to re-solve with changed sources or
/// boundary levels while keeping a factorized stiffness matrix.
void assemble_rhs(const Mesh& mesh, const ProblemSpec& spec, Eigen::VectorXd& rhs,
                  std::vector<int>& dirichlet_nodes, Eigen::VectorXd& dirichlet_values);

}  // namespace thermocal
