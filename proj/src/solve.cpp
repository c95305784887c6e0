#include "thermocal/solve.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <cmath>
#include <string>

#include "thermocal/errors.hpp"

namespace thermocal {

namespace {

// Zero Dirichlet rows/columns, unit diagonal. Keeps symmetry and definiteness.
Eigen::SparseMatrix<double> eliminate(const Eigen::SparseMatrix<double>& K,
                                      const std::vector<char>& is_dirichlet) {
  const int n = static_cast<int>(K.rows());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(K.nonZeros()));
  for (int col = 0; col < K.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(K, col); it; ++it) {
      if (is_dirichlet[it.row()] || is_dirichlet[it.col()]) continue;
      trip.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (int i = 0; i < n; ++i)
    if (is_dirichlet[i]) trip.emplace_back(i, i, 1.0);
  Eigen::SparseMatrix<double> out(n, n);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

// Move known Dirichlet values to the right-hand side.
Eigen::VectorXd reduce_rhs(const Eigen::SparseMatrix<double>& K_full, const Eigen::VectorXd& rhs,
                           const std::vector<int>& dirichlet_nodes,
                           const Eigen::VectorXd& dirichlet_values) {
  Eigen::VectorXd lift = Eigen::VectorXd::Zero(rhs.size());
  for (std::size_t k = 0; k < dirichlet_nodes.size(); ++k)
    lift[dirichlet_nodes[k]] = dirichlet_values[static_cast<Eigen::Index>(k)];
  Eigen::VectorXd out = rhs - K_full * lift;
  for (std::size_t k = 0; k < dirichlet_nodes.size(); ++k)
    out[dirichlet_nodes[k]] = dirichlet_values[static_cast<Eigen::Index>(k)];
  return out;
}

void check_well_posed(const AssembledSystem& sys) {
  if (sys.dirichlet_nodes.empty() && !sys.has_robin)
    throw NumericalError(
        "solve: pure Neumann problem is singular (constant null vector (1,...,1)); "
        "add a Dirichlet or Robin boundary");
}

void check_residual(const Eigen::SparseMatrix<double>& K, const Eigen::VectorXd& u,
                    const Eigen::VectorXd& rhs, double tol) {
  double denom = rhs.norm();
  double res = (K * u - rhs).norm();
  double rel = denom > 0.0 ? res / denom : res;
  if (!(rel <= tol) || !u.allFinite())
    throw NumericalError("solve: residual " + std::to_string(rel) + " exceeds tolerance");
}

}  // namespace

ConductionSolver::ConductionSolver(const Mesh& mesh, const ProblemSpec& spec,
                                   const SolveOptions& opt)
    : mesh_(&mesh), spec_(spec), opt_(opt) {
  sys_ = assemble(mesh, spec);
  check_well_posed(sys_);
  is_dirichlet_.assign(mesh.node_count(), 0);
  for (int d : sys_.dirichlet_nodes) is_dirichlet_[d] = 1;
  K_bc_ = eliminate(sys_.K, is_dirichlet_);

  direct_ = opt.method == SolveOptions::Method::Direct ||
            (opt.method == SolveOptions::Method::Auto && mesh.node_count() <= opt.direct_max_dofs);
  if (direct_) {
    ldlt_ = std::make_unique<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
    ldlt_->compute(K_bc_);
    if (ldlt_->info() != Eigen::Success)
      throw NumericalError("solve: factorization failed (singular or indefinite system)");
  }
}

TemperatureField ConductionSolver::finish(Eigen::VectorXd rhs,
                                          const Eigen::VectorXd& dirichlet_values) const {
  Eigen::VectorXd rhs_bc =
      reduce_rhs(sys_.K, rhs, sys_.dirichlet_nodes, dirichlet_values);

  TemperatureField field;
  field.mesh = mesh_;
  if (direct_) {
    field.u = ldlt_->solve(rhs_bc);
    if (ldlt_->info() != Eigen::Success) throw NumericalError("solve: backsubstitution failed");
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg;
    cg.setTolerance(opt_.cg_rtol);
    cg.setMaxIterations(10LL * mesh_->node_count());
    cg.compute(K_bc_);
    field.u = cg.solve(rhs_bc);
    if (cg.info() != Eigen::Success)
      throw NumericalError("solve: conjugate gradient did not converge within the iteration cap");
  }
  check_residual(K_bc_, field.u, rhs_bc, opt_.residual_tol);

  // Dirichlet nodes carry the prescribed values exactly.
  for (std::size_t k = 0; k < sys_.dirichlet_nodes.size(); ++k)
    field.u[sys_.dirichlet_nodes[k]] = dirichlet_values[static_cast<Eigen::Index>(k)];
  return field;
}

TemperatureField ConductionSolver::solve(const ProblemSpec& rhs_spec) const {
  Eigen::VectorXd rhs;
  std::vector<int> nodes;
  Eigen::VectorXd values;
  assemble_rhs(*mesh_, rhs_spec, rhs, nodes, values);
  if (nodes != sys_.dirichlet_nodes)
    throw ConfigError("solve: boundary-condition kinds changed between construction and solve");
  return finish(std::move(rhs), values);
}

TemperatureField solve(const Mesh& mesh, const AssembledSystem& sys, const SolveOptions& opt) {
  check_well_posed(sys);
  std::vector<char> is_dirichlet(mesh.node_count(), 0);
  for (int d : sys.dirichlet_nodes) is_dirichlet[d] = 1;
  Eigen::SparseMatrix<double> K_bc = eliminate(sys.K, is_dirichlet);
  Eigen::VectorXd rhs_bc =
      reduce_rhs(sys.K, sys.rhs, sys.dirichlet_nodes, sys.dirichlet_values);

  TemperatureField field;
  field.mesh = &mesh;
  bool direct = opt.method == SolveOptions::Method::Direct ||
                (opt.method == SolveOptions::Method::Auto &&
                 mesh.node_count() <= opt.direct_max_dofs);
  if (direct) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(K_bc);
    if (ldlt.info() != Eigen::Success)
      throw NumericalError("solve: factorization failed (singular or indefinite system)");
    field.u = ldlt.solve(rhs_bc);
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg;
    cg.setTolerance(opt.cg_rtol);
    cg.setMaxIterations(10LL * mesh.node_count());
    cg.compute(K_bc);
    field.u = cg.solve(rhs_bc);
    if (cg.info() != Eigen::Success)
      throw NumericalError("solve: conjugate gradient did not converge within the iteration cap");
  }
  check_residual(K_bc, field.u, rhs_bc, opt.residual_tol);
  for (std::size_t k = 0; k < sys.dirichlet_nodes.size(); ++k)
    field.u[sys.dirichlet_nodes[k]] = sys.dirichlet_values[static_cast<Eigen::Index>(k)];
  return field;
}

TemperatureField solve(const Mesh& mesh, const ProblemSpec& spec, const SolveOptions& opt) {
  return solve(mesh, assemble(mesh, spec), opt);
}

Eigen::VectorXd evaluate(const TemperatureField& field, const std::vector<LocateResult>& located) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(located.size()));
  for (std::size_t j = 0; j < located.size(); ++j) {
    const LocateResult& loc = located[j];
    const Triangle& tri = field.mesh->triangles[loc.triangle];
    out[static_cast<Eigen::Index>(j)] = loc.bary[0] * field.u[tri.v[0]] +
                                        loc.bary[1] * field.u[tri.v[1]] +
                                        loc.bary[2] * field.u[tri.v[2]];
  }
  return out;
}

Eigen::VectorXd evaluate(const TemperatureField& field, const SensorSet& sensors) {
  std::vector<LocateResult> located;
  located.reserve(sensors.positions.size());
  for (const Eigen::Vector2d& p : sensors.positions) located.push_back(locate(*field.mesh, p));
  return evaluate(field, located);
}

}  // namespace thermocal
