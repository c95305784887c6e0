#pragma once

#include <Eigen/SparseCholesky>
#include <memory>

#include "thermocal/assembly.hpp"
#include "thermocal/problem.hpp"

namespace thermocal {

struct SolveOptions {
  enum class Method { Auto, Direct, Cg };
  Method method = Method::Auto;
  int direct_max_dofs = 200000;  // Auto switches to CG above this
  double cg_rtol = 1e-12;
  double residual_tol = 1e-10;  // post-solve check on the reduced system
};

/// Solve one assembled system. Throws NumericalError for singular/ill-posed
/// systems (e.g. pure-Neumann, whose null vector is (1,...,1)) and when the
/// residual check fails.
TemperatureField solve(const Mesh& mesh, const AssembledSystem& sys,
                       const SolveOptions& opt = {});

/// Convenience: assemble + solve.
TemperatureField solve(const Mesh& mesh, const ProblemSpec& spec, const SolveOptions& opt = {});

/// Barycentric interpolation at sensor positions; exact at nodes.
Eigen::VectorXd evaluate(const TemperatureField& field, const SensorSet& sensors);

/// Same with pre-located sensors (avoids repeated point location).
Eigen::VectorXd evaluate(const TemperatureField& field, const std::vector<LocateResult>& located);

/// Factorizes the stiffness matrix once and re-solves for varying sources and
/// boundary levels (conductivities and Robin coefficients stay fixed).
/// One calibration cost evaluation uses one of these across all operating points.
class ConductionSolver {
 public:
  ConductionSolver(const Mesh& mesh, const ProblemSpec& spec, const SolveOptions& opt = {});

  /// Solve with sources/boundary values from `rhs_spec`; its lambda and Robin h
  /// must equal the constructor spec's (unchecked, same-family contract).
  TemperatureField solve(const ProblemSpec& rhs_spec) const;
  TemperatureField solve() const { return solve(spec_); }

  const AssembledSystem& system() const { return sys_; }

 private:
  TemperatureField finish(Eigen::VectorXd rhs, const Eigen::VectorXd& dirichlet_values) const;

  const Mesh* mesh_;
  ProblemSpec spec_;
  AssembledSystem sys_;
  Eigen::SparseMatrix<double> K_bc_;  // Dirichlet-eliminated, SPD
  std::vector<char> is_dirichlet_;
  std::unique_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> ldlt_;
  bool direct_ = true;
  SolveOptions opt_;
};

}  // namespace thermocal
