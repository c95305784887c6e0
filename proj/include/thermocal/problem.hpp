#pragma once

#include <Eigen/Core>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "thermocal/mesh.hpp"

namespace thermocal {

enum class BcKind { Dirichlet, Neumann, Robin };

/// Condition attached to one boundary tag.
/// Dirichlet: prescribed temperature `value` [K];
/// Neumann: zero normal flux (adiabatic), no data;
/// Robin: convective exchange with coefficient h [W/(m^2 K)] against T_ref [K].
struct BoundaryCondition {
  BcKind kind = BcKind::Neumann;
  double value = 0.0;
  double h = 0.0;
  double T_ref = 0.0;

  static BoundaryCondition dirichlet(double T) { return {BcKind::Dirichlet, T, 0.0, 0.0}; }
  static BoundaryCondition neumann() { return {}; }
  static BoundaryCondition robin(double h, double T_ref) { return {BcKind::Robin, 0.0, h, T_ref}; }
};

/// One steady-state measurement condition: total injected power P over copper
/// volume V gives the volumetric source g = P/V; T0 is the jacket/ambient level.
struct OperatingPoint {
  std::string id;
  double P_W = 0.0;
  double V_m3 = 1.0;
  double T0_K = 293.15;

  double source_density() const { return P_W / V_m3; }
};

/// Materials, sources and boundary conditions keyed by mesh tags.
struct ProblemSpec {
  std::map<int, double> region_lambda;  // W/(m K), required for every region tag
  std::map<int, double> region_source;  // W/m^3, missing tags mean zero
  std::map<int, BoundaryCondition> boundary;

  // Optional spatially varying source; when set it overrides region_source and
  // is sampled at element centroids (one-point quadrature).
  std::function<double(const Eigen::Vector2d&)> source_field;

  /// Coverage and positivity checks against a concrete mesh. Throws ConfigError.
  void validate_against(const Mesh& mesh) const;
};

/// Nodal temperature coefficients over a mesh.
struct TemperatureField {
  const Mesh* mesh = nullptr;
  Eigen::VectorXd u;  // K, length = node count
};

}  // namespace thermocal
