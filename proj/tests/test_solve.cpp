#include <doctest.h>

#include <cmath>
#include <numbers>

#include "thermocal/errors.hpp"
#include "thermocal/geometry.hpp"
#include "thermocal/solve.hpp"

using namespace thermocal;

namespace {

constexpr double kPi = std::numbers::pi;

// Structured unit-square grid, two triangles per cell. Region tag from the
// cell centroid so material layers can be painted; sides tagged 1..4 as
// left/right/bottom/top to match the rectangle meshers.
Mesh grid_mesh(int n, const std::function<int(const Eigen::Vector2d&)>& region =
                          [](const Eigen::Vector2d&) { return 1; }) {
  Mesh m;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) m.nodes.emplace_back(double(i) / n, double(j) / n);
  auto idx = [&](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      Eigen::Vector2d c((i + 0.5) / n, (j + 0.5) / n);
      int tag = region(c);
      m.triangles.push_back({{idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)}, tag});
      m.triangles.push_back({{idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)}, tag});
    }
  for (int i = 0; i < n; ++i) {
    m.boundary_edges.push_back({{idx(i, 0), idx(i + 1, 0)}, 3});
    m.boundary_edges.push_back({{idx(i + 1, n), idx(i, n)}, 4});
  }
  for (int j = 0; j < n; ++j) {
    m.boundary_edges.push_back({{idx(0, j + 1), idx(0, j)}, 1});
    m.boundary_edges.push_back({{idx(n, j), idx(n, j + 1)}, 2});
  }
  m.validate();
  return m;
}

ProblemSpec all_dirichlet_zero(double lambda) {
  ProblemSpec spec;
  spec.region_lambda = {{1, lambda}};
  for (int tag : {1, 2, 3, 4}) spec.boundary[tag] = BoundaryCondition::dirichlet(0.0);
  return spec;
}

// L2 norm of (field - exact) via edge-midpoint quadrature (exact for quadratics).
double l2_error(const TemperatureField& f, const std::function<double(double, double)>& exact) {
  const Mesh& m = *f.mesh;
  double acc = 0.0;
  for (int t = 0; t < m.triangle_count(); ++t) {
    const Triangle& tri = m.triangles[t];
    double A = m.triangle_area(t);
    for (int k = 0; k < 3; ++k) {
      int a = tri.v[k], b = tri.v[(k + 1) % 3];
      Eigen::Vector2d mid = 0.5 * (m.nodes[a] + m.nodes[b]);
      double uh = 0.5 * (f.u(a) + f.u(b));
      double e = uh - exact(mid.x(), mid.y());
      acc += A / 3.0 * e * e;
    }
  }
  return std::sqrt(acc);
}

}  // namespace

TEST_CASE("patch test: an affine temperature field is reproduced exactly") {
  // Plane T = 290 + 3x - 2y imposed through Dirichlet values on every
  // boundary node; zero source. P1 elements must reproduce it to rounding.
  Mesh m = grid_mesh(14);
  ProblemSpec spec;
  spec.region_lambda = {{1, 2.7}};
  for (int tag : {1, 2, 3, 4}) spec.boundary[tag] = BoundaryCondition::neumann();
  AssembledSystem sys = assemble(m, spec);
  auto plane = [](const Eigen::Vector2d& p) { return 290.0 + 3.0 * p.x() - 2.0 * p.y(); };
  std::vector<char> on_boundary(m.nodes.size(), 0);
  for (const BoundaryEdge& e : m.boundary_edges) on_boundary[e.v[0]] = on_boundary[e.v[1]] = 1;
  for (int i = 0; i < m.node_count(); ++i)
    if (on_boundary[i]) {
      sys.dirichlet_nodes.push_back(i);
    }
  sys.dirichlet_values.resize(static_cast<int>(sys.dirichlet_nodes.size()));
  for (std::size_t k = 0; k < sys.dirichlet_nodes.size(); ++k)
    sys.dirichlet_values(static_cast<int>(k)) = plane(m.nodes[sys.dirichlet_nodes[k]]);

  TemperatureField f = solve(m, sys);
  double max_err = 0.0;
  for (int i = 0; i < m.node_count(); ++i)
    max_err = std::max(max_err, std::abs(f.u(i) - plane(m.nodes[i])));
  CHECK(max_err <= 1e-10);
}

TEST_CASE("all-Robin equilibrium: zero source relaxes to the ambient level") {
  Mesh m = grid_mesh(10);
  ProblemSpec spec;
  spec.region_lambda = {{1, 3.0}};
  for (int tag : {1, 2, 3, 4}) spec.boundary[tag] = BoundaryCondition::robin(4.0, 317.0);
  TemperatureField f = solve(m, spec);
  CHECK((f.u.array() - 317.0).abs().maxCoeff() <= 1e-9);
}

TEST_CASE("1D slab with a Robin face matches the series-resistance solution") {
  // Left Dirichlet T_L, right Robin (h, Tinf), adiabatic top/bottom:
  // T(x) = T_L + (Tinf - T_L) * h x / (lambda + h). Linear, so nodal-exact.
  const double lambda = 2.0, h = 5.0, T_L = 350.0, Tinf = 300.0;
  Mesh m = grid_mesh(12);
  ProblemSpec spec;
  spec.region_lambda = {{1, lambda}};
  spec.boundary = {{1, BoundaryCondition::dirichlet(T_L)},
                   {2, BoundaryCondition::robin(h, Tinf)},
                   {3, BoundaryCondition::neumann()},
                   {4, BoundaryCondition::neumann()}};
  TemperatureField f = solve(m, spec);
  for (int i = 0; i < m.node_count(); ++i) {
    double exact = T_L + (Tinf - T_L) * h * m.nodes[i].x() / (lambda + h);
    CHECK(f.u(i) == doctest::Approx(exact).epsilon(1e-10));
  }
}

TEST_CASE("two-layer slab: interface temperature follows the resistance ratio") {
  const double l1 = 1.0, l2 = 4.0, T_L = 400.0, T_R = 300.0;
  Mesh m = grid_mesh(16, [](const Eigen::Vector2d& c) { return c.x() < 0.5 ? 1 : 2; });
  ProblemSpec spec;
  spec.region_lambda = {{1, l1}, {2, l2}};
  spec.boundary = {{1, BoundaryCondition::dirichlet(T_L)},
                   {2, BoundaryCondition::dirichlet(T_R)},
                   {3, BoundaryCondition::neumann()},
                   {4, BoundaryCondition::neumann()}};
  TemperatureField f = solve(m, spec);

  // piecewise-linear exact profile lies in the FE space
  double R1 = 0.5 / l1, R2 = 0.5 / l2;
  double q = (T_L - T_R) / (R1 + R2);
  double Ti = T_L - q * R1;
  for (int i = 0; i < m.node_count(); ++i) {
    double x = m.nodes[i].x();
    double exact = x < 0.5 ? T_L + (Ti - T_L) * x / 0.5 : Ti + (T_R - Ti) * (x - 0.5) / 0.5;
    CHECK(f.u(i) == doctest::Approx(exact).epsilon(1e-10));
  }
}

TEST_CASE("manufactured solution converges at second order") {
  auto exact = [](double x, double y) { return std::sin(kPi * x) * std::sin(kPi * y); };
  std::vector<double> errs;
  for (int n : {8, 16, 32}) {
    Mesh m = grid_mesh(n);
    ProblemSpec spec = all_dirichlet_zero(1.0);
    spec.source_field = [&](const Eigen::Vector2d& p) {
      return 2.0 * kPi * kPi * exact(p.x(), p.y());
    };
    errs.push_back(l2_error(solve(m, spec), exact));
  }
  for (std::size_t k = 0; k + 1 < errs.size(); ++k) {
    double order = std::log2(errs[k] / errs[k + 1]);
    CHECK(order > 1.8);
    CHECK(order < 2.2);
  }
}

TEST_CASE("discrete energy balance: Robin outflow equals injected power") {
  Mesh m = build_example1(1.0, 1.0, {0.5, 0.5}, 0.2, 24);
  const double g = 4000.0, h = 9.0, T0 = 293.15;
  ProblemSpec spec;
  spec.region_lambda = {{1, 1.0}, {2, 11.0}};
  spec.region_source = {{2, g}};
  for (int tag : {1, 2, 3, 4}) spec.boundary[tag] = BoundaryCondition::robin(h, T0);
  TemperatureField f = solve(m, spec);

  double outflow = 0.0;
  for (const BoundaryEdge& e : m.boundary_edges) {
    double L = (m.nodes[e.v[0]] - m.nodes[e.v[1]]).norm();
    outflow += h * L * (0.5 * (f.u(e.v[0]) + f.u(e.v[1])) - T0);
  }
  double injected = g * m.region_area(2);
  CHECK(outflow == doctest::Approx(injected).epsilon(1e-10));
}

TEST_CASE("maximum principle holds without sources") {
  Mesh m = grid_mesh(12);
  ProblemSpec spec;
  spec.region_lambda = {{1, 1.0}};
  spec.boundary = {{1, BoundaryCondition::dirichlet(280.0)},
                   {2, BoundaryCondition::dirichlet(330.0)},
                   {3, BoundaryCondition::neumann()},
                   {4, BoundaryCondition::neumann()}};
  TemperatureField f = solve(m, spec);
  CHECK(f.u.minCoeff() >= 280.0 - 1e-9);
  CHECK(f.u.maxCoeff() <= 330.0 + 1e-9);
}

TEST_CASE("solution is linear in the source for fixed homogeneous BCs") {
  Mesh m = grid_mesh(10);
  ProblemSpec a = all_dirichlet_zero(2.0);
  a.region_source = {{1, 100.0}};
  ProblemSpec b = all_dirichlet_zero(2.0);
  b.region_source = {{1, 300.0}};
  TemperatureField fa = solve(m, a), fb = solve(m, b);
  CHECK((fb.u - 3.0 * fa.u).cwiseAbs().maxCoeff() <= 1e-9 * fa.u.cwiseAbs().maxCoeff());
}

TEST_CASE("direct and conjugate-gradient paths agree") {
  Mesh m = build_example1(1.0, 1.0, {0.5, 0.5}, 0.2, 32);
  ProblemSpec spec;
  spec.region_lambda = {{1, 1.0}, {2, 10.0}};
  spec.region_source = {{2, 2500.0 / m.region_area(2)}};
  spec.boundary = {{1, BoundaryCondition::dirichlet(293.15)},
                   {2, BoundaryCondition::dirichlet(293.15)},
                   {3, BoundaryCondition::neumann()},
                   {4, BoundaryCondition::neumann()}};
  SolveOptions direct, cg;
  direct.method = SolveOptions::Method::Direct;
  cg.method = SolveOptions::Method::Cg;
  TemperatureField fd = solve(m, spec, direct);
  TemperatureField fc = solve(m, spec, cg);
  double scale = fd.u.cwiseAbs().maxCoeff();
  CHECK((fd.u - fc.u).cwiseAbs().maxCoeff() <= 1e-8 * scale);
}

TEST_CASE("pure Neumann problems are rejected with the null-vector hint") {
  Mesh m = grid_mesh(4);
  ProblemSpec spec;
  spec.region_lambda = {{1, 1.0}};
  for (int tag : {1, 2, 3, 4}) spec.boundary[tag] = BoundaryCondition::neumann();
  CHECK_THROWS_WITH_AS(solve(m, spec), doctest::Contains("(1,...,1)"), NumericalError);
}

TEST_CASE("factorize-once solver reproduces fresh solves for changed loads") {
  Mesh m = build_example1(1.0, 1.0, {0.5, 0.5}, 0.2, 16);
  ProblemSpec spec;
  spec.region_lambda = {{1, 1.0}, {2, 5.0}};
  spec.region_source = {{2, 1000.0}};
  spec.boundary = {{1, BoundaryCondition::dirichlet(293.15)},
                   {2, BoundaryCondition::robin(15.0, 293.15)},
                   {3, BoundaryCondition::neumann()},
                   {4, BoundaryCondition::neumann()}};
  ConductionSolver solver(m, spec);

  // same spec: identical to a fresh solve
  TemperatureField base = solve(m, spec);
  CHECK((solver.solve().u - base.u).cwiseAbs().maxCoeff() <= 1e-12 * base.u.cwiseAbs().maxCoeff());

  // new source level and new boundary levels, conductivities unchanged
  ProblemSpec hot = spec;
  hot.region_source = {{2, 4000.0}};
  hot.boundary[1] = BoundaryCondition::dirichlet(313.15);
  hot.boundary[2] = BoundaryCondition::robin(15.0, 313.15);
  TemperatureField fresh = solve(m, hot);
  CHECK((solver.solve(hot).u - fresh.u).cwiseAbs().maxCoeff() <=
        1e-12 * fresh.u.cwiseAbs().maxCoeff());
}

TEST_CASE("evaluate interpolates barycentrically and is exact at nodes") {
  Mesh m = grid_mesh(6);
  // linear field: interpolation must be exact everywhere
  TemperatureField f{&m, Eigen::VectorXd(m.node_count())};
  for (int i = 0; i < m.node_count(); ++i)
    f.u(i) = 5.0 + 2.0 * m.nodes[i].x() - 7.0 * m.nodes[i].y();

  SensorSet sensors;
  sensors.ids = {"node", "interior", "edge_mid"};
  sensors.positions = {m.nodes[10], {0.37, 0.81}, {0.5 / 6.0, 0.0}};
  Eigen::VectorXd v = evaluate(f, sensors);
  CHECK(v(0) == doctest::Approx(f.u(10)).epsilon(1e-14));
  CHECK(v(1) == doctest::Approx(5.0 + 2.0 * 0.37 - 7.0 * 0.81).epsilon(1e-13));
  CHECK(v(2) == doctest::Approx(5.0 + 2.0 * 0.5 / 6.0).epsilon(1e-13));

  // pre-located form matches
  std::vector<LocateResult> loc;
  for (const auto& p : sensors.positions) loc.push_back(locate(m, p));
  Eigen::VectorXd v2 = evaluate(f, loc);
  CHECK((v - v2).cwiseAbs().maxCoeff() == 0.0);
}
