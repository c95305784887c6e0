#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

namespace thermocal::opt {

struct Options {
  double tol = 1e-6;  // threshold for both relative cost decrease and projected gradient
  int max_iter = 500;
  int memory = 10;  // stored curvature pairs
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  int max_line_search = 30;
  // Observer invoked at the start point and after every accepted iterate.
  std::function<void(const Eigen::VectorXd& x, double f)> on_accept;
};

enum class Termination { Converged, MaxIterations, LineSearchFailure };

const char* to_string(Termination t);

struct Result {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd gradient;
  int iterations = 0;
  int evaluations = 0;
  Termination status = Termination::MaxIterations;
  std::vector<double> trace;  // accepted costs, starting with f(x0); non-increasing
  std::string message;
};

/// Objective evaluating f(x) and writing the gradient.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

/// Bound-constrained limited-memory quasi-Newton minimization:
/// gradient projection identifies the active set, a two-loop recursion on the
/// free variables builds the search direction, and a strong-Wolfe line search
/// (capped at the first bound crossing) selects the step.
/// Terminates when |f_k - f_{k-1}| / max(1, |f_k|) < tol, or the projected
/// gradient infinity norm drops below tol, or after max_iter iterations.
Result minimize(const Objective& fg, const Eigen::VectorXd& x0, const Eigen::VectorXd& lower,
                const Eigen::VectorXd& upper, const Options& opt = {});

}  // namespace thermocal::opt
