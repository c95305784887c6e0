#include "thermocal/lbfgsb.hpp"

#include <cmath>
#include <deque>
#include <limits>

#include "thermocal/errors.hpp"

namespace thermocal::opt {

const char* to_string(Termination t) {
  switch (t) {
    case Termination::Converged: return "Converged";
    case Termination::MaxIterations: return "MaxIterations";
    case Termination::LineSearchFailure: return "LineSearchFailure";
  }
  return "Unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Pair {
  Eigen::VectorXd s, y;
  double rho;
};

// Components held at a bound by the gradient sign; stepping along -g would
// leave the feasible box there.
Eigen::ArrayXd active_mask(const Eigen::VectorXd& x, const Eigen::VectorXd& g,
                           const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  Eigen::ArrayXd free_mask(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double slack = 1e-10 * (hi[i] - lo[i]);
    bool at_lo = x[i] <= lo[i] + slack && g[i] > 0.0;
    bool at_hi = x[i] >= hi[i] - slack && g[i] < 0.0;
    free_mask[i] = (at_lo || at_hi) ? 0.0 : 1.0;
  }
  return free_mask;
}

// Two-loop recursion with the initial Hessian gamma*I, restricted to the free
// subspace by masking both the input gradient and the output direction.
Eigen::VectorXd two_loop(const std::deque<Pair>& pairs, double gamma, const Eigen::VectorXd& pg,
                         const Eigen::ArrayXd& free_mask) {
  Eigen::VectorXd q = pg;
  std::vector<double> alpha(pairs.size());
  for (int i = static_cast<int>(pairs.size()) - 1; i >= 0; --i) {
    alpha[i] = pairs[i].rho * pairs[i].s.dot(q);
    q -= alpha[i] * pairs[i].y;
  }
  q *= gamma;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    double beta = pairs[i].rho * pairs[i].y.dot(q);
    q += (alpha[i] - beta) * pairs[i].s;
  }
  return (q.array() * free_mask).matrix();
}

struct Eval {
  double f;
  Eigen::VectorXd g;
};

}  // namespace

Result minimize(const Objective& fg, const Eigen::VectorXd& x0, const Eigen::VectorXd& lower,
                const Eigen::VectorXd& upper, const Options& opt) {
  const Eigen::Index n = x0.size();
  if (lower.size() != n || upper.size() != n)
    throw ConfigError("minimize: bound dimensions do not match the start point");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(lower[i] < upper[i])) throw ConfigError("minimize: lower bound must be below upper");
    if (x0[i] < lower[i] || x0[i] > upper[i])
      throw ConfigError("minimize: infeasible start point (outside bounds)");
  }

  Result res;
  res.x = x0;
  res.gradient.resize(n);
  auto eval = [&](const Eigen::VectorXd& x) {
    Eval e;
    e.g.resize(n);
    e.f = fg(x, e.g);
    ++res.evaluations;
    return e;
  };

  Eval cur = eval(res.x);
  if (!std::isfinite(cur.f)) throw NumericalError("minimize: objective not finite at start");
  res.f = cur.f;
  res.gradient = cur.g;
  res.trace.push_back(cur.f);
  if (opt.on_accept) opt.on_accept(res.x, res.f);

  std::deque<Pair> pairs;
  double gamma = 1.0;
  bool retried_steepest = false;

  for (int iter = 0; iter < opt.max_iter; ++iter) {
    Eigen::ArrayXd free_mask = active_mask(res.x, cur.g, lower, upper);
    Eigen::VectorXd pg = (cur.g.array() * free_mask).matrix();
    if (pg.lpNorm<Eigen::Infinity>() < opt.tol) {
      res.status = Termination::Converged;
      res.message = "projected gradient below tolerance";
      res.iterations = iter;
      return res;
    }

    Eigen::VectorXd d = -two_loop(pairs, gamma, pg, free_mask);
    // The model direction may point out of the box at a coordinate that sits
    // on a bound the gradient would leave; zero those components so a feasible
    // step exists.
    for (Eigen::Index i = 0; i < n; ++i) {
      double slack = 1e-12 * (upper[i] - lower[i]);
      if ((res.x[i] <= lower[i] + slack && d[i] < 0.0) ||
          (res.x[i] >= upper[i] - slack && d[i] > 0.0))
        d[i] = 0.0;
    }
    double dg = d.dot(cur.g);
    if (!(dg < -1e-14 * d.norm() * cur.g.norm())) {  // not a reliable descent direction
      pairs.clear();
      d = -pg;
      dg = d.dot(cur.g);
    }

    // Largest feasible step along d.
    double alpha_bd = kInf;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (d[i] > 0.0)
        alpha_bd = std::min(alpha_bd, (upper[i] - res.x[i]) / d[i]);
      else if (d[i] < 0.0)
        alpha_bd = std::min(alpha_bd, (lower[i] - res.x[i]) / d[i]);
    }
    if (!(alpha_bd > 0.0)) {
      res.status = Termination::LineSearchFailure;
      res.message = "no feasible step along the search direction";
      res.iterations = iter;
      return res;
    }

    // Strong-Wolfe search on phi(a) = f(x + a d), a in (0, alpha_bd].
    const double f0 = cur.f, dphi0 = dg;
    double a_prev = 0.0, f_prev = f0;
    double a = std::min(1.0, alpha_bd);
    double a_lo = -1.0, a_hi = -1.0, f_lo = 0.0;
    bool bracketed = false, accepted = false;
    Eval trial;
    double a_acc = 0.0;

    auto phi = [&](double alpha) {
      trial = eval(res.x + alpha * d);
      if (!std::isfinite(trial.f)) trial.f = kInf;
      return trial.f;
    };

    for (int ls = 0; ls < opt.max_line_search; ++ls) {
      if (!bracketed) {
        double fa = phi(a);
        double dphia = trial.g.dot(d);
        if (fa > f0 + opt.wolfe_c1 * a * dphi0 || (ls > 0 && fa >= f_prev)) {
          a_lo = a_prev; f_lo = f_prev;
          a_hi = a;
          bracketed = true;
          continue;
        }
        if (std::abs(dphia) <= -opt.wolfe_c2 * dphi0) {
          accepted = true; a_acc = a;
          break;
        }
        if (dphia >= 0.0) {
          a_lo = a; f_lo = fa;
          a_hi = a_prev;
          bracketed = true;
          continue;
        }
        if (a >= alpha_bd * (1.0 - 1e-12)) {
          // Bound reached with Armijo satisfied: accept, the bound goes active.
          accepted = true; a_acc = a;
          break;
        }
        a_prev = a; f_prev = fa;
        a = std::min(2.0 * a, alpha_bd);
      } else {
        // Zoom by bisection of the bracket [a_lo, a_hi].
        a = a_lo + 0.5 * (a_hi - a_lo);
        double fa = phi(a);
        double dphia = trial.g.dot(d);
        if (fa > f0 + opt.wolfe_c1 * a * dphi0 || fa >= f_lo) {
          a_hi = a;
        } else {
          if (std::abs(dphia) <= -opt.wolfe_c2 * dphi0) {
            accepted = true; a_acc = a;
            break;
          }
          if (dphia * (a_hi - a_lo) >= 0.0) a_hi = a_lo;
          a_lo = a; f_lo = fa;
        }
        if (std::abs(a_hi - a_lo) < 1e-16 * std::max(1.0, std::abs(a_lo))) {
          if (a_lo > 0.0 && f_lo < f0) {  // fall back to the best Armijo point
            a = a_lo;
            phi(a);
            accepted = true; a_acc = a;
          }
          break;
        }
      }
    }
    if (accepted && !(trial.f < f0)) accepted = false;

    if (!accepted) {
      if (!pairs.empty() && !retried_steepest) {
        // Memory may be stale; drop it and retry this iteration with -pg.
        pairs.clear();
        retried_steepest = true;
        continue;
      }
      res.status = Termination::LineSearchFailure;
      res.message = "line search found no acceptable step";
      res.iterations = iter;
      return res;
    }
    retried_steepest = false;

    Eigen::VectorXd x_new = res.x + a_acc * d;
    // Snap onto bounds reached by the capped step so the active-set test sees them.
    for (Eigen::Index i = 0; i < n; ++i) {
      double slack = 1e-12 * (upper[i] - lower[i]);
      if (x_new[i] <= lower[i] + slack) x_new[i] = lower[i];
      if (x_new[i] >= upper[i] - slack) x_new[i] = upper[i];
    }

    Eigen::VectorXd s = x_new - res.x;
    Eigen::VectorXd y = trial.g - cur.g;
    double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      pairs.push_back({s, y, 1.0 / sy});
      if (static_cast<int>(pairs.size()) > opt.memory) pairs.pop_front();
      gamma = sy / y.squaredNorm();
    }

    double f_prev_accepted = res.f;
    res.x = x_new;
    res.f = trial.f;
    res.gradient = trial.g;
    cur = trial;
    res.trace.push_back(res.f);
    res.iterations = iter + 1;
    if (opt.on_accept) opt.on_accept(res.x, res.f);

    if (std::abs(f_prev_accepted - res.f) / std::max(1.0, std::abs(res.f)) < opt.tol) {
      res.status = Termination::Converged;
      res.message = "relative cost decrease below tolerance";
      return res;
    }
  }

  res.status = Termination::MaxIterations;
  res.message = "iteration limit reached";
  res.iterations = opt.max_iter;
  return res;
}

}  // namespace thermocal::opt
