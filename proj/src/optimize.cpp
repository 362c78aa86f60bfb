#include "pubcast/optimize.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "pubcast/errors.hpp"

namespace pubcast {

namespace {

double safe_eval(const Objective& f, const Eigen::VectorXd& x, int& evals) {
  ++evals;
  const double v = f(x);
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

Eigen::VectorXd gradient(const Objective& f, const Eigen::VectorXd& x, double fx, double rel_step,
                         int& evals) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = rel_step * std::max(1.0, std::abs(x[i]));
    probe[i] = x[i] + h;
    const double up = safe_eval(f, probe, evals);
    probe[i] = x[i] - h;
    const double down = safe_eval(f, probe, evals);
    probe[i] = x[i];
    if (std::isfinite(up) && std::isfinite(down)) {
      g[i] = (up - down) / (2 * h);
    } else if (std::isfinite(up)) {
      g[i] = (up - fx) / h;
    } else if (std::isfinite(down)) {
      g[i] = (fx - down) / h;
    } else {
      g[i] = 0.0;
    }
  }
  return g;
}

}  // namespace

MinimizeResult minimize_bfgs(const Objective& f, const Eigen::VectorXd& x0,
                             const MinimizeOptions& options) {
  MinimizeResult res;
  res.x = x0;
  res.value = safe_eval(f, x0, res.evaluations);
  if (x0.size() == 0) {
    res.converged = true;
    return res;
  }
  if (!std::isfinite(res.value)) {
    throw Error(ErrorCode::NumericalFailure, "objective is not finite at the starting point");
  }

  const Eigen::Index n = x0.size();
  Eigen::MatrixXd inv_hessian = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd g = gradient(f, res.x, res.value, options.difference_step, res.evaluations);
  int resets = 0;

  for (res.iterations = 0; res.iterations < options.max_iterations; ++res.iterations) {
    if (g.lpNorm<Eigen::Infinity>() < options.gradient_tolerance) {
      res.converged = true;
      return res;
    }
    Eigen::VectorXd dir = -inv_hessian * g;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      inv_hessian.setIdentity();
      dir = -g;
      slope = -g.squaredNorm();
    }

    // Armijo backtracking; the first trial step is capped so that a poorly
    // scaled direction cannot jump across the whole parameter space.
    double step = std::min(1.0, 10.0 / std::max(1e-12, dir.lpNorm<Eigen::Infinity>()));
    Eigen::VectorXd trial;
    double f_trial = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int k = 0; k < 60; ++k) {
      trial = res.x + step * dir;
      f_trial = safe_eval(f, trial, res.evaluations);
      if (f_trial <= res.value + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      // No descent along a fresh steepest-descent direction means we are at a
      // minimum up to finite-difference noise.
      if (resets++ > 0 || inv_hessian.isIdentity()) {
        res.converged = true;
        return res;
      }
      inv_hessian.setIdentity();
      continue;
    }
    resets = 0;

    const Eigen::VectorXd s = trial - res.x;
    const Eigen::VectorXd g_new = gradient(f, trial, f_trial, options.difference_step, res.evaluations);
    const Eigen::VectorXd y = g_new - g;
    const double improvement = res.value - f_trial;
    res.x = trial;
    res.value = f_trial;
    g = g_new;

    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      inv_hessian = (I - rho * s * y.transpose()) * inv_hessian * (I - rho * y * s.transpose()) +
                    rho * s * s.transpose();
    }
    if (improvement < options.value_tolerance) {
      res.converged = true;
      ++res.iterations;
      return res;
    }
  }
  throw ConvergenceFailure("BFGS did not converge within " + std::to_string(options.max_iterations) +
                               " iterations",
                           std::vector<double>(res.x.data(), res.x.data() + res.x.size()), res.value);
}

}  // namespace pubcast
