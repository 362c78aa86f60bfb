#pragma once

#include <Eigen/Dense>
#include <functional>

namespace pubcast {

struct MinimizeOptions {
  // Stop once an accepted step lowers the objective by less than this.
  double value_tolerance = 1e-10;
  // Or once the largest gradient component falls below this.
  double gradient_tolerance = 1e-7;
  int max_iterations = 500;
  // Relative central-difference step.
  double difference_step = 1e-5;
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

// Quasi-Newton (BFGS) minimization with central-difference gradients and an
// Armijo backtracking line search. Non-finite objective values are treated as
// +inf, so the search simply backs away from them. Never returns a point worse
// than x0. Throws ConvergenceFailure (carrying the best iterate) when the
// iteration budget is exhausted.
MinimizeResult minimize_bfgs(const Objective& f, const Eigen::VectorXd& x0,
                             const MinimizeOptions& options = {});

}  // namespace pubcast
