#pragma once

// Quasi-Newton (BFGS) minimizer for objectives whose gradients we can only
// get by central differences.  Infeasible points may return +inf; the line
// search treats them as failed sufficient-decrease trials and retreats.

#include <Eigen/Dense>

#include <functional>
#include <string>

namespace longmed {

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct OptimOptions {
  double grad_tol = 1e-6;  // infinity norm of the central-difference gradient
  int max_iter = 500;
};

struct OptimResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd grad;
  int iterations = 0;
  long long fevals = 0;
  bool grad_converged = false;
  std::string message;
};

// Central-difference gradient with per-coordinate step cbrt(eps)*max(1,|x_i|).
// Falls back to a one-sided difference when a probe point is infeasible.
Eigen::VectorXd central_gradient(const Objective& f, const Eigen::VectorXd& x,
                                 double fx, long long* fevals = nullptr);

OptimResult minimize_bfgs(const Objective& f, const Eigen::VectorXd& x0,
                          const OptimOptions& opt = {});

}  // namespace longmed
