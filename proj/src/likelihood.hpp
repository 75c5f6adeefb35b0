#pragma once

// Full-information likelihood: each individual contributes a multivariate
// normal log-density under the moments implied by their own measurement
// occasions.  Evaluations exploit the low-rank structure
// Sigma_i = Lambda_i G Lambda_i' + Theta (G = joint factor covariance, Theta
// block-diagonal per occasion), so one evaluation costs O(n J) with tiny
// fixed-size factor algebra instead of O(n (3J)^3).
//
// Requires strictly positive-definite factor and residual blocks; any
// candidate violating that yields -inf ("penalized infeasible"), which the
// optimizer treats as a rejected step.  Fitting always goes through the
// unconstrained transform, so -inf only appears at extreme trial points.

#include "dataset.hpp"
#include "growth_model.hpp"

namespace longmed {

class LoglikEvaluator {
 public:
  explicit LoglikEvaluator(const Dataset& data);

  Model model() const { return model_; }
  int n() const { return n_; }
  int J() const { return J_; }
  // observation coordinates per individual
  int obs_dim() const;

  // Sum over individuals of log N(z_i; mean_i, cov_i); -inf when infeasible.
  double sum_loglik(const Eigen::VectorXd& natural_packed) const;
  double sum_loglik(const ParamsUnivariate& p) const;
  double sum_loglik(const ParamsModel1& p) const;
  double sum_loglik(const ParamsModel2& p) const;

 private:
  Model model_;
  int n_ = 0;
  int J_ = 0;
  // column i = individual i (times and values per process)
  Eigen::MatrixXd xt_, xv_, mt_, mv_, yt_, yv_;
  Eigen::VectorXd x_;  // scalar covariate (Model 1)
};

// Convenience wrappers building a throwaway evaluator.
double fiml_loglik(const ParamsUnivariate& p, const Dataset& data);
double fiml_loglik(const ParamsModel1& p, const Dataset& data);
double fiml_loglik(const ParamsModel2& p, const Dataset& data);

}  // namespace longmed
