#pragma once

// Maximum-likelihood fitting: crude per-process starting values, BFGS on the
// unconstrained space with a jittered multi-start retry protocol, and
// standard errors from the natural-space observed information.

#include <cstdint>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "effects.hpp"
#include "growth_model.hpp"

namespace longmed {

struct FitOptions {
  int max_starts = 10;
  // Infinity norm on the per-individual-scaled objective gradient.  The
  // gradient is central-difference and the spline kinks keep its noise floor
  // near 1e-6 for some datasets, so the default stays a decade above that.
  double grad_tol = 1e-5;
  int max_iter = 500;
  std::uint64_t seed = 1;  // drives restart jitter only
};

struct ParamSummary {
  std::string name;
  double est = 0.0;
  double se = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool se_ok = false;
};

struct FitResult {
  Model model = Model::kModel1;
  bool converged = false;
  int starts_used = 0;
  double loglik = 0.0;           // maximized sum log-likelihood
  double grad_norm = 0.0;        // final gradient infinity norm
  Eigen::VectorXd natural;       // packed natural-space estimates
  Eigen::MatrixXd param_cov;     // inverse observed information
  bool cov_ok = false;
  std::vector<ParamSummary> params;
  std::vector<EffectEstimate> effects;         // empty for univariate fits
  std::vector<DerivedEstimate> derived_means;  // empty for univariate fits
  std::string message;
  int n = 0;
  int J = 0;
};

// Crude trajectory-split starting values (knot at the median observed time,
// segment slopes from per-individual least squares, coefficients zero).
Eigen::VectorXd starting_values(const Dataset& data, Model model);

FitResult fit(const Dataset& data, Model model, const FitOptions& options = {});

}  // namespace longmed
