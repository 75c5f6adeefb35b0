#pragma once

// Direct, indirect, and total effects among growth factors, with
// delta-method standard errors.  Every mediated path is a product of two
// regression coefficients; totals add the direct coefficient to all mediated
// paths ending at the same outcome factor.  Gradients are analytic (product
// rule), so SE(g) = sqrt(grad' Cov grad) is exact given the parameter
// covariance.

#include <string>
#include <utility>
#include <vector>

#include "growth_model.hpp"

namespace longmed {

enum class EffectKind { kDirect, kIndirect, kTotal };

const char* effect_kind_name(EffectKind kind);

// One catalog entry over the canonical packed parameter vector:
// value = natural[direct_idx] + sum over products of natural[a]*natural[b].
struct EffectDef {
  std::string label;
  EffectKind kind = EffectKind::kDirect;
  int direct_idx = -1;
  std::vector<std::pair<int, int>> products;
};

// Closed catalog per model: Model 1 emits 12 direct + 6 indirect + 3 total,
// Model 2 emits 18 direct + 10 indirect + 6 total, in that order.
const std::vector<EffectDef>& effect_catalog(Model model);

struct EffectEstimate {
  std::string label;
  EffectKind kind = EffectKind::kDirect;
  double est = 0.0;
  double se = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool se_ok = false;
};

double effect_value(const EffectDef& def, const Eigen::VectorXd& natural);
Eigen::VectorXd effect_gradient(const EffectDef& def, const Eigen::VectorXd& natural);

// param_cov is the natural-space covariance of the estimates (inverse
// observed information); cov_ok=false leaves every SE flagged unavailable.
std::vector<EffectEstimate> compute_effects(Model model,
                                            const Eigen::VectorXd& natural,
                                            const Eigen::MatrixXd& param_cov,
                                            bool cov_ok);

// Marginal growth-factor means of the mediator and outcome processes as
// derived quantities (the reduced-form means), with analytic Jacobians.
struct DerivedMeans {
  std::vector<std::string> names;  // mean_m1, mean_mg, mean_m2, mean_y1, ...
  Eigen::VectorXd value;           // 6
  Eigen::MatrixXd jacobian;        // 6 x dim(model)
};

DerivedMeans derived_gf_means(Model model, const Eigen::VectorXd& natural);

struct DerivedEstimate {
  std::string name;
  double est = 0.0;
  double se = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  bool se_ok = false;
};

std::vector<DerivedEstimate> compute_derived_means(Model model,
                                                   const Eigen::VectorXd& natural,
                                                   const Eigen::MatrixXd& param_cov,
                                                   bool cov_ok);

// Marginal (reduced-form) growth-factor moments per process, for reporting.
struct ProcessGfMoments {
  char process = 'm';
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
};

std::vector<ProcessGfMoments> marginal_gf_moments(Model model,
                                                  const Eigen::VectorXd& natural);

}  // namespace longmed
