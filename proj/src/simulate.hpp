#pragma once

// Synthetic-data generation: declared population defaults organized by
// trajectory shape, coefficient levels targeted at an explained-variance
// share, jittered individual measurement occasions, and joint sampling of
// covariate/growth factors from the reduced-form moments.

#include <cstdint>
#include <random>
#include <string>

#include "dataset.hpp"
#include "growth_model.hpp"

namespace longmed {

// Explained-variance share each manipulated coefficient targets.
enum class Scenario { kZero, kMedium, kLarge };  // 0 / 0.13 / 0.26
Scenario scenario_from_string(const std::string& s);
const char* scenario_name(Scenario s);
double scenario_r2(Scenario s);

// Common change patterns: (first slope, second slope) population means.
enum class Shape { kDeceleration, kAcceleration, kPlateau };
Shape shape_from_string(const std::string& s);
const char* shape_name(Shape s);

struct ConditionSpec {
  Model model = Model::kModel1;
  int n = 200;
  int J = 6;
  double knot_x = 2.5;  // used by Model 2 only
  double knot_m = 2.5;
  double knot_y = 2.5;
  double theta = 1.0;          // residual variance level
  double residual_corr = 0.3;  // same-occasion cross-process residual correlation
  Scenario scenario = Scenario::kMedium;
  Shape shape = Shape::kDeceleration;
  double time_jitter = 0.25;   // half-width of the occasion window
  int reps = 200;              // convergent replications wanted (Monte Carlo)
  int max_starts = 10;
  std::uint64_t seed = 1;
  std::string label;           // auto-generated when empty

  void validate_spec() const;  // throws ValidationError
  std::string make_label() const;
};

// Coefficient hitting a target explained-variance share:
// beta = sqrt(r2 * var_outcome / var_predictor), positive by convention.
double r2_to_coefficient(double target_r2, double var_predictor,
                         double var_outcome_factor);

// Population parameters realizing the condition.  Fully declared defaults:
// knot-level mean 100 with variance 25, slope variances 1, within-process
// growth-factor correlation 0.3 on the total (marginal) covariances,
// covariate targets fixed at the medium share with 0.5% delayed couplings,
// unexplained covariances derived by subtracting the explained part.
struct TruthBundle {
  Model model = Model::kModel1;
  ParamsModel1 m1;
  ParamsModel2 m2;
  Eigen::VectorXd packed;  // canonical packing of whichever model applies
};

TruthBundle build_truth(const ConditionSpec& spec);

// Equally spaced base grid 0..J-1 with each occasion drawn uniformly from
// (t_j - jitter, t_j + jitter); jitter >= 0.5 would break monotonicity.
Eigen::VectorXd generate_schedule(int J, double jitter, std::mt19937_64& rng);

// Draws growth factors (and covariate) jointly from the reduced-form
// moments, then adds per-occasion residuals with the cross-process block.
Dataset generate_dataset(const TruthBundle& truth, int n, int J,
                         double time_jitter, std::mt19937_64& rng);

}  // namespace longmed
