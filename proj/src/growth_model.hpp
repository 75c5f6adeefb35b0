#pragma once

// Bilinear-spline (linear-linear piecewise) latent growth structures for
// longitudinal mediation models, and the model-implied first and second
// moments they induce on an individual's stacked observation vector.
//
// Growth-factor layout used everywhere: (slope of the first segment,
// level at the knot, slope of the second segment).

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace longmed {

constexpr int kGf = 3;  // growth factors per process

enum class Model { kUnivariate, kModel1, kModel2 };

// Index helpers for 3x3 lower-triangular coefficient blocks.  Entry (r, c)
// carries the path from source factor c to target factor r; the strict upper
// triangle is structurally zero (a later factor never feeds an earlier one).
Eigen::Matrix3d lower_tri_coef(double b11, double b1g, double b12, double bgg,
                               double bg2, double b22);

// Symmetric 3x3 from variances and a common pairwise correlation.
Eigen::Matrix3d sym3_from_corr(double v1, double v2, double v3, double corr);

// --- Parameter sets -------------------------------------------------------

// One latent bilinear process in isolation: free knot, factor means and
// covariance, i.i.d. residual variance.
struct ParamsUnivariate {
  Eigen::Vector3d mu = Eigen::Vector3d::Zero();
  Eigen::Matrix3d psi = Eigen::Matrix3d::Identity();
  double knot = 0.0;
  double theta = 1.0;
};

// Baseline scalar covariate -> mediator process -> outcome process.
struct ParamsModel1 {
  double mu_x = 0.0;   // covariate mean
  double phi_x = 1.0;  // covariate variance
  double knot_m = 0.0;
  double knot_y = 0.0;
  Eigen::Vector3d alpha_m = Eigen::Vector3d::Zero();  // factor intercepts
  Eigen::Vector3d alpha_y = Eigen::Vector3d::Zero();
  Eigen::Vector3d b_xm = Eigen::Vector3d::Zero();  // covariate -> mediator factors
  Eigen::Vector3d b_xy = Eigen::Vector3d::Zero();  // covariate -> outcome factors
  Eigen::Matrix3d b_my = Eigen::Matrix3d::Zero();  // mediator -> outcome, lower tri
  Eigen::Matrix3d psi_m = Eigen::Matrix3d::Identity();  // unexplained factor cov
  Eigen::Matrix3d psi_y = Eigen::Matrix3d::Identity();
  double theta_m = 1.0;   // residual variances
  double theta_y = 1.0;
  double theta_my = 0.0;  // same-occasion residual covariance
};

// Covariate process -> mediator process -> outcome process.
struct ParamsModel2 {
  Eigen::Vector3d mu_x = Eigen::Vector3d::Zero();  // covariate factor means
  Eigen::Matrix3d psi_x = Eigen::Matrix3d::Identity();
  double knot_x = 0.0;
  double knot_m = 0.0;
  double knot_y = 0.0;
  Eigen::Vector3d alpha_m = Eigen::Vector3d::Zero();
  Eigen::Vector3d alpha_y = Eigen::Vector3d::Zero();
  Eigen::Matrix3d b_xm = Eigen::Matrix3d::Zero();  // all lower tri
  Eigen::Matrix3d b_xy = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d b_my = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d psi_m = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d psi_y = Eigen::Matrix3d::Identity();
  double theta_x = 1.0;
  double theta_m = 1.0;
  double theta_y = 1.0;
  double theta_xm = 0.0;
  double theta_xy = 0.0;
  double theta_my = 0.0;
};

// Validation.  strict=true additionally requires positive-definite Psi blocks
// and positive variances (what fitting needs); strict=false accepts the
// semi-definite degenerate cases that moment evaluation and data generation
// handle fine (zero Psi, zero residual variance).
void validate(const ParamsUnivariate& p, bool strict = true);
void validate(const ParamsModel1& p, bool strict = true);
void validate(const ParamsModel2& p, bool strict = true);

// --- Schedules and moments -------------------------------------------------

// One individual's measurement occasions.  Processes not present in the
// model stay empty.  Occasions must be finite and strictly increasing.
struct IndividualSchedule {
  Eigen::VectorXd x;  // empty for Model 1 (scalar covariate) and univariate
  Eigen::VectorXd m;
  Eigen::VectorXd y;
};

void validate(const IndividualSchedule& s);

// Joint moments of the stacked latent vector: (x, eta_m, eta_y) for Model 1
// (dimension 7, covariate first), (eta_x, eta_m, eta_y) for Model 2
// (dimension 9).
struct JointFactorMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// Mean and covariance of one individual's stacked observations.
// Stacking order: Model 1 (x, m_1..m_J, y_1..y_J); Model 2
// (x_1..x_J, m_1..m_J, y_1..y_J); univariate (u_1..u_J).
struct ImpliedMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// J x 3 loading matrix; row j is (min(0, t_j - knot), 1, max(0, t_j - knot)).
// Continuous and piecewise linear in the knot.  Throws on non-finite input.
Eigen::MatrixXd bilinear_loadings(const Eigen::VectorXd& times, double knot);

// Closed-form joint factor moments obtained by solving the recursive system
// eta = alpha + B eta + zeta with strictly block-lower-triangular B:
// mean = (I-B)^-1 alpha, cov = (I-B)^-1 Psi_blockdiag (I-B)^-T.
JointFactorMoments reduced_form_moments(const ParamsModel1& p);
JointFactorMoments reduced_form_moments(const ParamsModel2& p);

ImpliedMoments implied_moments(const ParamsUnivariate& p,
                               const IndividualSchedule& s);
ImpliedMoments implied_moments(const ParamsModel1& p,
                               const IndividualSchedule& s);
ImpliedMoments implied_moments(const ParamsModel2& p,
                               const IndividualSchedule& s);

}  // namespace longmed
