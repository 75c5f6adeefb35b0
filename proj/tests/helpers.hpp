#pragma once

// Shared fixtures: reproducible draws of valid (strictly PD) parameter sets
// and small schedule builders.  Every generator takes the RNG by reference so
// a test controls its own stream.

#include <algorithm>
#include <cmath>
#include <random>

#include "dataset.hpp"
#include "growth_model.hpp"
#include "rng.hpp"

namespace testutil {

using namespace longmed;

inline std::mt19937_64 rng(std::uint64_t seed) { return make_rng(seed, 0); }

inline Eigen::Matrix3d random_spd3(std::mt19937_64& g) {
  std::uniform_real_distribution<double> diag(0.7, 1.5), off(-0.4, 0.4);
  Eigen::Matrix3d L = Eigen::Matrix3d::Zero();
  for (int i = 0; i < 3; ++i) {
    L(i, i) = diag(g);
    for (int j = 0; j < i; ++j) L(i, j) = off(g);
  }
  return L * L.transpose();
}

inline Eigen::Vector3d random_vec3(std::mt19937_64& g, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  const double a = u(g), b = u(g), c = u(g);
  return Eigen::Vector3d(a, b, c);
}

// Lower-triangular coefficient block with entries in [-mag, mag].
inline Eigen::Matrix3d random_tri3(std::mt19937_64& g, double mag = 0.4) {
  std::uniform_real_distribution<double> u(-mag, mag);
  Eigen::Matrix3d b = Eigen::Matrix3d::Zero();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c <= r; ++c) b(r, c) = u(g);
  }
  return b;
}

inline double random_in(std::mt19937_64& g, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline ParamsUnivariate random_params_uv(std::mt19937_64& g, double knot_lo = 1.2,
                                         double knot_hi = 3.8) {
  ParamsUnivariate p;
  p.mu = random_vec3(g, -2.0, 2.0);
  p.mu(1) = random_in(g, 50.0, 150.0);
  p.psi = random_spd3(g);
  p.knot = random_in(g, knot_lo, knot_hi);
  p.theta = random_in(g, 0.5, 2.0);
  return p;
}

inline ParamsModel1 random_params_m1(std::mt19937_64& g, double knot_lo = 1.2,
                                     double knot_hi = 3.8) {
  ParamsModel1 p;
  p.mu_x = random_in(g, -1.0, 1.0);
  p.phi_x = random_in(g, 0.5, 2.0);
  p.knot_m = random_in(g, knot_lo, knot_hi);
  p.knot_y = random_in(g, knot_lo, knot_hi);
  p.alpha_m = random_vec3(g, -2.0, 2.0);
  p.alpha_y = random_vec3(g, -2.0, 2.0);
  p.b_xm = random_vec3(g, -0.5, 0.5);
  p.b_xy = random_vec3(g, -0.5, 0.5);
  p.b_my = random_tri3(g);
  p.psi_m = random_spd3(g);
  p.psi_y = random_spd3(g);
  p.theta_m = random_in(g, 0.5, 2.0);
  p.theta_y = random_in(g, 0.5, 2.0);
  p.theta_my = random_in(g, -0.3, 0.3) * std::sqrt(p.theta_m * p.theta_y);
  return p;
}

inline ParamsModel2 random_params_m2(std::mt19937_64& g, double knot_lo = 1.2,
                                     double knot_hi = 3.8) {
  ParamsModel2 p;
  p.mu_x = random_vec3(g, -2.0, 2.0);
  p.psi_x = random_spd3(g);
  p.knot_x = random_in(g, knot_lo, knot_hi);
  p.knot_m = random_in(g, knot_lo, knot_hi);
  p.knot_y = random_in(g, knot_lo, knot_hi);
  p.alpha_m = random_vec3(g, -2.0, 2.0);
  p.alpha_y = random_vec3(g, -2.0, 2.0);
  p.b_xm = random_tri3(g);
  p.b_xy = random_tri3(g);
  p.b_my = random_tri3(g);
  p.psi_m = random_spd3(g);
  p.psi_y = random_spd3(g);
  p.theta_x = random_in(g, 0.5, 2.0);
  p.theta_m = random_in(g, 0.5, 2.0);
  p.theta_y = random_in(g, 0.5, 2.0);
  // pairwise correlations bounded by 0.3 keep the 3x3 residual block PD
  p.theta_xm = random_in(g, -0.3, 0.3) * std::sqrt(p.theta_x * p.theta_m);
  p.theta_xy = random_in(g, -0.3, 0.3) * std::sqrt(p.theta_x * p.theta_y);
  p.theta_my = random_in(g, -0.3, 0.3) * std::sqrt(p.theta_m * p.theta_y);
  return p;
}

inline Eigen::VectorXd grid(int J) {
  Eigen::VectorXd t(J);
  for (int j = 0; j < J; ++j) t(j) = j;
  return t;
}

inline Eigen::VectorXd jittered_grid(int J, std::mt19937_64& g, double w = 0.25) {
  Eigen::VectorXd t = grid(J);
  for (int j = 0; j < J; ++j) t(j) += random_in(g, -w, w);
  return t;
}

// --- Independent oracles -----------------------------------------------
// Joint factor moments by direct substitution of the structural equations
// (the closed forms from expanding eta_y = alpha_y + B_xy x + B_my eta_m + zeta
// by hand), with no (I-B)^-1 anywhere.  The assemble_* helpers then build the
// observation moments as Lambda G Lambda' + Theta with dense blocks.

inline JointFactorMoments substitution_moments(const ParamsModel1& p) {
  JointFactorMoments out;
  out.mean.resize(7);
  out.cov.resize(7, 7);
  const Eigen::Vector3d mean_m = p.alpha_m + p.b_xm * p.mu_x;
  const Eigen::Vector3d mean_y = p.alpha_y + p.b_xy * p.mu_x + p.b_my * mean_m;
  out.mean << p.mu_x, mean_m, mean_y;

  const Eigen::Matrix3d cov_m = p.phi_x * p.b_xm * p.b_xm.transpose() + p.psi_m;
  const Eigen::RowVector3d cov_xm = p.phi_x * p.b_xm.transpose();
  const Eigen::RowVector3d cov_xy =
      p.phi_x * (p.b_xy + p.b_my * p.b_xm).transpose();
  const Eigen::Matrix3d cov_my =
      cov_m * p.b_my.transpose() + p.b_xm * p.phi_x * p.b_xy.transpose();
  const Eigen::Matrix3d cov_y =
      p.b_my * cov_m * p.b_my.transpose() + p.phi_x * p.b_xy * p.b_xy.transpose() +
      p.b_my * p.b_xm * p.phi_x * p.b_xy.transpose() +
      p.b_xy * p.phi_x * p.b_xm.transpose() * p.b_my.transpose() + p.psi_y;

  out.cov(0, 0) = p.phi_x;
  out.cov.block<1, 3>(0, 1) = cov_xm;
  out.cov.block<1, 3>(0, 4) = cov_xy;
  out.cov.block<3, 1>(1, 0) = cov_xm.transpose();
  out.cov.block<3, 1>(4, 0) = cov_xy.transpose();
  out.cov.block<3, 3>(1, 1) = cov_m;
  out.cov.block<3, 3>(1, 4) = cov_my;
  out.cov.block<3, 3>(4, 1) = cov_my.transpose();
  out.cov.block<3, 3>(4, 4) = cov_y;
  return out;
}

inline JointFactorMoments substitution_moments(const ParamsModel2& p) {
  JointFactorMoments out;
  out.mean.resize(9);
  out.cov.resize(9, 9);
  const Eigen::Vector3d mean_m = p.alpha_m + p.b_xm * p.mu_x;
  const Eigen::Vector3d mean_y = p.alpha_y + p.b_xy * p.mu_x + p.b_my * mean_m;
  out.mean << p.mu_x, mean_m, mean_y;

  const Eigen::Matrix3d cov_m = p.b_xm * p.psi_x * p.b_xm.transpose() + p.psi_m;
  const Eigen::Matrix3d cov_xm = p.psi_x * p.b_xm.transpose();
  const Eigen::Matrix3d cov_xy = p.psi_x * (p.b_xy + p.b_my * p.b_xm).transpose();
  const Eigen::Matrix3d cov_my =
      cov_m * p.b_my.transpose() + p.b_xm * p.psi_x * p.b_xy.transpose();
  const Eigen::Matrix3d cov_y =
      p.b_my * cov_m * p.b_my.transpose() + p.b_xy * p.psi_x * p.b_xy.transpose() +
      p.b_my * p.b_xm * p.psi_x * p.b_xy.transpose() +
      p.b_xy * p.psi_x * p.b_xm.transpose() * p.b_my.transpose() + p.psi_y;

  out.cov.block<3, 3>(0, 0) = p.psi_x;
  out.cov.block<3, 3>(0, 3) = cov_xm;
  out.cov.block<3, 3>(0, 6) = cov_xy;
  out.cov.block<3, 3>(3, 0) = cov_xm.transpose();
  out.cov.block<3, 3>(6, 0) = cov_xy.transpose();
  out.cov.block<3, 3>(3, 3) = cov_m;
  out.cov.block<3, 3>(3, 6) = cov_my;
  out.cov.block<3, 3>(6, 3) = cov_my.transpose();
  out.cov.block<3, 3>(6, 6) = cov_y;
  return out;
}

inline ImpliedMoments assemble_implied(const ParamsModel1& p,
                                       const IndividualSchedule& s) {
  const JointFactorMoments g = substitution_moments(p);
  const int jm = static_cast<int>(s.m.size());
  const int jy = static_cast<int>(s.y.size());
  const int d = 1 + jm + jy;
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(d, 7);
  L(0, 0) = 1.0;
  L.block(1, 1, jm, 3) = bilinear_loadings(s.m, p.knot_m);
  L.block(1 + jm, 4, jy, 3) = bilinear_loadings(s.y, p.knot_y);
  Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(d, d);
  for (int j = 0; j < jm; ++j) theta(1 + j, 1 + j) = p.theta_m;
  for (int j = 0; j < jy; ++j) theta(1 + jm + j, 1 + jm + j) = p.theta_y;
  for (int j = 0; j < std::min(jm, jy); ++j) {
    theta(1 + j, 1 + jm + j) = theta(1 + jm + j, 1 + j) = p.theta_my;
  }
  ImpliedMoments out;
  out.mean = L * g.mean;
  out.cov = L * g.cov * L.transpose() + theta;
  return out;
}

inline ImpliedMoments assemble_implied(const ParamsModel2& p,
                                       const IndividualSchedule& s) {
  const JointFactorMoments g = substitution_moments(p);
  const int J = static_cast<int>(s.x.size());
  const int d = 3 * J;
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(d, 9);
  L.block(0, 0, J, 3) = bilinear_loadings(s.x, p.knot_x);
  L.block(J, 3, J, 3) = bilinear_loadings(s.m, p.knot_m);
  L.block(2 * J, 6, J, 3) = bilinear_loadings(s.y, p.knot_y);
  Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(d, d);
  for (int j = 0; j < J; ++j) {
    theta(j, j) = p.theta_x;
    theta(J + j, J + j) = p.theta_m;
    theta(2 * J + j, 2 * J + j) = p.theta_y;
    theta(j, J + j) = theta(J + j, j) = p.theta_xm;
    theta(j, 2 * J + j) = theta(2 * J + j, j) = p.theta_xy;
    theta(J + j, 2 * J + j) = theta(2 * J + j, J + j) = p.theta_my;
  }
  ImpliedMoments out;
  out.mean = L * g.mean;
  out.cov = L * g.cov * L.transpose() + theta;
  return out;
}

// Log-density of one observation vector straight from the textbook formula,
// dense inverse and determinant included.
inline double dense_mvn_loglik(const Eigen::VectorXd& z, const ImpliedMoments& im) {
  const int d = static_cast<int>(z.size());
  const Eigen::VectorXd r = z - im.mean;
  const double det = im.cov.determinant();
  const Eigen::MatrixXd inv = im.cov.inverse();
  return -0.5 * d * std::log(2.0 * M_PI) - 0.5 * std::log(det) -
         0.5 * r.dot(inv * r);
}

// Structurally valid dataset on the plain 0..J-1 grid; values are noise.
// Enough for anything that only needs shapes and time ranges.
inline Dataset dataset_shell(Model model, int n, int J, std::uint64_t seed) {
  auto g = make_rng(seed, 1);
  std::normal_distribution<double> nd;
  Dataset d;
  d.model = model;
  d.J = J;
  auto fill = [&](Eigen::VectorXd& t, Eigen::VectorXd& v) {
    t = grid(J);
    v.resize(J);
    for (int j = 0; j < J; ++j) v(j) = nd(g);
  };
  for (int i = 0; i < n; ++i) {
    IndividualRecord r;
    r.id = std::to_string(i + 1);
    if (model == Model::kModel1) {
      r.x = nd(g);
      fill(r.m_t, r.m_v);
      fill(r.y_t, r.y_v);
    } else if (model == Model::kModel2) {
      fill(r.x_t, r.x_v);
      fill(r.m_t, r.m_v);
      fill(r.y_t, r.y_v);
    } else {
      fill(r.m_t, r.m_v);
    }
    d.rows.push_back(r);
  }
  return d;
}

// Arbitrary observations on per-individual jittered schedules; the values
// carry no model structure (likelihoods are defined for any data).
inline Dataset random_dataset(Model model, int n, int J, std::mt19937_64& g) {
  std::normal_distribution<double> nd(0.0, 3.0);
  Dataset d;
  d.model = model;
  d.J = J;
  auto fill = [&](Eigen::VectorXd& t, Eigen::VectorXd& v) {
    t = jittered_grid(J, g);
    v.resize(J);
    for (int j = 0; j < J; ++j) v(j) = nd(g);
  };
  for (int i = 0; i < n; ++i) {
    IndividualRecord r;
    r.id = std::to_string(i + 1);
    if (model == Model::kModel1) {
      r.x = nd(g);
      fill(r.m_t, r.m_v);
      fill(r.y_t, r.y_v);
    } else if (model == Model::kModel2) {
      fill(r.x_t, r.x_v);
      fill(r.m_t, r.m_v);
      fill(r.y_t, r.y_v);
    } else {
      fill(r.m_t, r.m_v);
    }
    d.rows.push_back(r);
  }
  return d;
}

inline IndividualSchedule sched_uv(const Eigen::VectorXd& t) {
  IndividualSchedule s;
  s.m = t;
  return s;
}

inline IndividualSchedule sched_m1(const Eigen::VectorXd& tm,
                                   const Eigen::VectorXd& ty) {
  IndividualSchedule s;
  s.m = tm;
  s.y = ty;
  return s;
}

inline IndividualSchedule sched_m2(const Eigen::VectorXd& tx,
                                   const Eigen::VectorXd& tm,
                                   const Eigen::VectorXd& ty) {
  IndividualSchedule s;
  s.x = tx;
  s.m = tm;
  s.y = ty;
  return s;
}

}  // namespace testutil
