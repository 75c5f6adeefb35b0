#include "growth_model.hpp"

#include <cmath>
#include <stdexcept>

namespace longmed {

namespace {

bool all_finite(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  return m.allFinite();
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

// Psi must be symmetric and at least positive semi-definite; strict demands
// positive definite.
void check_psi(const Eigen::Matrix3d& psi, bool strict, const std::string& name) {
  require(all_finite(psi), name + " has non-finite entries");
  require((psi - psi.transpose()).cwiseAbs().maxCoeff() < 1e-10,
          name + " is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(psi);
  const double lo = es.eigenvalues().minCoeff();
  const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  if (strict) {
    require(lo > 1e-12 * scale, name + " is not positive definite");
  } else {
    require(lo > -1e-10 * scale, name + " is not positive semi-definite");
  }
}

void check_lower_tri(const Eigen::Matrix3d& b, const std::string& name) {
  require(all_finite(b), name + " has non-finite entries");
  require(b(0, 1) == 0.0 && b(0, 2) == 0.0 && b(1, 2) == 0.0,
          name + " must have a zero strict upper triangle");
}

void check_var(double v, bool strict, const std::string& name) {
  require(std::isfinite(v), name + " is not finite");
  require(strict ? v > 0.0 : v >= 0.0, name + " must be positive");
}

}  // namespace

Eigen::Matrix3d lower_tri_coef(double b11, double b1g, double b12, double bgg,
                               double bg2, double b22) {
  Eigen::Matrix3d b = Eigen::Matrix3d::Zero();
  b(0, 0) = b11;
  b(1, 0) = b1g;
  b(2, 0) = b12;
  b(1, 1) = bgg;
  b(2, 1) = bg2;
  b(2, 2) = b22;
  return b;
}

Eigen::Matrix3d sym3_from_corr(double v1, double v2, double v3, double corr) {
  Eigen::Matrix3d s;
  const double s1 = std::sqrt(v1), s2 = std::sqrt(v2), s3 = std::sqrt(v3);
  s << v1, corr * s1 * s2, corr * s1 * s3,
       corr * s1 * s2, v2, corr * s2 * s3,
       corr * s1 * s3, corr * s2 * s3, v3;
  return s;
}

void validate(const ParamsUnivariate& p, bool strict) {
  require(all_finite(p.mu), "mu has non-finite entries");
  require(std::isfinite(p.knot), "knot is not finite");
  check_psi(p.psi, strict, "psi");
  check_var(p.theta, strict, "theta");
}

void validate(const ParamsModel1& p, bool strict) {
  require(std::isfinite(p.mu_x), "mu_x is not finite");
  check_var(p.phi_x, strict, "phi_x");
  require(std::isfinite(p.knot_m) && std::isfinite(p.knot_y),
          "knots must be finite");
  require(all_finite(p.alpha_m) && all_finite(p.alpha_y),
          "alpha has non-finite entries");
  require(all_finite(p.b_xm) && all_finite(p.b_xy),
          "covariate coefficients have non-finite entries");
  check_lower_tri(p.b_my, "b_my");
  check_psi(p.psi_m, strict, "psi_m");
  check_psi(p.psi_y, strict, "psi_y");
  check_var(p.theta_m, strict, "theta_m");
  check_var(p.theta_y, strict, "theta_y");
  require(std::isfinite(p.theta_my), "theta_my is not finite");
  if (strict) {
    // per-occasion residual block must be PD
    require(p.theta_m * p.theta_y - p.theta_my * p.theta_my > 0.0,
            "residual covariance block is not positive definite");
  }
}

void validate(const ParamsModel2& p, bool strict) {
  require(all_finite(p.mu_x), "mu_x has non-finite entries");
  check_psi(p.psi_x, strict, "psi_x");
  require(std::isfinite(p.knot_x) && std::isfinite(p.knot_m) &&
              std::isfinite(p.knot_y),
          "knots must be finite");
  require(all_finite(p.alpha_m) && all_finite(p.alpha_y),
          "alpha has non-finite entries");
  check_lower_tri(p.b_xm, "b_xm");
  check_lower_tri(p.b_xy, "b_xy");
  check_lower_tri(p.b_my, "b_my");
  check_psi(p.psi_m, strict, "psi_m");
  check_psi(p.psi_y, strict, "psi_y");
  check_var(p.theta_x, strict, "theta_x");
  check_var(p.theta_m, strict, "theta_m");
  check_var(p.theta_y, strict, "theta_y");
  require(std::isfinite(p.theta_xm) && std::isfinite(p.theta_xy) &&
              std::isfinite(p.theta_my),
          "residual covariances must be finite");
  if (strict) {
    Eigen::Matrix3d r;
    r << p.theta_x, p.theta_xm, p.theta_xy,
         p.theta_xm, p.theta_m, p.theta_my,
         p.theta_xy, p.theta_my, p.theta_y;
    Eigen::LLT<Eigen::Matrix3d> llt(r);
    require(llt.info() == Eigen::Success,
            "residual covariance block is not positive definite");
  }
}

void validate(const IndividualSchedule& s) {
  for (const auto* v : {&s.x, &s.m, &s.y}) {
    require(all_finite(*v), "schedule has non-finite times");
    for (Eigen::Index j = 1; j < v->size(); ++j) {
      require((*v)[j] > (*v)[j - 1], "schedule times must be strictly increasing");
    }
  }
}

Eigen::MatrixXd bilinear_loadings(const Eigen::VectorXd& times, double knot) {
  if (!times.allFinite() || !std::isfinite(knot)) {
    throw std::invalid_argument("bilinear_loadings: non-finite input");
  }
  Eigen::MatrixXd lam(times.size(), kGf);
  for (Eigen::Index j = 0; j < times.size(); ++j) {
    const double d = times[j] - knot;
    lam(j, 0) = std::min(0.0, d);
    lam(j, 1) = 1.0;
    lam(j, 2) = std::max(0.0, d);
  }
  return lam;
}

namespace {

// Solve eta = alpha + B eta + zeta for mean and covariance.  B is strictly
// block-lower-triangular so (I - B) is unit-triangular and always invertible.
JointFactorMoments solve_recursive(const Eigen::VectorXd& alpha,
                                   const Eigen::MatrixXd& b,
                                   const Eigen::MatrixXd& psi_bd) {
  const Eigen::Index d = alpha.size();
  Eigen::MatrixXd imb = Eigen::MatrixXd::Identity(d, d) - b;
  Eigen::MatrixXd inv = imb.triangularView<Eigen::Lower>().solve(
      Eigen::MatrixXd::Identity(d, d));
  JointFactorMoments out;
  out.mean = inv * alpha;
  out.cov = inv * psi_bd * inv.transpose();
  out.cov = (out.cov + out.cov.transpose()).eval() / 2.0;  // exact symmetry
  return out;
}

}  // namespace

JointFactorMoments reduced_form_moments(const ParamsModel1& p) {
  // state (x, eta_m, eta_y), dimension 7
  Eigen::VectorXd alpha(7);
  alpha << p.mu_x, p.alpha_m, p.alpha_y;
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(7, 7);
  b.block<3, 1>(1, 0) = p.b_xm;
  b.block<3, 1>(4, 0) = p.b_xy;
  b.block<3, 3>(4, 1) = p.b_my;
  Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(7, 7);
  psi(0, 0) = p.phi_x;
  psi.block<3, 3>(1, 1) = p.psi_m;
  psi.block<3, 3>(4, 4) = p.psi_y;
  return solve_recursive(alpha, b, psi);
}

JointFactorMoments reduced_form_moments(const ParamsModel2& p) {
  // state (eta_x, eta_m, eta_y), dimension 9
  Eigen::VectorXd alpha(9);
  alpha << p.mu_x, p.alpha_m, p.alpha_y;
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(9, 9);
  b.block<3, 3>(3, 0) = p.b_xm;
  b.block<3, 3>(6, 0) = p.b_xy;
  b.block<3, 3>(6, 3) = p.b_my;
  Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(9, 9);
  psi.block<3, 3>(0, 0) = p.psi_x;
  psi.block<3, 3>(3, 3) = p.psi_m;
  psi.block<3, 3>(6, 6) = p.psi_y;
  return solve_recursive(alpha, b, psi);
}

ImpliedMoments implied_moments(const ParamsUnivariate& p,
                               const IndividualSchedule& s) {
  if (s.m.size() == 0) {
    throw std::invalid_argument("univariate model needs occasions on process m");
  }
  Eigen::MatrixXd lam = bilinear_loadings(s.m, p.knot);
  ImpliedMoments out;
  out.mean = lam * p.mu;
  out.cov = lam * p.psi * lam.transpose();
  out.cov.diagonal().array() += p.theta;
  out.cov = out.cov.selfadjointView<Eigen::Lower>();
  return out;
}

ImpliedMoments implied_moments(const ParamsModel1& p,
                               const IndividualSchedule& s) {
  if (s.x.size() != 0 || s.m.size() == 0 || s.m.size() != s.y.size()) {
    throw std::invalid_argument(
        "Model 1 needs equal-length m and y occasion vectors and a scalar "
        "covariate (no x occasions)");
  }
  const Eigen::Index j = s.m.size();
  const JointFactorMoments f = reduced_form_moments(p);
  const Eigen::MatrixXd lam_m = bilinear_loadings(s.m, p.knot_m);
  const Eigen::MatrixXd lam_y = bilinear_loadings(s.y, p.knot_y);

  // observation order (x, m_1..m_J, y_1..y_J)
  const Eigen::Index d = 2 * j + 1;
  ImpliedMoments out;
  out.mean.resize(d);
  out.mean[0] = f.mean[0];
  out.mean.segment(1, j) = lam_m * f.mean.segment(1, 3);
  out.mean.segment(1 + j, j) = lam_y * f.mean.segment(4, 3);

  out.cov.resize(d, d);
  out.cov(0, 0) = f.cov(0, 0);
  out.cov.block(1, 0, j, 1) = lam_m * f.cov.block<3, 1>(1, 0);
  out.cov.block(1 + j, 0, j, 1) = lam_y * f.cov.block<3, 1>(4, 0);
  out.cov.block(1, 1, j, j) = lam_m * f.cov.block<3, 3>(1, 1) * lam_m.transpose();
  out.cov.block(1 + j, 1, j, j) =
      lam_y * f.cov.block<3, 3>(4, 1) * lam_m.transpose();
  out.cov.block(1 + j, 1 + j, j, j) =
      lam_y * f.cov.block<3, 3>(4, 4) * lam_y.transpose();
  out.cov.block(1, 1, j, j).diagonal().array() += p.theta_m;
  out.cov.block(1 + j, 1 + j, j, j).diagonal().array() += p.theta_y;
  out.cov.block(1 + j, 1, j, j).diagonal().array() += p.theta_my;
  out.cov = out.cov.selfadjointView<Eigen::Lower>();
  return out;
}

ImpliedMoments implied_moments(const ParamsModel2& p,
                               const IndividualSchedule& s) {
  if (s.x.size() == 0 || s.x.size() != s.m.size() || s.m.size() != s.y.size()) {
    throw std::invalid_argument(
        "Model 2 needs equal-length x, m and y occasion vectors");
  }
  const Eigen::Index j = s.x.size();
  const JointFactorMoments f = reduced_form_moments(p);
  const Eigen::MatrixXd lam[3] = {bilinear_loadings(s.x, p.knot_x),
                                  bilinear_loadings(s.m, p.knot_m),
                                  bilinear_loadings(s.y, p.knot_y)};
  const double theta_diag[3] = {p.theta_x, p.theta_m, p.theta_y};
  // same-occasion cross-process residual covariances, indexed (row, col)
  Eigen::Matrix3d theta_cross;
  theta_cross << p.theta_x, p.theta_xm, p.theta_xy,
                 p.theta_xm, p.theta_m, p.theta_my,
                 p.theta_xy, p.theta_my, p.theta_y;

  const Eigen::Index d = 3 * j;
  ImpliedMoments out;
  out.mean.resize(d);
  out.cov.resize(d, d);
  for (int u = 0; u < 3; ++u) {
    out.mean.segment(u * j, j) = lam[u] * f.mean.segment(3 * u, 3);
    for (int v = 0; v <= u; ++v) {
      out.cov.block(u * j, v * j, j, j) =
          lam[u] * f.cov.block<3, 3>(3 * u, 3 * v) * lam[v].transpose();
      if (u == v) {
        out.cov.block(u * j, v * j, j, j).diagonal().array() += theta_diag[u];
      } else {
        out.cov.block(u * j, v * j, j, j).diagonal().array() +=
            theta_cross(u, v);
      }
    }
  }
  out.cov = out.cov.selfadjointView<Eigen::Lower>();
  return out;
}

}  // namespace longmed
