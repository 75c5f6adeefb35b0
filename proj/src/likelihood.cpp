#include "likelihood.hpp"

#include <cmath>
#include <limits>

#include "param_space.hpp"

namespace longmed {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLog2Pi = std::log(2.0 * M_PI);

inline void hinge_row(double t, double knot, Eigen::Vector3d& row) {
  const double d = t - knot;
  row[0] = d < 0.0 ? d : 0.0;
  row[1] = 1.0;
  row[2] = d > 0.0 ? d : 0.0;
}

// log-determinant from a successful LLT factor
template <typename LltType>
double lldet(const LltType& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace

LoglikEvaluator::LoglikEvaluator(const Dataset& data) : model_(data.model) {
  validate(data);
  n_ = data.n();
  J_ = data.J;
  auto fill = [&](Eigen::MatrixXd& t, Eigen::MatrixXd& v, auto member_t, auto member_v) {
    t.resize(J_, n_);
    v.resize(J_, n_);
    for (int i = 0; i < n_; ++i) {
      t.col(i) = data.rows[i].*member_t;
      v.col(i) = data.rows[i].*member_v;
    }
  };
  fill(mt_, mv_, &IndividualRecord::m_t, &IndividualRecord::m_v);
  if (model_ == Model::kModel1 || model_ == Model::kModel2) {
    fill(yt_, yv_, &IndividualRecord::y_t, &IndividualRecord::y_v);
  }
  if (model_ == Model::kModel1) {
    x_.resize(n_);
    for (int i = 0; i < n_; ++i) x_[i] = data.rows[i].x;
  }
  if (model_ == Model::kModel2) {
    fill(xt_, xv_, &IndividualRecord::x_t, &IndividualRecord::x_v);
  }
}

int LoglikEvaluator::obs_dim() const {
  switch (model_) {
    case Model::kUnivariate: return J_;
    case Model::kModel1: return 2 * J_ + 1;
    case Model::kModel2: return 3 * J_;
  }
  return 0;
}

double LoglikEvaluator::sum_loglik(const Eigen::VectorXd& natural_packed) const {
  if (!natural_packed.allFinite()) return kNegInf;
  switch (model_) {
    case Model::kUnivariate: return sum_loglik(unpack_univariate(natural_packed));
    case Model::kModel1: return sum_loglik(unpack_model1(natural_packed));
    case Model::kModel2: return sum_loglik(unpack_model2(natural_packed));
  }
  return kNegInf;
}

double LoglikEvaluator::sum_loglik(const ParamsUnivariate& p) const {
  if (model_ != Model::kUnivariate) throw ValidationError("evaluator/model mismatch");
  if (!(p.theta > 0.0) || !std::isfinite(p.knot)) return kNegInf;
  Eigen::LLT<Eigen::Matrix3d> lltG(p.psi);
  if (lltG.info() != Eigen::Success) return kNegInf;
  const Eigen::Matrix3d g_inv = lltG.solve(Eigen::Matrix3d::Identity());
  const double logdet_g = lldet(lltG);
  const double th_inv = 1.0 / p.theta;
  const double logdet_theta = J_ * std::log(p.theta);

  double total = 0.0;
  Eigen::Vector3d a;
  for (int i = 0; i < n_; ++i) {
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    double q0 = 0.0;
    for (int j = 0; j < J_; ++j) {
      hinge_row(mt_(j, i), p.knot, a);
      const double r = mv_(j, i) - a.dot(p.mu);
      m.noalias() += a * a.transpose();
      v.noalias() += a * r;
      q0 += r * r;
    }
    m *= th_inv;
    v *= th_inv;
    q0 *= th_inv;
    const Eigen::Matrix3d k = g_inv + m;
    Eigen::LLT<Eigen::Matrix3d> lltK(k);
    if (lltK.info() != Eigen::Success) return kNegInf;
    const double quad = q0 - v.dot(lltK.solve(v));
    const double logdet = lldet(lltK) + logdet_g + logdet_theta;
    total += -0.5 * (J_ * kLog2Pi + logdet + quad);
  }
  return total;
}

double LoglikEvaluator::sum_loglik(const ParamsModel1& p) const {
  if (model_ != Model::kModel1) throw ValidationError("evaluator/model mismatch");
  const double det2 = p.theta_m * p.theta_y - p.theta_my * p.theta_my;
  if (!(p.theta_m > 0.0) || !(p.theta_y > 0.0) || !(det2 > 0.0)) return kNegInf;
  if (!(p.phi_x > 0.0)) return kNegInf;
  if (!std::isfinite(p.knot_m) || !std::isfinite(p.knot_y)) return kNegInf;

  const JointFactorMoments f = reduced_form_moments(p);
  if (!f.mean.allFinite() || !f.cov.allFinite()) return kNegInf;

  // condition the 6 growth factors on the scalar covariate
  const double phi = f.cov(0, 0);
  using Vector6d = Eigen::Matrix<double, 6, 1>;
  using Matrix6d = Eigen::Matrix<double, 6, 6>;
  const Vector6d cov_wx = f.cov.block<6, 1>(1, 0);
  const Vector6d beta = cov_wx / phi;
  Matrix6d g_cond = f.cov.block<6, 6>(1, 1) - beta * cov_wx.transpose();
  g_cond = ((g_cond + g_cond.transpose()) / 2.0).eval();
  Eigen::LLT<Matrix6d> lltG(g_cond);
  if (lltG.info() != Eigen::Success) return kNegInf;
  const Matrix6d g_inv = lltG.solve(Matrix6d::Identity());
  const double logdet_g = lldet(lltG);

  // per-occasion residual block (m, y)
  const double t00 = p.theta_y / det2;
  const double t11 = p.theta_m / det2;
  const double t01 = -p.theta_my / det2;
  const double logdet_theta = J_ * std::log(det2);
  const double log_phi_term = 0.5 * (kLog2Pi + std::log(phi));

  double total = 0.0;
  Eigen::Vector3d a, b;
  for (int i = 0; i < n_; ++i) {
    const double dx = x_[i] - f.mean[0];
    const Eigen::Vector3d em = f.mean.segment<3>(1) + beta.head<3>() * dx;
    const Eigen::Vector3d ey = f.mean.segment<3>(4) + beta.tail<3>() * dx;

    Eigen::Matrix3d m11 = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d m12 = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d m22 = Eigen::Matrix3d::Zero();
    Eigen::Vector3d v1 = Eigen::Vector3d::Zero();
    Eigen::Vector3d v2 = Eigen::Vector3d::Zero();
    double q0 = 0.0;
    for (int j = 0; j < J_; ++j) {
      hinge_row(mt_(j, i), p.knot_m, a);
      hinge_row(yt_(j, i), p.knot_y, b);
      const double rm = mv_(j, i) - a.dot(em);
      const double ry = yv_(j, i) - b.dot(ey);
      m11.noalias() += a * a.transpose();
      m12.noalias() += a * b.transpose();
      m22.noalias() += b * b.transpose();
      v1.noalias() += a * (t00 * rm + t01 * ry);
      v2.noalias() += b * (t01 * rm + t11 * ry);
      q0 += t00 * rm * rm + 2.0 * t01 * rm * ry + t11 * ry * ry;
    }
    Matrix6d k = g_inv;
    k.block<3, 3>(0, 0) += t00 * m11;
    k.block<3, 3>(0, 3) += t01 * m12;
    k.block<3, 3>(3, 0) += t01 * m12.transpose();
    k.block<3, 3>(3, 3) += t11 * m22;
    Eigen::LLT<Matrix6d> lltK(k);
    if (lltK.info() != Eigen::Success) return kNegInf;
    Vector6d v;
    v << v1, v2;
    const double quad = q0 - v.dot(lltK.solve(v));
    const double logdet = lldet(lltK) + logdet_g + logdet_theta;
    total += -0.5 * (2 * J_ * kLog2Pi + logdet + quad);
    total += -log_phi_term - 0.5 * dx * dx / phi;  // covariate marginal
  }
  return total;
}

double LoglikEvaluator::sum_loglik(const ParamsModel2& p) const {
  if (model_ != Model::kModel2) throw ValidationError("evaluator/model mismatch");
  Eigen::Matrix3d theta;
  theta << p.theta_x, p.theta_xm, p.theta_xy,
           p.theta_xm, p.theta_m, p.theta_my,
           p.theta_xy, p.theta_my, p.theta_y;
  Eigen::LLT<Eigen::Matrix3d> lltT(theta);
  if (lltT.info() != Eigen::Success) return kNegInf;
  const Eigen::Matrix3d t_inv = lltT.solve(Eigen::Matrix3d::Identity());
  const double logdet_theta = J_ * lldet(lltT);
  if (!std::isfinite(p.knot_x) || !std::isfinite(p.knot_m) || !std::isfinite(p.knot_y)) {
    return kNegInf;
  }

  const JointFactorMoments f = reduced_form_moments(p);
  if (!f.mean.allFinite() || !f.cov.allFinite()) return kNegInf;
  using Vector9d = Eigen::Matrix<double, 9, 1>;
  using Matrix9d = Eigen::Matrix<double, 9, 9>;
  const Matrix9d g = f.cov;
  Eigen::LLT<Matrix9d> lltG(g);
  if (lltG.info() != Eigen::Success) return kNegInf;
  const Matrix9d g_inv = lltG.solve(Matrix9d::Identity());
  const double logdet_g = lldet(lltG);

  const Eigen::Vector3d ex = f.mean.segment<3>(0);
  const Eigen::Vector3d em = f.mean.segment<3>(3);
  const Eigen::Vector3d ey = f.mean.segment<3>(6);

  double total = 0.0;
  Eigen::Vector3d rows[3];
  for (int i = 0; i < n_; ++i) {
    Eigen::Matrix3d macc[3][3];
    Eigen::Vector3d vacc[3];
    for (int u = 0; u < 3; ++u) {
      vacc[u].setZero();
      for (int w = 0; w < 3; ++w) macc[u][w].setZero();
    }
    double q0 = 0.0;
    for (int j = 0; j < J_; ++j) {
      hinge_row(xt_(j, i), p.knot_x, rows[0]);
      hinge_row(mt_(j, i), p.knot_m, rows[1]);
      hinge_row(yt_(j, i), p.knot_y, rows[2]);
      Eigen::Vector3d r;
      r[0] = xv_(j, i) - rows[0].dot(ex);
      r[1] = mv_(j, i) - rows[1].dot(em);
      r[2] = yv_(j, i) - rows[2].dot(ey);
      const Eigen::Vector3d tr = t_inv * r;
      q0 += r.dot(tr);
      for (int u = 0; u < 3; ++u) {
        vacc[u].noalias() += rows[u] * tr[u];
        for (int w = u; w < 3; ++w) {
          macc[u][w].noalias() += t_inv(u, w) * (rows[u] * rows[w].transpose());
        }
      }
    }
    Matrix9d k = g_inv;
    Vector9d v;
    for (int u = 0; u < 3; ++u) {
      v.segment<3>(3 * u) = vacc[u];
      for (int w = u; w < 3; ++w) {
        k.block<3, 3>(3 * u, 3 * w) += macc[u][w];
        if (w != u) k.block<3, 3>(3 * w, 3 * u) += macc[u][w].transpose();
      }
    }
    Eigen::LLT<Matrix9d> lltK(k);
    if (lltK.info() != Eigen::Success) return kNegInf;
    const double quad = q0 - v.dot(lltK.solve(v));
    const double logdet = lldet(lltK) + logdet_g + logdet_theta;
    total += -0.5 * (3 * J_ * kLog2Pi + logdet + quad);
  }
  return total;
}

double fiml_loglik(const ParamsUnivariate& p, const Dataset& data) {
  return LoglikEvaluator(data).sum_loglik(p);
}
double fiml_loglik(const ParamsModel1& p, const Dataset& data) {
  return LoglikEvaluator(data).sum_loglik(p);
}
double fiml_loglik(const ParamsModel2& p, const Dataset& data) {
  return LoglikEvaluator(data).sum_loglik(p);
}

}  // namespace longmed
