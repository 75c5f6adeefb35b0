#include "simulate.hpp"

#include <cmath>
#include <sstream>

#include "param_space.hpp"

namespace longmed {

namespace {

// Small share for lagged couplings.  Kept well under the manipulated shares:
// lagged paths scale with the knot-level variance and compound through the
// correlated predictor blocks, and by 2% the subtracted (unexplained) outcome
// covariance already leaves the PD cone in the strongest mediated cell.
constexpr double kDelayedR2 = 0.005;
constexpr double kMediumR2 = 0.13;

// total (marginal) growth-factor covariance target per process
Eigen::Matrix3d total_gf_cov() { return sym3_from_corr(1.0, 25.0, 1.0, 0.3); }

Eigen::Vector3d gf_means(Shape shape) {
  // (first slope, knot level, second slope)
  switch (shape) {
    case Shape::kDeceleration: return {5.0, 100.0, 2.6};
    case Shape::kAcceleration: return {2.6, 100.0, 5.0};
    case Shape::kPlateau: return {5.0, 100.0, 0.4};
  }
  return {5.0, 100.0, 2.6};
}

// lower-triangular coefficient block from per-entry r2 targets: same-factor
// paths on the diagonal, delayed (lagged-factor) paths below it
Eigen::Matrix3d coef_block(double diag_r2, double delayed_r2,
                           const Eigen::Matrix3d& pred_cov,
                           const Eigen::Matrix3d& out_cov) {
  Eigen::Matrix3d b = Eigen::Matrix3d::Zero();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c <= r; ++c) {
      const double r2 = (r == c) ? diag_r2 : delayed_r2;
      b(r, c) = r2_to_coefficient(r2, pred_cov(c, c), out_cov(r, r));
    }
  }
  return b;
}

void check_pd(const Eigen::Matrix3d& psi, const char* what) {
  Eigen::LLT<Eigen::Matrix3d> llt(psi);
  if (llt.info() != Eigen::Success) {
    throw ValidationError(std::string("condition infeasible: unexplained ") + what +
                          " covariance is not positive definite; lower the "
                          "coefficient targets");
  }
}

// PSD square root that tolerates semi-definite blocks (zero-noise configs)
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& s) {
  Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal();
}

}  // namespace

Scenario scenario_from_string(const std::string& s) {
  if (s == "zero") return Scenario::kZero;
  if (s == "medium") return Scenario::kMedium;
  if (s == "large") return Scenario::kLarge;
  throw ValidationError("unknown scenario '" + s + "' (zero|medium|large)");
}

const char* scenario_name(Scenario s) {
  switch (s) {
    case Scenario::kZero: return "zero";
    case Scenario::kMedium: return "medium";
    case Scenario::kLarge: return "large";
  }
  return "?";
}

double scenario_r2(Scenario s) {
  switch (s) {
    case Scenario::kZero: return 0.0;
    case Scenario::kMedium: return kMediumR2;
    case Scenario::kLarge: return 0.26;
  }
  return 0.0;
}

Shape shape_from_string(const std::string& s) {
  if (s == "deceleration") return Shape::kDeceleration;
  if (s == "acceleration") return Shape::kAcceleration;
  if (s == "plateau") return Shape::kPlateau;
  throw ValidationError("unknown shape '" + s +
                        "' (deceleration|acceleration|plateau)");
}

const char* shape_name(Shape s) {
  switch (s) {
    case Shape::kDeceleration: return "deceleration";
    case Shape::kAcceleration: return "acceleration";
    case Shape::kPlateau: return "plateau";
  }
  return "?";
}

void ConditionSpec::validate_spec() const {
  if (model == Model::kUnivariate) {
    throw ValidationError("conditions are defined for Model 1 or Model 2");
  }
  if (n < 1) throw ValidationError("condition needs n >= 1");
  if (J < 2) throw ValidationError("condition needs J >= 2");
  if (!(theta > 0.0)) throw ValidationError("residual variance level must be positive");
  if (!(std::abs(residual_corr) < 1.0)) {
    throw ValidationError("residual correlation must lie in (-1, 1)");
  }
  if (!(time_jitter >= 0.0) || time_jitter >= 0.5) {
    throw ValidationError("time jitter must lie in [0, 0.5) to keep occasions ordered");
  }
  const double hi = J - 1.0;
  auto inside = [&](double g, const char* name) {
    if (!(g > 0.0 && g < hi)) {
      throw ValidationError(std::string("knot ") + name +
                            " must lie strictly inside (0, " + std::to_string(hi) + ")");
    }
  };
  if (model == Model::kModel2) inside(knot_x, "x");
  inside(knot_m, "m");
  inside(knot_y, "y");
  if (reps < 2) throw ValidationError("condition needs reps >= 2");
  if (max_starts < 1) throw ValidationError("condition needs max_starts >= 1");
}

std::string ConditionSpec::make_label() const {
  if (!label.empty()) return label;
  std::ostringstream os;
  os << (model == Model::kModel1 ? "m1" : "m2") << "_n" << n << "_J" << J << "_k";
  if (model == Model::kModel2) os << knot_x << "-";
  os << knot_m << "-" << knot_y << "_t" << theta << "_" << scenario_name(scenario)
     << "_" << shape_name(shape);
  return os.str();
}

double r2_to_coefficient(double target_r2, double var_predictor,
                         double var_outcome_factor) {
  if (!(target_r2 >= 0.0 && target_r2 < 1.0)) {
    throw ValidationError("explained-variance target must lie in [0, 1)");
  }
  if (!(var_predictor > 0.0) || !(var_outcome_factor > 0.0)) {
    throw ValidationError("variances must be positive");
  }
  return std::sqrt(target_r2 * var_outcome_factor / var_predictor);
}

TruthBundle build_truth(const ConditionSpec& spec) {
  spec.validate_spec();
  TruthBundle out;
  out.model = spec.model;
  const Eigen::Matrix3d total = total_gf_cov();
  const double r2 = scenario_r2(spec.scenario);
  const double th = spec.theta;
  const double th_cross = spec.residual_corr * spec.theta;

  if (spec.model == Model::kModel1) {
    ParamsModel1 p;
    p.mu_x = 0.0;
    p.phi_x = 1.0;
    p.knot_m = spec.knot_m;
    p.knot_y = spec.knot_y;
    const Eigen::Vector3d mu = gf_means(spec.shape);

    // the scenario manipulates the covariate -> mediator paths
    for (int k = 0; k < 3; ++k) {
      p.b_xm[k] = r2_to_coefficient(r2, p.phi_x, total(k, k));
      p.b_xy[k] = r2_to_coefficient(kMediumR2, p.phi_x, total(k, k));
    }
    p.b_my = coef_block(kMediumR2, kDelayedR2, total, total);

    // unexplained = total minus what the predictors account for
    p.psi_m = total - p.b_xm * p.phi_x * p.b_xm.transpose();
    check_pd(p.psi_m, "mediator");
    Eigen::Matrix<double, 4, 4> pred_cov;  // (x, eta_m)
    pred_cov(0, 0) = p.phi_x;
    pred_cov.block<1, 3>(0, 1) = (p.phi_x * p.b_xm).transpose();
    pred_cov.block<3, 1>(1, 0) = p.phi_x * p.b_xm;
    pred_cov.block<3, 3>(1, 1) = total;
    Eigen::Matrix<double, 3, 4> a;
    a.col(0) = p.b_xy;
    a.block<3, 3>(0, 1) = p.b_my;
    p.psi_y = total - a * pred_cov * a.transpose();
    check_pd(p.psi_y, "outcome");

    // intercepts chosen so the marginal factor means hit the shape preset
    p.alpha_m = mu - p.b_xm * p.mu_x;
    p.alpha_y = mu - p.b_xy * p.mu_x - p.b_my * mu;

    p.theta_m = th;
    p.theta_y = th;
    p.theta_my = th_cross;
    validate(p);
    out.m1 = p;
    out.packed = pack(p);
    return out;
  }

  ParamsModel2 p;
  const Eigen::Vector3d mu = gf_means(spec.shape);
  p.mu_x = mu;
  p.psi_x = total;
  p.knot_x = spec.knot_x;
  p.knot_m = spec.knot_m;
  p.knot_y = spec.knot_y;

  // the scenario manipulates the mediator -> outcome paths; covariate paths
  // stay at the medium share
  p.b_xm = coef_block(kMediumR2, kDelayedR2, total, total);
  p.b_xy = coef_block(kMediumR2, kDelayedR2, total, total);
  p.b_my = spec.scenario == Scenario::kZero
               ? Eigen::Matrix3d::Zero()
               : coef_block(r2, kDelayedR2, total, total);

  p.psi_m = total - p.b_xm * total * p.b_xm.transpose();
  check_pd(p.psi_m, "mediator");
  Eigen::Matrix<double, 6, 6> pred_cov;  // (eta_x, eta_m)
  pred_cov.block<3, 3>(0, 0) = total;
  pred_cov.block<3, 3>(0, 3) = total * p.b_xm.transpose();
  pred_cov.block<3, 3>(3, 0) = p.b_xm * total;
  pred_cov.block<3, 3>(3, 3) = total;
  Eigen::Matrix<double, 3, 6> a;
  a.block<3, 3>(0, 0) = p.b_xy;
  a.block<3, 3>(0, 3) = p.b_my;
  p.psi_y = total - a * pred_cov * a.transpose();
  check_pd(p.psi_y, "outcome");

  p.alpha_m = mu - p.b_xm * mu;
  p.alpha_y = mu - p.b_xy * mu - p.b_my * mu;

  p.theta_x = th;
  p.theta_m = th;
  p.theta_y = th;
  p.theta_xm = th_cross;
  p.theta_xy = th_cross;
  p.theta_my = th_cross;
  validate(p);
  out.m2 = p;
  out.packed = pack(p);
  return out;
}

Eigen::VectorXd generate_schedule(int J, double jitter, std::mt19937_64& rng) {
  if (J < 2) throw ValidationError("schedules need J >= 2");
  if (jitter < 0.0 || jitter >= 0.5) {
    throw ValidationError("time jitter must lie in [0, 0.5) to keep occasions ordered");
  }
  Eigen::VectorXd t(J);
  if (jitter == 0.0) {
    for (int j = 0; j < J; ++j) t[j] = j;
    return t;
  }
  std::uniform_real_distribution<double> u(-jitter, jitter);
  for (int j = 0; j < J; ++j) t[j] = j + u(rng);
  return t;
}

Dataset generate_dataset(const TruthBundle& truth, int n, int J,
                         double time_jitter, std::mt19937_64& rng) {
  Dataset data;
  data.model = truth.model;
  data.J = J;
  data.rows.resize(n);
  std::normal_distribution<double> z(0.0, 1.0);

  if (truth.model == Model::kModel1) {
    const ParamsModel1& p = truth.m1;
    validate(p, /*strict=*/false);
    const JointFactorMoments f = reduced_form_moments(p);
    const Eigen::MatrixXd root = psd_sqrt(f.cov);  // 7x7
    Eigen::Matrix2d theta;
    theta << p.theta_m, p.theta_my, p.theta_my, p.theta_y;
    const Eigen::MatrixXd eroot = psd_sqrt(theta);

    for (int i = 0; i < n; ++i) {
      auto& r = data.rows[i];
      r.id = std::to_string(i + 1);
      r.m_t = generate_schedule(J, time_jitter, rng);
      r.y_t = generate_schedule(J, time_jitter, rng);
      Eigen::VectorXd g(7);
      for (int k = 0; k < 7; ++k) g[k] = z(rng);
      const Eigen::VectorXd eta = f.mean + root * g;
      r.x = eta[0];
      const Eigen::Vector3d eta_m = eta.segment<3>(1);
      const Eigen::Vector3d eta_y = eta.segment<3>(4);
      const Eigen::MatrixXd lam_m = bilinear_loadings(r.m_t, p.knot_m);
      const Eigen::MatrixXd lam_y = bilinear_loadings(r.y_t, p.knot_y);
      r.m_v.resize(J);
      r.y_v.resize(J);
      for (int j = 0; j < J; ++j) {
        Eigen::Vector2d e(z(rng), z(rng));
        e = eroot * e;
        r.m_v[j] = lam_m.row(j).dot(eta_m) + e[0];
        r.y_v[j] = lam_y.row(j).dot(eta_y) + e[1];
      }
    }
    return data;
  }

  if (truth.model == Model::kModel2) {
    const ParamsModel2& p = truth.m2;
    validate(p, /*strict=*/false);
    const JointFactorMoments f = reduced_form_moments(p);
    const Eigen::MatrixXd root = psd_sqrt(f.cov);  // 9x9
    Eigen::Matrix3d theta;
    theta << p.theta_x, p.theta_xm, p.theta_xy,
             p.theta_xm, p.theta_m, p.theta_my,
             p.theta_xy, p.theta_my, p.theta_y;
    const Eigen::MatrixXd eroot = psd_sqrt(theta);

    for (int i = 0; i < n; ++i) {
      auto& r = data.rows[i];
      r.id = std::to_string(i + 1);
      r.x_t = generate_schedule(J, time_jitter, rng);
      r.m_t = generate_schedule(J, time_jitter, rng);
      r.y_t = generate_schedule(J, time_jitter, rng);
      Eigen::VectorXd g(9);
      for (int k = 0; k < 9; ++k) g[k] = z(rng);
      const Eigen::VectorXd eta = f.mean + root * g;
      const Eigen::MatrixXd lam_x = bilinear_loadings(r.x_t, p.knot_x);
      const Eigen::MatrixXd lam_m = bilinear_loadings(r.m_t, p.knot_m);
      const Eigen::MatrixXd lam_y = bilinear_loadings(r.y_t, p.knot_y);
      r.x_v.resize(J);
      r.m_v.resize(J);
      r.y_v.resize(J);
      for (int j = 0; j < J; ++j) {
        Eigen::Vector3d e(z(rng), z(rng), z(rng));
        e = eroot * e;
        r.x_v[j] = lam_x.row(j).dot(eta.segment<3>(0)) + e[0];
        r.m_v[j] = lam_m.row(j).dot(eta.segment<3>(3)) + e[1];
        r.y_v[j] = lam_y.row(j).dot(eta.segment<3>(6)) + e[2];
      }
    }
    return data;
  }
  throw ValidationError("datasets are generated for Model 1 or Model 2");
}

}  // namespace longmed
