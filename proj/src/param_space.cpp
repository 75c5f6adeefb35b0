#include "param_space.hpp"

#include <cmath>

namespace longmed {

namespace {

const char* kGfSuffix[3] = {"1", "g", "2"};

void push_sym_names(std::vector<std::string>& names, const std::string& base) {
  // lower triangle, column-major
  static const char* kIdx[6] = {"11", "21", "31", "22", "32", "33"};
  for (const char* s : kIdx) names.push_back(base + "_" + s);
}

void push_tri_names(std::vector<std::string>& names, const std::string& base) {
  static const char* kIdx[6] = {"11", "1g", "12", "gg", "g2", "22"};
  for (const char* s : kIdx) names.push_back(base + "_" + s);
}

}  // namespace

Eigen::VectorXd pack_sym_lower(const Eigen::Matrix3d& s) {
  Eigen::VectorXd v(6);
  v << s(0, 0), s(1, 0), s(2, 0), s(1, 1), s(2, 1), s(2, 2);
  return v;
}

Eigen::Matrix3d unpack_sym_lower(const Eigen::Ref<const Eigen::VectorXd>& v) {
  Eigen::Matrix3d s;
  s << v[0], v[1], v[2],
       v[1], v[3], v[4],
       v[2], v[4], v[5];
  return s;
}

Eigen::VectorXd pack_tri_coef(const Eigen::Matrix3d& b) {
  Eigen::VectorXd v(6);
  v << b(0, 0), b(1, 0), b(2, 0), b(1, 1), b(2, 1), b(2, 2);
  return v;
}

Eigen::Matrix3d unpack_tri_coef(const Eigen::Ref<const Eigen::VectorXd>& v) {
  return lower_tri_coef(v[0], v[1], v[2], v[3], v[4], v[5]);
}

int param_dim(Model model) {
  switch (model) {
    case Model::kUnivariate: return 11;
    case Model::kModel1: return 37;
    case Model::kModel2: return 54;
  }
  return 0;
}

std::vector<std::string> param_names(Model model) {
  std::vector<std::string> names;
  switch (model) {
    case Model::kUnivariate: {
      for (auto* s : kGfSuffix) names.push_back(std::string("mu_") + s);
      names.push_back("gamma");
      push_sym_names(names, "psi");
      names.push_back("theta");
      break;
    }
    case Model::kModel1: {
      names.push_back("mu_x");
      names.push_back("phi_x");
      names.push_back("gamma_m");
      names.push_back("gamma_y");
      for (auto* s : kGfSuffix) names.push_back(std::string("alpha_m_") + s);
      for (auto* s : kGfSuffix) names.push_back(std::string("alpha_y_") + s);
      for (auto* s : kGfSuffix) names.push_back(std::string("b_xm_") + s);
      for (auto* s : kGfSuffix) names.push_back(std::string("b_xy_") + s);
      push_tri_names(names, "b_my");
      push_sym_names(names, "psi_m");
      push_sym_names(names, "psi_y");
      names.push_back("theta_m");
      names.push_back("theta_y");
      names.push_back("theta_my");
      break;
    }
    case Model::kModel2: {
      for (auto* s : kGfSuffix) names.push_back(std::string("mu_x_") + s);
      push_sym_names(names, "psi_x");
      names.push_back("gamma_x");
      names.push_back("gamma_m");
      names.push_back("gamma_y");
      for (auto* s : kGfSuffix) names.push_back(std::string("alpha_m_") + s);
      for (auto* s : kGfSuffix) names.push_back(std::string("alpha_y_") + s);
      push_tri_names(names, "b_xm");
      push_tri_names(names, "b_xy");
      push_tri_names(names, "b_my");
      push_sym_names(names, "psi_m");
      push_sym_names(names, "psi_y");
      names.push_back("theta_x");
      names.push_back("theta_m");
      names.push_back("theta_y");
      names.push_back("theta_xm");
      names.push_back("theta_xy");
      names.push_back("theta_my");
      break;
    }
  }
  return names;
}

Eigen::VectorXd pack(const ParamsUnivariate& p) {
  Eigen::VectorXd v(11);
  v.segment<3>(0) = p.mu;
  v[3] = p.knot;
  v.segment<6>(4) = pack_sym_lower(p.psi);
  v[10] = p.theta;
  return v;
}

namespace {

void expect_len(const Eigen::VectorXd& v, int want, const char* what) {
  if (v.size() != want) {
    throw ValidationError(std::string(what) + " unpacking needs " +
                          std::to_string(want) + " entries, got " +
                          std::to_string(v.size()));
  }
}

}  // namespace

ParamsUnivariate unpack_univariate(const Eigen::VectorXd& v) {
  expect_len(v, 11, "univariate");
  ParamsUnivariate p;
  p.mu = v.segment<3>(0);
  p.knot = v[3];
  p.psi = unpack_sym_lower(v.segment<6>(4));
  p.theta = v[10];
  return p;
}

Eigen::VectorXd pack(const ParamsModel1& p) {
  Eigen::VectorXd v(37);
  v[0] = p.mu_x;
  v[1] = p.phi_x;
  v[2] = p.knot_m;
  v[3] = p.knot_y;
  v.segment<3>(4) = p.alpha_m;
  v.segment<3>(7) = p.alpha_y;
  v.segment<3>(10) = p.b_xm;
  v.segment<3>(13) = p.b_xy;
  v.segment<6>(16) = pack_tri_coef(p.b_my);
  v.segment<6>(22) = pack_sym_lower(p.psi_m);
  v.segment<6>(28) = pack_sym_lower(p.psi_y);
  v[34] = p.theta_m;
  v[35] = p.theta_y;
  v[36] = p.theta_my;
  return v;
}

ParamsModel1 unpack_model1(const Eigen::VectorXd& v) {
  expect_len(v, 37, "model 1");
  ParamsModel1 p;
  p.mu_x = v[0];
  p.phi_x = v[1];
  p.knot_m = v[2];
  p.knot_y = v[3];
  p.alpha_m = v.segment<3>(4);
  p.alpha_y = v.segment<3>(7);
  p.b_xm = v.segment<3>(10);
  p.b_xy = v.segment<3>(13);
  p.b_my = unpack_tri_coef(v.segment<6>(16));
  p.psi_m = unpack_sym_lower(v.segment<6>(22));
  p.psi_y = unpack_sym_lower(v.segment<6>(28));
  p.theta_m = v[34];
  p.theta_y = v[35];
  p.theta_my = v[36];
  return p;
}

Eigen::VectorXd pack(const ParamsModel2& p) {
  Eigen::VectorXd v(54);
  v.segment<3>(0) = p.mu_x;
  v.segment<6>(3) = pack_sym_lower(p.psi_x);
  v[9] = p.knot_x;
  v[10] = p.knot_m;
  v[11] = p.knot_y;
  v.segment<3>(12) = p.alpha_m;
  v.segment<3>(15) = p.alpha_y;
  v.segment<6>(18) = pack_tri_coef(p.b_xm);
  v.segment<6>(24) = pack_tri_coef(p.b_xy);
  v.segment<6>(30) = pack_tri_coef(p.b_my);
  v.segment<6>(36) = pack_sym_lower(p.psi_m);
  v.segment<6>(42) = pack_sym_lower(p.psi_y);
  v[48] = p.theta_x;
  v[49] = p.theta_m;
  v[50] = p.theta_y;
  v[51] = p.theta_xm;
  v[52] = p.theta_xy;
  v[53] = p.theta_my;
  return v;
}

ParamsModel2 unpack_model2(const Eigen::VectorXd& v) {
  expect_len(v, 54, "model 2");
  ParamsModel2 p;
  p.mu_x = v.segment<3>(0);
  p.psi_x = unpack_sym_lower(v.segment<6>(3));
  p.knot_x = v[9];
  p.knot_m = v[10];
  p.knot_y = v[11];
  p.alpha_m = v.segment<3>(12);
  p.alpha_y = v.segment<3>(15);
  p.b_xm = unpack_tri_coef(v.segment<6>(18));
  p.b_xy = unpack_tri_coef(v.segment<6>(24));
  p.b_my = unpack_tri_coef(v.segment<6>(30));
  p.psi_m = unpack_sym_lower(v.segment<6>(36));
  p.psi_y = unpack_sym_lower(v.segment<6>(42));
  p.theta_x = v[48];
  p.theta_m = v[49];
  p.theta_y = v[50];
  p.theta_xm = v[51];
  p.theta_xy = v[52];
  p.theta_my = v[53];
  return p;
}

namespace {

KnotWindow window_for(const Dataset& data, char process) {
  const TimeRange r = process_time_range(data, process);
  const double span = r.hi - r.lo;
  if (!(span > 0)) {
    throw ValidationError(std::string("process ") + process +
                          " has a degenerate observed time range");
  }
  const double d = 0.1 * span / static_cast<double>(data.J - 1);
  return KnotWindow{r.lo + d, r.hi - d};
}

}  // namespace

ParamSpace make_param_space(Model model, const Dataset& data) {
  ParamSpace sp;
  sp.model = model;
  sp.dim = param_dim(model);
  sp.names = param_names(model);
  switch (model) {
    case Model::kUnivariate:
      sp.knot_coords = {3};
      sp.knot_windows = {window_for(data, 'm')};
      sp.psi_starts = {4};
      sp.log_coords = {10};
      break;
    case Model::kModel1:
      sp.knot_coords = {2, 3};
      sp.knot_windows = {window_for(data, 'm'), window_for(data, 'y')};
      sp.psi_starts = {22, 28};
      sp.log_coords = {1, 34, 35};
      break;
    case Model::kModel2:
      sp.knot_coords = {9, 10, 11};
      sp.knot_windows = {window_for(data, 'x'), window_for(data, 'm'),
                         window_for(data, 'y')};
      sp.psi_starts = {3, 36, 42};
      sp.log_coords = {48, 49, 50};
      break;
  }
  return sp;
}

Eigen::VectorXd to_unconstrained(const Eigen::VectorXd& natural,
                                 const ParamSpace& space) {
  if (natural.size() != space.dim) {
    throw ValidationError("parameter vector has wrong length");
  }
  Eigen::VectorXd u = natural;
  for (int c : space.log_coords) {
    if (!(natural[c] > 0.0)) {
      throw ValidationError("variance parameter " + space.names[c] +
                            " must be positive");
    }
    u[c] = std::log(natural[c]);
  }
  for (std::size_t k = 0; k < space.knot_coords.size(); ++k) {
    const int c = space.knot_coords[k];
    const KnotWindow w = space.knot_windows[k];
    const double g = natural[c];
    if (!(g > w.lo && g < w.hi)) {
      throw ValidationError("knot " + space.names[c] + " lies outside (" +
                            std::to_string(w.lo) + ", " + std::to_string(w.hi) + ")");
    }
    const double p = (g - w.lo) / (w.hi - w.lo);
    u[c] = std::log(p / (1.0 - p));
  }
  for (int start : space.psi_starts) {
    const Eigen::Matrix3d psi = unpack_sym_lower(natural.segment<6>(start));
    Eigen::LLT<Eigen::Matrix3d> llt(psi);
    if (llt.info() != Eigen::Success) {
      throw ValidationError("covariance block at " + space.names[start] +
                            " is not positive definite");
    }
    const Eigen::Matrix3d l = llt.matrixL();
    u[start + 0] = std::log(l(0, 0));
    u[start + 1] = l(1, 0);
    u[start + 2] = l(2, 0);
    u[start + 3] = std::log(l(1, 1));
    u[start + 4] = l(2, 1);
    u[start + 5] = std::log(l(2, 2));
  }
  return u;
}

Eigen::VectorXd to_natural(const Eigen::VectorXd& unconstrained,
                           const ParamSpace& space) {
  if (unconstrained.size() != space.dim) {
    throw ValidationError("parameter vector has wrong length");
  }
  Eigen::VectorXd v = unconstrained;
  for (int c : space.log_coords) v[c] = std::exp(unconstrained[c]);
  for (std::size_t k = 0; k < space.knot_coords.size(); ++k) {
    const int c = space.knot_coords[k];
    const KnotWindow w = space.knot_windows[k];
    const double s = 1.0 / (1.0 + std::exp(-unconstrained[c]));
    v[c] = w.lo + (w.hi - w.lo) * s;
  }
  for (int start : space.psi_starts) {
    Eigen::Matrix3d l = Eigen::Matrix3d::Zero();
    l(0, 0) = std::exp(unconstrained[start + 0]);
    l(1, 0) = unconstrained[start + 1];
    l(2, 0) = unconstrained[start + 2];
    l(1, 1) = std::exp(unconstrained[start + 3]);
    l(2, 1) = unconstrained[start + 4];
    l(2, 2) = std::exp(unconstrained[start + 5]);
    v.segment<6>(start) = pack_sym_lower(l * l.transpose());
  }
  return v;
}

}  // namespace longmed
