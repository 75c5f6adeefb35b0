#pragma once

// Canonical flat packing of each model's free parameters, display names, and
// the bijection onto an unconstrained space used by the optimizer.
//
// Packing orders (symmetric 3x3 blocks store the lower triangle column-major:
// s11, s21, s31, s22, s32, s33; lower-triangular coefficient blocks store
// b11, b1g, b12, bgg, bg2, b22 where the first subscript is the source factor
// and the second the target factor):
//
// Univariate (11): mu(3) | knot | psi(6) | theta
// Model 1 (37):    mu_x | phi_x | knot_m | knot_y | alpha_m(3) | alpha_y(3) |
//                  b_xm(3) | b_xy(3) | b_my(6) | psi_m(6) | psi_y(6) |
//                  theta_m | theta_y | theta_my
// Model 2 (54):    mu_x(3) | psi_x(6) | knot_x | knot_m | knot_y |
//                  alpha_m(3) | alpha_y(3) | b_xm(6) | b_xy(6) | b_my(6) |
//                  psi_m(6) | psi_y(6) | theta_x | theta_m | theta_y |
//                  theta_xm | theta_xy | theta_my
//
// Unconstrained mapping: variances through log; Psi blocks through the
// Cholesky factor with log diagonal; knots through a scaled logistic onto an
// interior window of the pooled observed times; everything else identity.

#include <string>
#include <vector>

#include "dataset.hpp"
#include "growth_model.hpp"

namespace longmed {

struct KnotWindow {
  double lo = 0.0;
  double hi = 1.0;
};

struct ParamSpace {
  Model model = Model::kModel1;
  int dim = 0;
  std::vector<std::string> names;
  std::vector<int> knot_coords;       // coordinates carrying knots
  std::vector<KnotWindow> knot_windows;  // parallel to knot_coords
  std::vector<int> psi_starts;        // each opens a 6-coordinate Psi block
  std::vector<int> log_coords;        // plain positive-variance coordinates
};

int param_dim(Model model);
std::vector<std::string> param_names(Model model);

// Knot windows come from the data: for each knotted process the window is
// (t_min + d, t_max - d) with d = 0.1 * (t_max - t_min) / (J - 1).
ParamSpace make_param_space(Model model, const Dataset& data);

// Packing between structs and the canonical flat vector.
Eigen::VectorXd pack(const ParamsUnivariate& p);
Eigen::VectorXd pack(const ParamsModel1& p);
Eigen::VectorXd pack(const ParamsModel2& p);
ParamsUnivariate unpack_univariate(const Eigen::VectorXd& v);
ParamsModel1 unpack_model1(const Eigen::VectorXd& v);
ParamsModel2 unpack_model2(const Eigen::VectorXd& v);

// Natural <-> unconstrained.  to_unconstrained throws ValidationError when
// the natural vector violates invariants (non-PD Psi, nonpositive variance,
// knot outside its window); to_natural is range-safe by construction.
Eigen::VectorXd to_unconstrained(const Eigen::VectorXd& natural, const ParamSpace& space);
Eigen::VectorXd to_natural(const Eigen::VectorXd& unconstrained, const ParamSpace& space);

// Lower-triangle packing helpers shared across modules.
Eigen::VectorXd pack_sym_lower(const Eigen::Matrix3d& s);   // 6 entries
Eigen::Matrix3d unpack_sym_lower(const Eigen::Ref<const Eigen::VectorXd>& v);
Eigen::VectorXd pack_tri_coef(const Eigen::Matrix3d& b);    // 6 entries
Eigen::Matrix3d unpack_tri_coef(const Eigen::Ref<const Eigen::VectorXd>& v);

}  // namespace longmed
