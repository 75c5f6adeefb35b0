#include "fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "likelihood.hpp"
#include "optimize.hpp"
#include "param_space.hpp"
#include "rng.hpp"

namespace longmed {

namespace {

constexpr double kVarFloor = 1e-4;

struct CrudeFit {
  double knot = 0.0;
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Matrix3d psi = Eigen::Matrix3d::Identity();
  double theta = 1.0;
};

void process_data(const Dataset& d, char u, Eigen::MatrixXd& t, Eigen::MatrixXd& v) {
  const int n = d.n();
  t.resize(d.J, n);
  v.resize(d.J, n);
  for (int i = 0; i < n; ++i) {
    const auto& r = d.rows[i];
    switch (u) {
      case 'x': t.col(i) = r.x_t; v.col(i) = r.x_v; break;
      case 'm': t.col(i) = r.m_t; v.col(i) = r.m_v; break;
      case 'y': t.col(i) = r.y_t; v.col(i) = r.y_v; break;
    }
  }
}

double ls_slope(const Eigen::VectorXd& t, const Eigen::VectorXd& v) {
  const double tb = t.mean(), vb = v.mean();
  double sxx = 0.0, sxy = 0.0;
  for (int j = 0; j < t.size(); ++j) {
    sxx += (t[j] - tb) * (t[j] - tb);
    sxy += (t[j] - tb) * (v[j] - vb);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

// Split each trajectory at the pooled median time, fit a least-squares line
// to each side, and read the level off the observation nearest the split.
CrudeFit crude_process_fit(const Eigen::MatrixXd& t, const Eigen::MatrixXd& v) {
  const int j_count = static_cast<int>(t.rows());
  const int n = static_cast<int>(t.cols());
  CrudeFit out;

  std::vector<double> pool(t.data(), t.data() + t.size());
  std::sort(pool.begin(), pool.end());
  const double med = 0.5 * (pool[(pool.size() - 1) / 2] + pool[pool.size() / 2]);
  out.knot = med;

  Eigen::MatrixXd gf(n, 3);
  double rss = 0.0;
  long long rcount = 0;
  for (int i = 0; i < n; ++i) {
    std::vector<double> pre_t, pre_v, post_t, post_v;
    int nearest = 0;
    for (int j = 0; j < j_count; ++j) {
      if (t(j, i) <= med) { pre_t.push_back(t(j, i)); pre_v.push_back(v(j, i)); }
      if (t(j, i) >= med) { post_t.push_back(t(j, i)); post_v.push_back(v(j, i)); }
      if (std::abs(t(j, i) - med) < std::abs(t(nearest, i) - med)) nearest = j;
    }
    double s1, s2;
    if (pre_t.size() >= 2 && post_t.size() >= 2) {
      s1 = ls_slope(Eigen::Map<Eigen::VectorXd>(pre_t.data(), pre_t.size()),
                    Eigen::Map<Eigen::VectorXd>(pre_v.data(), pre_v.size()));
      s2 = ls_slope(Eigen::Map<Eigen::VectorXd>(post_t.data(), post_t.size()),
                    Eigen::Map<Eigen::VectorXd>(post_v.data(), post_v.size()));
    } else {
      // too few points on one side: one global slope from the endpoints
      s1 = s2 = (v(j_count - 1, i) - v(0, i)) / (t(j_count - 1, i) - t(0, i));
    }
    const double level = v(nearest, i);
    gf(i, 0) = s1;
    gf(i, 1) = level;
    gf(i, 2) = s2;
    for (int j = 0; j < j_count; ++j) {
      const double d = t(j, i) - med;
      const double pred = level + s1 * std::min(0.0, d) + s2 * std::max(0.0, d);
      rss += (v(j, i) - pred) * (v(j, i) - pred);
      ++rcount;
    }
  }
  out.mean = gf.colwise().mean();
  Eigen::MatrixXd centered = gf.rowwise() - out.mean.transpose();
  Eigen::Matrix3d cov =
      centered.transpose() * centered / std::max(1, n - 1);
  // shrink toward the diagonal, floor the variances, and make sure the
  // transform will accept it
  Eigen::Matrix3d shrunk = 0.8 * cov + 0.2 * Eigen::Matrix3d(cov.diagonal().asDiagonal());
  for (int k = 0; k < 3; ++k) {
    shrunk(k, k) = std::max(shrunk(k, k), kVarFloor);
  }
  Eigen::LLT<Eigen::Matrix3d> llt(shrunk);
  while (llt.info() != Eigen::Success) {
    shrunk += 0.1 * Eigen::Matrix3d(shrunk.diagonal().asDiagonal()) +
              kVarFloor * Eigen::Matrix3d::Identity();
    llt.compute(shrunk);
  }
  out.psi = shrunk;
  out.theta = std::max(rss / std::max<long long>(1, rcount), kVarFloor);
  return out;
}

double clamp_knot(double knot, const KnotWindow& w) {
  const double margin = 0.02 * (w.hi - w.lo);
  return std::clamp(knot, w.lo + margin, w.hi - margin);
}

// mean/intercept coordinates per model, for the restart jitter
std::vector<int> mean_coords(Model model) {
  switch (model) {
    case Model::kUnivariate: return {0, 1, 2};
    case Model::kModel1: return {0, 4, 5, 6, 7, 8, 9};
    case Model::kModel2: return {0, 1, 2, 12, 13, 14, 15, 16, 17};
  }
  return {};
}

Eigen::VectorXd jitter_start(const Eigen::VectorXd& natural, const ParamSpace& space,
                             const std::vector<double>& knot_gaps,
                             std::mt19937_64& rng) {
  std::uniform_real_distribution<double> scale(0.8, 1.2);
  std::uniform_real_distribution<double> unit(-0.5, 0.5);
  Eigen::VectorXd v = natural;
  for (int c : mean_coords(space.model)) v[c] *= scale(rng);
  for (int c : space.log_coords) v[c] *= scale(rng);
  for (int start : space.psi_starts) {
    // scale the block as D * Psi * D so it stays positive definite
    Eigen::Matrix3d psi = unpack_sym_lower(v.segment<6>(start));
    Eigen::Vector3d d;
    for (int k = 0; k < 3; ++k) d[k] = std::sqrt(scale(rng));
    psi = d.asDiagonal() * psi * d.asDiagonal();
    v.segment<6>(start) = pack_sym_lower(psi);
  }
  for (std::size_t k = 0; k < space.knot_coords.size(); ++k) {
    const int c = space.knot_coords[k];
    v[c] = clamp_knot(v[c] + unit(rng) * knot_gaps[k], space.knot_windows[k]);
  }
  return v;
}

// The knot coordinates make the objective piecewise smooth in the data: an
// optimum sitting exactly on an observed occasion leaves a subgradient gap
// that finite differences report as a small nonzero "gradient" no line search
// can improve on.  Points under this ceiling earn a direct probe instead.
constexpr double kKinkGradCeiling = 1e-3;

// 2d probes at relative scale `rel_step`: true when none of them sits
// measurably below f(x)
bool no_local_improvement(const Objective& f, const Eigen::VectorXd& x,
                          double fx, double rel_step) {
  const double margin = 1e-10 * (1.0 + std::abs(fx));
  Eigen::VectorXd xp = x;
  for (int i = 0; i < static_cast<int>(x.size()); ++i) {
    const double h = rel_step * std::max(1.0, std::abs(x[i]));
    for (const double s : {h, -h}) {
      xp[i] = x[i] + s;
      const double fp = f(xp);
      if (std::isfinite(fp) && fp < fx - margin) return false;
    }
    xp[i] = x[i];
  }
  return true;
}

// observed information: central-difference Hessian of the summed negative
// log-likelihood at the optimum, natural space
Eigen::MatrixXd natural_hessian(const Objective& nll, const Eigen::VectorXd& theta,
                                bool* ok) {
  const int d = static_cast<int>(theta.size());
  Eigen::MatrixXd h(d, d);
  Eigen::VectorXd step(d);
  for (int i = 0; i < d; ++i) step[i] = std::max(1e-4, 1e-4 * std::abs(theta[i]));
  *ok = true;
  const double f0 = nll(theta);
  Eigen::VectorXd x = theta;
  for (int i = 0; i < d && *ok; ++i) {
    x[i] = theta[i] + step[i];
    const double fp = nll(x);
    x[i] = theta[i] - step[i];
    const double fm = nll(x);
    x[i] = theta[i];
    h(i, i) = (fp - 2.0 * f0 + fm) / (step[i] * step[i]);
    if (!std::isfinite(h(i, i))) *ok = false;
  }
  for (int i = 0; i < d && *ok; ++i) {
    for (int j = i + 1; j < d && *ok; ++j) {
      x[i] = theta[i] + step[i]; x[j] = theta[j] + step[j];
      const double fpp = nll(x);
      x[j] = theta[j] - step[j];
      const double fpm = nll(x);
      x[i] = theta[i] - step[i]; x[j] = theta[j] + step[j];
      const double fmp = nll(x);
      x[j] = theta[j] - step[j];
      const double fmm = nll(x);
      x[i] = theta[i]; x[j] = theta[j];
      h(i, j) = h(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * step[i] * step[j]);
      if (!std::isfinite(h(i, j))) *ok = false;
    }
  }
  return h;
}

}  // namespace

Eigen::VectorXd starting_values(const Dataset& data, Model model) {
  Eigen::MatrixXd t, v;
  switch (model) {
    case Model::kUnivariate: {
      process_data(data, 'm', t, v);
      const CrudeFit c = crude_process_fit(t, v);
      ParamsUnivariate p;
      p.mu = c.mean;
      p.knot = c.knot;
      p.psi = c.psi;
      p.theta = c.theta;
      return pack(p);
    }
    case Model::kModel1: {
      ParamsModel1 p;
      double sx = 0.0, sxx = 0.0;
      for (const auto& r : data.rows) { sx += r.x; sxx += r.x * r.x; }
      const int n = data.n();
      p.mu_x = sx / n;
      p.phi_x = std::max(sxx / n - p.mu_x * p.mu_x, kVarFloor);
      process_data(data, 'm', t, v);
      const CrudeFit cm = crude_process_fit(t, v);
      process_data(data, 'y', t, v);
      const CrudeFit cy = crude_process_fit(t, v);
      p.knot_m = cm.knot;
      p.knot_y = cy.knot;
      p.alpha_m = cm.mean;
      p.alpha_y = cy.mean;
      p.psi_m = cm.psi;
      p.psi_y = cy.psi;
      p.theta_m = cm.theta;
      p.theta_y = cy.theta;
      return pack(p);
    }
    case Model::kModel2: {
      ParamsModel2 p;
      process_data(data, 'x', t, v);
      const CrudeFit cx = crude_process_fit(t, v);
      process_data(data, 'm', t, v);
      const CrudeFit cm = crude_process_fit(t, v);
      process_data(data, 'y', t, v);
      const CrudeFit cy = crude_process_fit(t, v);
      p.mu_x = cx.mean;
      p.psi_x = cx.psi;
      p.knot_x = cx.knot;
      p.knot_m = cm.knot;
      p.knot_y = cy.knot;
      p.alpha_m = cm.mean;
      p.alpha_y = cy.mean;
      p.psi_m = cm.psi;
      p.psi_y = cy.psi;
      p.theta_x = cx.theta;
      p.theta_m = cm.theta;
      p.theta_y = cy.theta;
      return pack(p);
    }
  }
  throw ValidationError("unknown model");
}

FitResult fit(const Dataset& data, Model model, const FitOptions& options) {
  validate(data);
  if (data.model != model) {
    throw ValidationError("dataset columns do not match the requested model");
  }
  FitResult res;
  res.model = model;
  res.n = data.n();
  res.J = data.J;

  const ParamSpace space = make_param_space(model, data);
  Eigen::VectorXd start = starting_values(data, model);
  for (std::size_t k = 0; k < space.knot_coords.size(); ++k) {
    const int c = space.knot_coords[k];
    start[c] = clamp_knot(start[c], space.knot_windows[k]);
  }
  res.natural = start;

  auto fill_params = [&](bool cov_ok) {
    res.params.assign(space.dim, ParamSummary{});
    for (int i = 0; i < space.dim; ++i) {
      auto& s = res.params[i];
      s.name = space.names[i];
      s.est = res.natural[i];
      if (cov_ok) {
        s.se = std::sqrt(std::max(0.0, res.param_cov(i, i)));
        s.lo = s.est - 1.96 * s.se;
        s.hi = s.est + 1.96 * s.se;
        s.se_ok = true;
      } else {
        s.lo = s.hi = s.est;
      }
    }
    if (model != Model::kUnivariate) {
      res.effects = compute_effects(model, res.natural, res.param_cov, cov_ok);
      res.derived_means =
          compute_derived_means(model, res.natural, res.param_cov, cov_ok);
    }
  };

  if (res.n < space.dim) {
    res.message = "under-identified: " + std::to_string(res.n) +
                  " individuals for " + std::to_string(space.dim) +
                  " free parameters";
    res.param_cov = Eigen::MatrixXd::Zero(space.dim, space.dim);
    res.loglik = std::numeric_limits<double>::quiet_NaN();
    fill_params(false);
    return res;
  }

  const LoglikEvaluator eval(data);
  const double inv_n = 1.0 / res.n;
  const Objective obj = [&](const Eigen::VectorXd& u) {
    return -eval.sum_loglik(to_natural(u, space)) * inv_n;
  };
  const Objective nll_sum = [&](const Eigen::VectorXd& nat) {
    return -eval.sum_loglik(nat);
  };

  std::vector<double> knot_gaps;
  for (const auto& w : space.knot_windows) {
    // window spans the observed range minus 2*(0.1*gap): solve back for gap
    knot_gaps.push_back((w.hi - w.lo) / (data.J - 1 - 0.2));
  }

  std::mt19937_64 rng = make_rng(options.seed, 0x6a17);

  // best point that met the gradient tolerance but lacked a usable
  // information matrix, and the overall best objective seen
  bool have_flat = false;
  double flat_f = std::numeric_limits<double>::infinity();
  Eigen::VectorXd flat_x;
  std::string flat_msg;
  bool have_any = false;
  double any_f = std::numeric_limits<double>::infinity();
  Eigen::VectorXd any_x;
  std::string any_msg = "no start produced a usable optimum";

  for (int s = 0; s < std::max(1, options.max_starts); ++s) {
    Eigen::VectorXd nat0 = s == 0 ? start : jitter_start(start, space, knot_gaps, rng);
    Eigen::VectorXd u0;
    try {
      u0 = to_unconstrained(nat0, space);
    } catch (const ValidationError&) {
      continue;  // jitter produced an invalid start; try the next one
    }
    OptimOptions oo;
    oo.grad_tol = options.grad_tol;
    oo.max_iter = options.max_iter;
    const OptimResult opt = minimize_bfgs(obj, u0, oo);
    if (std::isfinite(opt.f) && opt.f < any_f) {
      any_f = opt.f;
      any_x = opt.x;
      any_msg = opt.message;
      have_any = true;
    }
    bool at_optimum = opt.grad_converged;
    if (!at_optimum && std::isfinite(opt.f) &&
        opt.grad.lpNorm<Eigen::Infinity>() < kKinkGradCeiling) {
      at_optimum = no_local_improvement(obj, opt.x, opt.f, 1e-4) &&
                   no_local_improvement(obj, opt.x, opt.f, 1e-3);
    }
    if (!at_optimum) continue;
    // a flat-information candidate with a better likelihood outranks this one
    if (have_flat && flat_f < opt.f - 1e-10 * (1.0 + std::abs(opt.f))) {
      continue;
    }
    const Eigen::VectorXd theta = to_natural(opt.x, space);
    bool h_ok = false;
    Eigen::MatrixXd h = natural_hessian(nll_sum, theta, &h_ok);
    if (h_ok) {
      h.diagonal().array() += 1e-8;
      Eigen::LLT<Eigen::MatrixXd> llt(h);
      if (llt.info() == Eigen::Success) {
        res.converged = true;
        res.starts_used = s + 1;
        res.natural = theta;
        res.loglik = -opt.f * res.n;
        res.grad_norm = opt.grad.lpNorm<Eigen::Infinity>();
        res.param_cov = llt.solve(Eigen::MatrixXd::Identity(space.dim, space.dim));
        res.cov_ok = true;
        res.message = "converged";
        fill_params(true);
        return res;
      }
    }
    if (opt.f < flat_f) {
      have_flat = true;
      flat_f = opt.f;
      flat_x = opt.x;
      flat_msg = "gradient converged but the observed information is singular";
    }
  }

  res.starts_used = std::max(1, options.max_starts);
  res.param_cov = Eigen::MatrixXd::Zero(space.dim, space.dim);
  if (have_flat) {
    res.natural = to_natural(flat_x, space);
    res.loglik = -flat_f * res.n;
    res.message = flat_msg;
  } else if (have_any) {
    res.natural = to_natural(any_x, space);
    res.loglik = -any_f * res.n;
    res.message = "did not converge: " + any_msg;
  } else {
    res.loglik = std::numeric_limits<double>::quiet_NaN();
    res.message = any_msg;
  }
  fill_params(false);
  return res;
}

}  // namespace longmed
