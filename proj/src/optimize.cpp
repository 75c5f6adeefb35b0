#include "optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace longmed {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kFdStep = std::cbrt(std::numeric_limits<double>::epsilon());

double fd_step(double xi) { return kFdStep * std::max(1.0, std::abs(xi)); }

// gradient and, optionally, the free diagonal curvature estimate from the
// same six.. two evaluations per coordinate
Eigen::VectorXd gradient_impl(const Objective& f, const Eigen::VectorXd& x,
                              double fx, long long* fevals,
                              Eigen::VectorXd* diag_curv) {
  const int d = static_cast<int>(x.size());
  Eigen::VectorXd g(d);
  if (diag_curv) diag_curv->resize(d);
  Eigen::VectorXd xp = x;
  for (int i = 0; i < d; ++i) {
    const double h = fd_step(x[i]);
    xp[i] = x[i] + h;
    const double fp = f(xp);
    xp[i] = x[i] - h;
    const double fm = f(xp);
    xp[i] = x[i];
    if (fevals) *fevals += 2;
    if (std::isfinite(fp) && std::isfinite(fm)) {
      g[i] = (fp - fm) / (2.0 * h);
      if (diag_curv) (*diag_curv)[i] = (fp - 2.0 * fx + fm) / (h * h);
    } else if (std::isfinite(fp)) {
      g[i] = (fp - fx) / h;
      if (diag_curv) (*diag_curv)[i] = 0.0;
    } else if (std::isfinite(fm)) {
      g[i] = (fx - fm) / h;
      if (diag_curv) (*diag_curv)[i] = 0.0;
    } else {
      g[i] = 0.0;
      if (diag_curv) (*diag_curv)[i] = 0.0;
    }
  }
  return g;
}

struct LineSearchResult {
  bool ok = false;
  double alpha = 0.0;
  double f = kInf;
  Eigen::VectorXd x;
  Eigen::VectorXd g;      // gradient at x when have_grad
  bool have_grad = false;
};

constexpr double kC1 = 1e-4;
constexpr double kC2 = 0.9;

}  // namespace

Eigen::VectorXd central_gradient(const Objective& f, const Eigen::VectorXd& x,
                                 double fx, long long* fevals) {
  return gradient_impl(f, x, fx, fevals, nullptr);
}

namespace {

// strong Wolfe line search (bracket + zoom)
LineSearchResult wolfe_search(const Objective& f, const Eigen::VectorXd& x0,
                              double f0, const Eigen::VectorXd& g0,
                              const Eigen::VectorXd& p, long long* fevals) {
  LineSearchResult best;
  const double dphi0 = g0.dot(p);
  if (!(dphi0 < 0.0)) return best;

  auto phi = [&](double a, Eigen::VectorXd& xa) {
    xa = x0 + a * p;
    ++*fevals;
    return f(xa);
  };
  auto dphi = [&](const Eigen::VectorXd& xa, double fa, Eigen::VectorXd& ga) {
    ga = central_gradient(f, xa, fa, fevals);
    return ga.dot(p);
  };

  auto zoom = [&](double lo, double f_lo, double hi, double f_hi) {
    Eigen::VectorXd xa, ga;
    for (int it = 0; it < 25; ++it) {
      // quadratic interpolation using phi(lo), dphi-free; fall back to bisection
      double a = 0.5 * (lo + hi);
      const double fa = phi(a, xa);
      if (!std::isfinite(fa) || fa > f0 + kC1 * a * dphi0 || fa >= f_lo) {
        hi = a;
        f_hi = fa;
        continue;
      }
      const double da = dphi(xa, fa, ga);
      if (std::abs(da) <= -kC2 * dphi0) {
        best.ok = true;
        best.alpha = a;
        best.f = fa;
        best.x = xa;
        best.g = ga;
        best.have_grad = true;
        return;
      }
      if (da * (hi - lo) >= 0.0) {
        hi = lo;
        f_hi = f_lo;
      }
      lo = a;
      f_lo = fa;
      if (std::abs(hi - lo) * p.norm() < 1e-14 * (1.0 + x0.norm())) break;
    }
    // settle for the best sufficient-decrease point found
    if (std::isfinite(f_lo) && f_lo < f0 && lo > 0.0) {
      Eigen::VectorXd xa2 = x0 + lo * p;
      best.ok = true;
      best.alpha = lo;
      best.f = f_lo;
      best.x = xa2;
      best.have_grad = false;
    }
  };

  double a_prev = 0.0, f_prev = f0;
  double a = 1.0;
  Eigen::VectorXd xa, ga;
  for (int it = 0; it < 20; ++it) {
    const double fa = phi(a, xa);
    if (!std::isfinite(fa) || fa > f0 + kC1 * a * dphi0 || (it > 0 && fa >= f_prev)) {
      zoom(a_prev, f_prev, a, fa);
      return best;
    }
    const double da = dphi(xa, fa, ga);
    if (std::abs(da) <= -kC2 * dphi0) {
      best.ok = true;
      best.alpha = a;
      best.f = fa;
      best.x = xa;
      best.g = ga;
      best.have_grad = true;
      return best;
    }
    if (da >= 0.0) {
      zoom(a, fa, a_prev, f_prev);
      return best;
    }
    a_prev = a;
    f_prev = fa;
    a = std::min(2.5 * a, 1e6);
  }
  return best;
}

}  // namespace

OptimResult minimize_bfgs(const Objective& f, const Eigen::VectorXd& x0,
                          const OptimOptions& opt) {
  const int d = static_cast<int>(x0.size());
  OptimResult res;
  res.x = x0;
  res.f = f(x0);
  res.fevals = 1;
  if (!std::isfinite(res.f)) {
    res.message = "objective not finite at the starting point";
    res.grad = Eigen::VectorXd::Zero(d);
    return res;
  }

  Eigen::VectorXd curv;
  res.grad = gradient_impl(f, res.x, res.f, &res.fevals, &curv);

  // diagonal preconditioner from the curvature estimates the first gradient
  // evaluation produced for free
  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(d, d);
  for (int i = 0; i < d; ++i) {
    double c = curv[i];
    if (std::isfinite(c) && c > 1e-8) {
      h_inv(i, i) = std::min(1.0 / c, 1e6);
    }
  }

  int stall = 0;
  for (res.iterations = 0; res.iterations < opt.max_iter; ++res.iterations) {
    if (res.grad.lpNorm<Eigen::Infinity>() < opt.grad_tol) {
      res.grad_converged = true;
      res.message = "gradient tolerance reached";
      return res;
    }
    Eigen::VectorXd p = -(h_inv.selfadjointView<Eigen::Lower>() * res.grad);
    if (!(p.dot(res.grad) < 0.0)) {
      // curvature approximation went bad; restart from scaled identity
      h_inv.setIdentity();
      p = -res.grad;
    }
    LineSearchResult ls = wolfe_search(f, res.x, res.f, res.grad, p, &res.fevals);
    if (!ls.ok) {
      // one steepest-descent retry before giving up
      h_inv.setIdentity();
      p = -res.grad;
      ls = wolfe_search(f, res.x, res.f, res.grad, p, &res.fevals);
      if (!ls.ok) {
        res.message = "line search failed";
        return res;
      }
    }
    if (!ls.have_grad) {
      ls.g = central_gradient(f, ls.x, ls.f, &res.fevals);
    }
    const Eigen::VectorXd s = ls.x - res.x;
    const Eigen::VectorXd y = ls.g - res.grad;
    const double f_drop = res.f - ls.f;
    res.x = ls.x;
    res.f = ls.f;
    res.grad = ls.g;

    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      // H <- (I - rho s y') H (I - rho y s') + rho s s'
      const Eigen::VectorXd hy = h_inv.selfadjointView<Eigen::Lower>() * y;
      const double yhy = y.dot(hy);
      h_inv.noalias() += (rho * rho * yhy + rho) * (s * s.transpose());
      h_inv.noalias() -= rho * (hy * s.transpose() + s * hy.transpose());
    }
    if (f_drop < 1e-14 * (1.0 + std::abs(res.f))) {
      if (++stall >= 3) {
        res.message = "stalled (no further decrease)";
        res.grad_converged = res.grad.lpNorm<Eigen::Infinity>() < opt.grad_tol;
        return res;
      }
    } else {
      stall = 0;
    }
  }
  res.grad_converged = res.grad.lpNorm<Eigen::Infinity>() < opt.grad_tol;
  res.message = res.grad_converged ? "gradient tolerance reached"
                                   : "iteration limit reached";
  return res;
}

}  // namespace longmed
