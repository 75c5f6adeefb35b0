#include "effects.hpp"

#include <cmath>

#include "param_space.hpp"

namespace longmed {

namespace {

const char* kGfTag[3] = {"1", "g", "2"};

// packed offset of lower-triangular coefficient entry (target r, source c)
int tri_offset(int r, int c) {
  static const int k[3][3] = {{0, -1, -1}, {1, 3, -1}, {2, 4, 5}};
  return k[r][c];
}

// direct labels for a 6-entry lower-triangular block, packed order
void push_tri_directs(std::vector<EffectDef>& out, int start,
                      const std::string& src, const std::string& dst) {
  static const int kSrc[6] = {0, 0, 0, 1, 1, 2};
  static const int kDst[6] = {0, 1, 2, 1, 2, 2};
  for (int i = 0; i < 6; ++i) {
    EffectDef d;
    d.label = src + kGfTag[kSrc[i]] + "->" + dst + kGfTag[kDst[i]];
    d.kind = EffectKind::kDirect;
    d.direct_idx = start + i;
    out.push_back(d);
  }
}

std::vector<EffectDef> build_catalog_m1() {
  std::vector<EffectDef> out;
  // direct coefficients, in packed order
  for (int k = 0; k < 3; ++k) {
    out.push_back({std::string("x->m") + kGfTag[k], EffectKind::kDirect, 10 + k, {}});
  }
  for (int k = 0; k < 3; ++k) {
    out.push_back({std::string("x->y") + kGfTag[k], EffectKind::kDirect, 13 + k, {}});
  }
  push_tri_directs(out, 16, "m", "y");

  // mediated paths x -> m_a -> y_b for admissible (a <= b)
  for (int a = 0; a < 3; ++a) {
    for (int b = a; b < 3; ++b) {
      EffectDef d;
      d.label = std::string("x->m") + kGfTag[a] + "->y" + kGfTag[b];
      d.kind = EffectKind::kIndirect;
      d.products = {{10 + a, 16 + tri_offset(b, a)}};
      out.push_back(d);
    }
  }
  // totals per outcome factor
  for (int b = 0; b < 3; ++b) {
    EffectDef d;
    d.label = std::string("x->y") + kGfTag[b] + " total";
    d.kind = EffectKind::kTotal;
    d.direct_idx = 13 + b;
    for (int a = 0; a <= b; ++a) {
      d.products.push_back({10 + a, 16 + tri_offset(b, a)});
    }
    out.push_back(d);
  }
  return out;
}

std::vector<EffectDef> build_catalog_m2() {
  std::vector<EffectDef> out;
  push_tri_directs(out, 18, "x", "m");
  push_tri_directs(out, 24, "x", "y");
  push_tri_directs(out, 30, "m", "y");

  // x_a -> m_b -> y_c for a <= b <= c
  for (int a = 0; a < 3; ++a) {
    for (int b = a; b < 3; ++b) {
      for (int c = b; c < 3; ++c) {
        EffectDef d;
        d.label = std::string("x") + kGfTag[a] + "->m" + kGfTag[b] + "->y" + kGfTag[c];
        d.kind = EffectKind::kIndirect;
        d.products = {{18 + tri_offset(b, a), 30 + tri_offset(c, b)}};
        out.push_back(d);
      }
    }
  }
  // totals per (covariate factor a, outcome factor c)
  for (int a = 0; a < 3; ++a) {
    for (int c = a; c < 3; ++c) {
      EffectDef d;
      d.label = std::string("x") + kGfTag[a] + "->y" + kGfTag[c] + " total";
      d.kind = EffectKind::kTotal;
      d.direct_idx = 24 + tri_offset(c, a);
      for (int b = a; b <= c; ++b) {
        d.products.push_back({18 + tri_offset(b, a), 30 + tri_offset(c, b)});
      }
      out.push_back(d);
    }
  }
  return out;
}

}  // namespace

const char* effect_kind_name(EffectKind kind) {
  switch (kind) {
    case EffectKind::kDirect: return "direct";
    case EffectKind::kIndirect: return "indirect";
    case EffectKind::kTotal: return "total";
  }
  return "?";
}

const std::vector<EffectDef>& effect_catalog(Model model) {
  static const std::vector<EffectDef> m1 = build_catalog_m1();
  static const std::vector<EffectDef> m2 = build_catalog_m2();
  if (model == Model::kModel1) return m1;
  if (model == Model::kModel2) return m2;
  static const std::vector<EffectDef> none;
  return none;
}

double effect_value(const EffectDef& def, const Eigen::VectorXd& natural) {
  double v = def.direct_idx >= 0 ? natural[def.direct_idx] : 0.0;
  for (const auto& [a, b] : def.products) v += natural[a] * natural[b];
  return v;
}

Eigen::VectorXd effect_gradient(const EffectDef& def, const Eigen::VectorXd& natural) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(natural.size());
  if (def.direct_idx >= 0) g[def.direct_idx] += 1.0;
  for (const auto& [a, b] : def.products) {
    g[a] += natural[b];
    g[b] += natural[a];
  }
  return g;
}

namespace {

void fill_interval(double est, double var, bool cov_ok, double* se, double* lo,
                   double* hi, bool* se_ok) {
  if (cov_ok && var >= 0.0 && std::isfinite(var)) {
    *se = std::sqrt(var);
    *lo = est - 1.96 * *se;
    *hi = est + 1.96 * *se;
    *se_ok = true;
  } else {
    *se = 0.0;
    *lo = *hi = est;
    *se_ok = false;
  }
}

}  // namespace

std::vector<EffectEstimate> compute_effects(Model model,
                                            const Eigen::VectorXd& natural,
                                            const Eigen::MatrixXd& param_cov,
                                            bool cov_ok) {
  std::vector<EffectEstimate> out;
  for (const auto& def : effect_catalog(model)) {
    EffectEstimate e;
    e.label = def.label;
    e.kind = def.kind;
    e.est = effect_value(def, natural);
    double var = -1.0;
    if (cov_ok) {
      const Eigen::VectorXd g = effect_gradient(def, natural);
      var = g.dot(param_cov * g);
    }
    fill_interval(e.est, var, cov_ok, &e.se, &e.lo, &e.hi, &e.se_ok);
    out.push_back(std::move(e));
  }
  return out;
}

DerivedMeans derived_gf_means(Model model, const Eigen::VectorXd& natural) {
  DerivedMeans d;
  const int dim = static_cast<int>(natural.size());
  d.value.resize(6);
  d.jacobian = Eigen::MatrixXd::Zero(6, dim);
  for (char u : {'m', 'y'}) {
    for (int k = 0; k < 3; ++k) {
      d.names.push_back(std::string("mean_") + u + kGfTag[k]);
    }
  }

  if (model == Model::kModel1) {
    const ParamsModel1 p = unpack_model1(natural);
    const Eigen::Vector3d em = p.alpha_m + p.b_xm * p.mu_x;
    const Eigen::Vector3d ey = p.alpha_y + p.b_xy * p.mu_x + p.b_my * em;
    d.value << em, ey;
    for (int k = 0; k < 3; ++k) {
      // E[m_k] = alpha_m_k + b_xm_k * mu_x
      d.jacobian(k, 4 + k) = 1.0;
      d.jacobian(k, 10 + k) = p.mu_x;
      d.jacobian(k, 0) = p.b_xm[k];
      // E[y_k] = alpha_y_k + b_xy_k mu_x + sum_c B_my(k,c) E[m_c]
      auto& row = d.jacobian;
      row(3 + k, 7 + k) = 1.0;
      row(3 + k, 13 + k) = p.mu_x;
      row(3 + k, 0) = p.b_xy[k];
      for (int c = 0; c <= k; ++c) {
        const double w = p.b_my(k, c);
        row(3 + k, 16 + tri_offset(k, c)) = em[c];
        row(3 + k, 4 + c) += w;
        row(3 + k, 10 + c) += w * p.mu_x;
        row(3 + k, 0) += w * p.b_xm[c];
      }
    }
    return d;
  }
  if (model == Model::kModel2) {
    const ParamsModel2 p = unpack_model2(natural);
    const Eigen::Vector3d em = p.alpha_m + p.b_xm * p.mu_x;
    const Eigen::Vector3d ey = p.alpha_y + p.b_xy * p.mu_x + p.b_my * em;
    d.value << em, ey;
    for (int k = 0; k < 3; ++k) {
      d.jacobian(k, 12 + k) = 1.0;
      for (int c = 0; c <= k; ++c) {
        d.jacobian(k, 18 + tri_offset(k, c)) = p.mu_x[c];
        d.jacobian(k, c) = p.b_xm(k, c);
      }
      auto& row = d.jacobian;
      row(3 + k, 15 + k) = 1.0;
      for (int c = 0; c <= k; ++c) {
        row(3 + k, 24 + tri_offset(k, c)) = p.mu_x[c];
        row(3 + k, c) += p.b_xy(k, c);
      }
      for (int c = 0; c <= k; ++c) {
        const double w = p.b_my(k, c);
        row(3 + k, 30 + tri_offset(k, c)) = em[c];
        row(3 + k, 12 + c) += w;
        for (int j = 0; j <= c; ++j) {
          row(3 + k, 18 + tri_offset(c, j)) += w * p.mu_x[j];
          row(3 + k, j) += w * p.b_xm(c, j);
        }
      }
    }
    return d;
  }
  throw ValidationError("derived growth-factor means need Model 1 or Model 2");
}

std::vector<DerivedEstimate> compute_derived_means(Model model,
                                                   const Eigen::VectorXd& natural,
                                                   const Eigen::MatrixXd& param_cov,
                                                   bool cov_ok) {
  const DerivedMeans d = derived_gf_means(model, natural);
  std::vector<DerivedEstimate> out(d.names.size());
  for (std::size_t i = 0; i < d.names.size(); ++i) {
    out[i].name = d.names[i];
    out[i].est = d.value[static_cast<int>(i)];
    double var = -1.0;
    if (cov_ok) {
      const Eigen::VectorXd g = d.jacobian.row(static_cast<int>(i));
      var = g.dot(param_cov * g);
    }
    fill_interval(out[i].est, var, cov_ok, &out[i].se, &out[i].lo, &out[i].hi,
                  &out[i].se_ok);
  }
  return out;
}

std::vector<ProcessGfMoments> marginal_gf_moments(Model model,
                                                  const Eigen::VectorXd& natural) {
  std::vector<ProcessGfMoments> out;
  if (model == Model::kUnivariate) {
    const ParamsUnivariate p = unpack_univariate(natural);
    out.push_back({'m', p.mu, p.psi});
    return out;
  }
  if (model == Model::kModel1) {
    const JointFactorMoments f = reduced_form_moments(unpack_model1(natural));
    out.push_back({'m', f.mean.segment<3>(1), f.cov.block<3, 3>(1, 1)});
    out.push_back({'y', f.mean.segment<3>(4), f.cov.block<3, 3>(4, 4)});
    return out;
  }
  const JointFactorMoments f = reduced_form_moments(unpack_model2(natural));
  out.push_back({'x', f.mean.segment<3>(0), f.cov.block<3, 3>(0, 0)});
  out.push_back({'m', f.mean.segment<3>(3), f.cov.block<3, 3>(3, 3)});
  out.push_back({'y', f.mean.segment<3>(6), f.cov.block<3, 3>(6, 6)});
  return out;
}

}  // namespace longmed
