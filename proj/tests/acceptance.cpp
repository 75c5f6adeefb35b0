// Acceptance gate: one line per criterion, tolerances pinned in code.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "effects.hpp"
#include "helpers.hpp"
#include "likelihood.hpp"
#include "mc_driver.hpp"
#include "param_space.hpp"
#include "simulate.hpp"

using namespace longmed;
using namespace testutil;

namespace {

int g_failures = 0;

void report(int idx, bool pass, const std::string& what, const std::string& detail) {
  std::printf("criterion %d: %s  %s (%s)\n", idx, pass ? "PASS" : "FAIL",
              what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

const MetricRow& find_row(const ConditionResult& res, const std::string& group,
                          const std::string& name) {
  for (const auto& r : res.rows) {
    if (r.group == group && r.name == name) return r;
  }
  throw std::runtime_error("missing metric row " + group + "/" + name);
}

// ---- criteria 1-3 share one replication study ------------------------------

ConditionResult primary_cell() {
  ConditionSpec spec;
  spec.model = Model::kModel1;
  spec.n = 500;
  spec.J = 10;
  spec.knot_m = 4.5;
  spec.knot_y = 4.5;
  spec.theta = 1.0;
  spec.scenario = Scenario::kMedium;
  spec.shape = Shape::kDeceleration;
  spec.reps = 200;
  spec.max_starts = 10;
  spec.seed = 20260814;
  std::printf("running the primary cell (n=500, J=10, S=200)...\n");
  std::fflush(stdout);
  return run_condition(spec);
}

void criteria_1_2_3(const ConditionResult& cell) {
  const char* means[6] = {"mean_m1", "mean_mg", "mean_m2",
                          "mean_y1", "mean_yg", "mean_y2"};

  // 1: relative bias of the marginal growth-factor means under 1%
  {
    double worst = 0.0;
    std::string worst_name = "-";
    for (const char* name : means) {
      const MetricRow& row = find_row(cell, "derived", name);
      if (std::abs(row.bias) > worst) {
        worst = std::abs(row.bias);
        worst_name = name;
      }
    }
    report(1, !cell.partial && worst < 0.01,
           "growth-factor mean |relative bias| < 0.01",
           "worst " + worst_name + " = " + fmt(worst));
  }

  // 2: relative RMSE of the two knots under 5%
  {
    const MetricRow& gm = find_row(cell, "param", "gamma_m");
    const MetricRow& gy = find_row(cell, "param", "gamma_y");
    const double worst = std::max(gm.rmse, gy.rmse);
    report(2, !cell.partial && worst < 0.05, "knot relative RMSE < 0.05",
           "gamma_m = " + fmt(gm.rmse) + ", gamma_y = " + fmt(gy.rmse));
  }

  // 3: coverage \in [0.90, 0.98] for means and knots; >= 0.93 for the
  // mediated paths
  {
    bool ok = !cell.partial;
    double lo_seen = 1.0, hi_seen = 0.0;
    auto span = [&](const MetricRow& row) {
      lo_seen = std::min(lo_seen, row.coverage);
      hi_seen = std::max(hi_seen, row.coverage);
      ok = ok && row.coverage >= 0.90 && row.coverage <= 0.98;
    };
    for (const char* name : means) span(find_row(cell, "derived", name));
    span(find_row(cell, "param", "gamma_m"));
    span(find_row(cell, "param", "gamma_y"));
    double ind_lo = 1.0;
    for (const auto& def : effect_catalog(Model::kModel1)) {
      if (def.kind != EffectKind::kIndirect) continue;
      const MetricRow& row = find_row(cell, "effect", def.label);
      ind_lo = std::min(ind_lo, row.coverage);
      ok = ok && row.coverage >= 0.93;
    }
    report(3, ok,
           "coverage: means/knots in [0.90, 0.98], mediated paths >= 0.93",
           "means/knots span [" + fmt(lo_seen) + ", " + fmt(hi_seen) +
               "], mediated min " + fmt(ind_lo));
  }
}

// ---- criterion 4: reference coefficient arithmetic -------------------------

void criterion_4() {
  const auto& cat1 = effect_catalog(Model::kModel1);
  auto find_def = [](const std::vector<EffectDef>& cat, const std::string& label)
      -> const EffectDef& {
    for (const auto& d : cat) {
      if (d.label == label) return d;
    }
    throw std::runtime_error("no catalog entry " + label);
  };

  Eigen::VectorXd v = Eigen::VectorXd::Zero(param_dim(Model::kModel1));
  v.segment<3>(10) << 0.127, 5.897, -0.047;
  v.segment<3>(13) << 0.024, 2.277, -0.017;
  v.segment<6>(16) << 0.445, 2.871, 0.015, 0.688, 0.003, 0.676;
  const double total1 = effect_value(find_def(cat1, "x->yg total"), v);

  const auto& cat2 = effect_catalog(Model::kModel2);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(param_dim(Model::kModel2));
  w.segment<6>(18) << 0.472, 4.569, -0.020, 0.695, 0.003, 0.775;
  w.segment<6>(24) << 0.210, 9.455, -0.314, 0.030, 0.010, 0.813;
  w.segment<6>(30) << 0.274, -8.667, -0.049, 0.434, 0.004, 0.454;
  const double ind2 = effect_value(find_def(cat2, "x1->m1->y1"), w);
  const double total2 = effect_value(find_def(cat2, "x1->y1 total"), w);

  const bool ok = std::abs(total1 - 6.698) < 1e-3 &&
                  std::abs(ind2 - 0.129) < 1e-3 &&
                  std::abs(total2 - 0.339) < 1e-3;
  report(4, ok, "reference coefficient sets reproduce the rounded totals to 1e-3",
         "totals " + fmt(total1) + " / " + fmt(total2) + ", mediated " + fmt(ind2));
}

// ---- criterion 5: dense-normal likelihood oracle ----------------------------

void criterion_5() {
  auto g = rng(5050);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const int n = 1 + static_cast<int>(g() % 5);
    double lib = 0.0, ora = 0.0;
    if (k % 3 == 0) {
      const ParamsModel1 p = random_params_m1(g);
      const Dataset d = random_dataset(Model::kModel1, n, 6, g);
      lib = LoglikEvaluator(d).sum_loglik(p);
      ora = 0.0;
      for (const auto& r : d.rows) {
        Eigen::VectorXd z(1 + 2 * d.J);
        z << r.x, r.m_v, r.y_v;
        ora += dense_mvn_loglik(z, assemble_implied(p, sched_m1(r.m_t, r.y_t)));
      }
    } else if (k % 3 == 1) {
      const ParamsModel2 p = random_params_m2(g);
      const Dataset d = random_dataset(Model::kModel2, n, 6, g);
      lib = LoglikEvaluator(d).sum_loglik(p);
      ora = 0.0;
      for (const auto& r : d.rows) {
        Eigen::VectorXd z(3 * d.J);
        z << r.x_v, r.m_v, r.y_v;
        ora += dense_mvn_loglik(z, assemble_implied(p, sched_m2(r.x_t, r.m_t, r.y_t)));
      }
    } else {
      const ParamsUnivariate p = random_params_uv(g);
      const Dataset d = random_dataset(Model::kUnivariate, n, 6, g);
      lib = LoglikEvaluator(d).sum_loglik(p);
      ora = 0.0;
      for (const auto& r : d.rows) {
        ImpliedMoments im;
        const Eigen::MatrixXd lam = bilinear_loadings(r.m_t, p.knot);
        im.mean = lam * p.mu;
        im.cov = lam * p.psi * lam.transpose();
        im.cov.diagonal().array() += p.theta;
        ora += dense_mvn_loglik(r.m_v, im);
      }
    }
    worst = std::max(worst, std::abs(lib - ora));
  }
  report(5, worst < 1e-8,
         "likelihood matches the dense-normal oracle on 50 instances",
         "max deviation " + fmt(worst));
}

// ---- criterion 6: sampled moments vs the reduced form ----------------------

void criterion_6() {
  const auto t0 = std::chrono::steady_clock::now();
  const int kDraws = 1000000;
  bool ok = true;
  double worst_sigma = 0.0;

  auto run_check = [&](Model model) {
    ConditionSpec spec;
    spec.model = model;
    const TruthBundle truth = build_truth(spec);
    auto g = rng(model == Model::kModel1 ? 6061 : 6062);
    std::normal_distribution<double> z(0.0, 1.0);

    const int d = model == Model::kModel1 ? 7 : 9;
    JointFactorMoments implied;
    Eigen::MatrixXd chol_m, chol_y, chol_x;
    if (model == Model::kModel1) {
      implied = reduced_form_moments(truth.m1);
      chol_m = Eigen::LLT<Eigen::Matrix3d>(truth.m1.psi_m).matrixL();
      chol_y = Eigen::LLT<Eigen::Matrix3d>(truth.m1.psi_y).matrixL();
    } else {
      implied = reduced_form_moments(truth.m2);
      chol_x = Eigen::LLT<Eigen::Matrix3d>(truth.m2.psi_x).matrixL();
      chol_m = Eigen::LLT<Eigen::Matrix3d>(truth.m2.psi_m).matrixL();
      chol_y = Eigen::LLT<Eigen::Matrix3d>(truth.m2.psi_y).matrixL();
    }

    Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);
    Eigen::MatrixXd sumsq = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd eta(d);
    Eigen::Vector3d e;
    for (int s = 0; s < kDraws; ++s) {
      // sequential structural sampling, no reduced form involved
      if (model == Model::kModel1) {
        const ParamsModel1& p = truth.m1;
        const double x = p.mu_x + std::sqrt(p.phi_x) * z(g);
        e << z(g), z(g), z(g);
        const Eigen::Vector3d em = p.alpha_m + p.b_xm * x + chol_m * e;
        e << z(g), z(g), z(g);
        const Eigen::Vector3d ey =
            p.alpha_y + p.b_xy * x + p.b_my * em + chol_y * e;
        eta << x, em, ey;
      } else {
        const ParamsModel2& p = truth.m2;
        e << z(g), z(g), z(g);
        const Eigen::Vector3d ex = p.mu_x + chol_x * e;
        e << z(g), z(g), z(g);
        const Eigen::Vector3d em = p.alpha_m + p.b_xm * ex + chol_m * e;
        e << z(g), z(g), z(g);
        const Eigen::Vector3d ey =
            p.alpha_y + p.b_xy * ex + p.b_my * em + chol_y * e;
        eta << ex, em, ey;
      }
      sum += eta;
      sumsq += eta * eta.transpose();
    }
    const Eigen::VectorXd mean = sum / kDraws;
    const Eigen::MatrixXd cov =
        (sumsq - double(kDraws) * mean * mean.transpose()) / double(kDraws - 1);

    for (int i = 0; i < d; ++i) {
      const double se = std::sqrt(implied.cov(i, i) / kDraws);
      worst_sigma = std::max(worst_sigma, std::abs(mean[i] - implied.mean[i]) / se);
      ok = ok && std::abs(mean[i] - implied.mean[i]) < 3.0 * se;
      for (int j = 0; j <= i; ++j) {
        const double sec = std::sqrt((implied.cov(i, i) * implied.cov(j, j) +
                                      implied.cov(i, j) * implied.cov(i, j)) /
                                     kDraws);
        worst_sigma =
            std::max(worst_sigma, std::abs(cov(i, j) - implied.cov(i, j)) / sec);
        ok = ok && std::abs(cov(i, j) - implied.cov(i, j)) < 3.0 * sec;
      }
    }
  };
  run_check(Model::kModel1);
  run_check(Model::kModel2);

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ok = ok && secs < 60.0;
  report(6, ok, "reduced-form moments match 1e6 structural draws within 3 MC SEs",
         "worst deviation " + fmt(worst_sigma) + " SEs in " + fmt(secs) + " s");
}

// ---- criterion 7: delta-method machinery ------------------------------------

void criterion_7() {
  auto g = rng(7070);
  double worst_sobel = 0.0, worst_grad = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const Model model = rep % 2 == 0 ? Model::kModel1 : Model::kModel2;
    const int dim = param_dim(model);
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = random_in(g, -2.0, 2.0);
    Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(
        dim, dim, [&] { return random_in(g, -0.1, 0.1); });
    Eigen::MatrixXd cov = a * a.transpose();
    cov.diagonal().array() += 0.05;

    const auto ests = compute_effects(model, v, cov, true);
    const auto& defs = effect_catalog(model);
    for (std::size_t i = 0; i < defs.size(); ++i) {
      if (defs[i].kind != EffectKind::kIndirect) continue;
      const auto [ia, ib] = defs[i].products[0];
      const double sobel =
          std::sqrt(v[ib] * v[ib] * cov(ia, ia) + v[ia] * v[ia] * cov(ib, ib) +
                    2.0 * v[ia] * v[ib] * cov(ia, ib));
      worst_sobel = std::max(worst_sobel, std::abs(ests[i].se - sobel));
    }

    if (rep < 20) {  // finite-difference gradient sweep
      const double h = 1e-5;
      for (const auto& def : defs) {
        const Eigen::VectorXd ana = effect_gradient(def, v);
        for (int j = 0; j < dim; ++j) {
          Eigen::VectorXd p = v, q = v;
          p[j] += h;
          q[j] -= h;
          const double num = (effect_value(def, p) - effect_value(def, q)) / (2 * h);
          worst_grad = std::max(worst_grad, std::abs(ana[j] - num));
        }
      }
      const DerivedMeans dm = derived_gf_means(model, v);
      for (int j = 0; j < dim; ++j) {
        Eigen::VectorXd p = v, q = v;
        p[j] += h;
        q[j] -= h;
        const Eigen::VectorXd num =
            (derived_gf_means(model, p).value - derived_gf_means(model, q).value) /
            (2 * h);
        worst_grad = std::max(
            worst_grad, (dm.jacobian.col(j) - num).lpNorm<Eigen::Infinity>());
      }
    }
  }
  report(7, worst_sobel < 1e-12 && worst_grad < 1e-6,
         "product SEs match the closed form; analytic gradients match FD",
         "sobel " + fmt(worst_sobel) + ", grad " + fmt(worst_grad));
}

// ---- criterion 8: convergence under a noisy cell ----------------------------

void criterion_8() {
  ConditionSpec spec;
  spec.model = Model::kModel1;
  spec.n = 200;
  spec.J = 6;
  spec.knot_m = 2.5;
  spec.knot_y = 2.5;
  spec.theta = 2.0;
  spec.scenario = Scenario::kMedium;
  spec.reps = 200;
  spec.max_starts = 10;
  spec.seed = 80808;
  std::printf("running the noisy cell (n=200, J=6, theta=2, S=200)...\n");
  std::fflush(stdout);
  const ConditionResult res = run_condition(spec);
  report(8, !res.partial && res.convergence_rate >= 0.95,
         ">= 95% of replications converge within the 10-start budget",
         "rate " + fmt(res.convergence_rate) + " over " +
             std::to_string(res.attempts) + " attempts");
}

// ---- criterion 9: byte-identical reruns -------------------------------------

void criterion_9() {
  const std::string cfg = "/tmp/longmed_accept_mc.json";
  {
    std::ofstream out(cfg);
    out << R"({
  "model": 1, "seed": 4711, "out": "/tmp/longmed_accept_rep_A.json",
  "mc": {"conditions": [
    {"n": 60, "J": 6, "knots": {"m": 2.5, "y": 3.0}, "reps": 3},
    {"n": 80, "J": 6, "knots": {"m": 2.0, "y": 2.0}, "theta": 2.0, "reps": 3}
  ]}
})";
  }
  auto run_to = [&](const std::string& out_path) {
    const std::string cmd = std::string(LM_CLI_PATH) + " mc --config " + cfg +
                            " --out " + out_path + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  };
  auto slurp = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };
  const int rc_a = run_to("/tmp/longmed_accept_rep_A.json");
  const int rc_b = run_to("/tmp/longmed_accept_rep_B.json");
  const std::string a = slurp("/tmp/longmed_accept_rep_A.json");
  const std::string b = slurp("/tmp/longmed_accept_rep_B.json");
  const std::string ac = slurp("/tmp/longmed_accept_rep_A.csv");
  const std::string bc = slurp("/tmp/longmed_accept_rep_B.csv");
  const bool ok = rc_a == 0 && rc_b == 0 && !a.empty() && a == b &&
                  !ac.empty() && ac == bc;
  report(9, ok, "identical config and seed give byte-identical reports",
         "exit " + std::to_string(rc_a) + "/" + std::to_string(rc_b) + ", " +
             std::to_string(a.size()) + " bytes each");
}

}  // namespace

int main() {
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_9();
  const ConditionResult cell = primary_cell();
  criteria_1_2_3(cell);
  criterion_8();
  std::printf("acceptance: %d/9 criteria passed\n", 9 - g_failures);
  return g_failures;
}
