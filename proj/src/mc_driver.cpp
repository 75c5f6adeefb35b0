#include "mc_driver.hpp"

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "effects.hpp"
#include "fitting.hpp"
#include "param_space.hpp"
#include "rng.hpp"

namespace longmed {

namespace {

struct RepOutcome {
  bool done = false;
  bool ok = false;
  Eigen::VectorXd est, lo, hi;           // free parameters
  Eigen::VectorXd eff_est, eff_lo, eff_hi;
  Eigen::VectorXd der_est, der_lo, der_hi;
};

}  // namespace

int mc_worker_count() {
  const char* env = std::getenv("LONGMED_WORKERS");
  if (!env || !*env) return 1;
  const long w = std::strtol(env, nullptr, 10);
  if (w < 1) return 1;
  return static_cast<int>(std::min<long>(w, 64));
}

ConditionResult run_condition(const ConditionSpec& spec) {
  spec.validate_spec();
  const TruthBundle truth = build_truth(spec);
  const auto& catalog = effect_catalog(spec.model);
  Eigen::VectorXd truth_eff(catalog.size());
  for (std::size_t k = 0; k < catalog.size(); ++k) {
    truth_eff[static_cast<int>(k)] = effect_value(catalog[k], truth.packed);
  }
  const DerivedMeans truth_der = derived_gf_means(spec.model, truth.packed);
  const std::vector<std::string> names = param_names(spec.model);

  const int cap = 2 * spec.reps;
  std::vector<RepOutcome> results(cap);
  std::atomic<int> next{0};
  std::mutex mu;
  int contiguous = 0;
  int succ_in_prefix = 0;
  bool decided = false;

  auto run_one = [&](int idx) {
    RepOutcome out;
    try {
      std::mt19937_64 rng = make_rng(spec.seed, static_cast<std::uint64_t>(idx));
      const Dataset data =
          generate_dataset(truth, spec.n, spec.J, spec.time_jitter, rng);
      FitOptions fo;
      fo.max_starts = spec.max_starts;
      fo.seed = derive_stream(spec.seed, 0x7e57000000000000ULL + idx);
      const FitResult fr = fit(data, spec.model, fo);
      out.ok = fr.converged && fr.cov_ok;
      if (out.ok) {
        const int p = static_cast<int>(fr.params.size());
        out.est.resize(p); out.lo.resize(p); out.hi.resize(p);
        for (int i = 0; i < p; ++i) {
          out.est[i] = fr.params[i].est;
          out.lo[i] = fr.params[i].lo;
          out.hi[i] = fr.params[i].hi;
        }
        const int e = static_cast<int>(fr.effects.size());
        out.eff_est.resize(e); out.eff_lo.resize(e); out.eff_hi.resize(e);
        for (int i = 0; i < e; ++i) {
          out.eff_est[i] = fr.effects[i].est;
          out.eff_lo[i] = fr.effects[i].lo;
          out.eff_hi[i] = fr.effects[i].hi;
        }
        const int d = static_cast<int>(fr.derived_means.size());
        out.der_est.resize(d); out.der_lo.resize(d); out.der_hi.resize(d);
        for (int i = 0; i < d; ++i) {
          out.der_est[i] = fr.derived_means[i].est;
          out.der_lo[i] = fr.derived_means[i].lo;
          out.der_hi[i] = fr.derived_means[i].hi;
        }
      }
    } catch (const std::exception&) {
      out.ok = false;
    }
    return out;
  };

  auto worker = [&]() {
    for (;;) {
      {
        std::lock_guard<std::mutex> lock(mu);
        if (decided) return;
      }
      const int idx = next.fetch_add(1);
      if (idx >= cap) return;
      RepOutcome out = run_one(idx);
      std::lock_guard<std::mutex> lock(mu);
      results[idx] = std::move(out);
      results[idx].done = true;
      while (contiguous < cap && results[contiguous].done && !decided) {
        if (results[contiguous].ok) ++succ_in_prefix;
        ++contiguous;
        if (succ_in_prefix >= spec.reps) decided = true;
      }
    }
  };

  const int workers = std::min(mc_worker_count(), cap);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // sequential-equivalent selection: the first `reps` successful attempt
  // indices, attempts = position of the last one used
  ConditionResult res;
  res.spec = spec;
  res.label = spec.make_label();
  std::vector<int> selected;
  int attempts = 0;
  for (int i = 0; i < cap && static_cast<int>(selected.size()) < spec.reps; ++i) {
    if (!results[i].done) break;
    attempts = i + 1;
    if (results[i].ok) selected.push_back(i);
  }
  res.attempts = attempts;
  res.converged = static_cast<int>(selected.size());
  res.partial = res.converged < spec.reps;
  res.convergence_rate =
      attempts > 0 ? static_cast<double>(res.converged) / attempts : 0.0;

  if (res.converged >= 2) {
    const int s = res.converged;
    std::vector<double> est(s), lo(s), hi(s);
    auto collect = [&](auto member_est, auto member_lo, auto member_hi, int col) {
      for (int r = 0; r < s; ++r) {
        const RepOutcome& o = results[selected[r]];
        est[r] = (o.*member_est)[col];
        lo[r] = (o.*member_lo)[col];
        hi[r] = (o.*member_hi)[col];
      }
    };
    for (int i = 0; i < static_cast<int>(names.size()); ++i) {
      collect(&RepOutcome::est, &RepOutcome::lo, &RepOutcome::hi, i);
      res.rows.push_back(
          performance_metrics(names[i], "param", est, lo, hi, truth.packed[i]));
    }
    for (int i = 0; i < static_cast<int>(catalog.size()); ++i) {
      collect(&RepOutcome::eff_est, &RepOutcome::eff_lo, &RepOutcome::eff_hi, i);
      res.rows.push_back(
          performance_metrics(catalog[i].label, "effect", est, lo, hi, truth_eff[i]));
    }
    for (int i = 0; i < static_cast<int>(truth_der.names.size()); ++i) {
      collect(&RepOutcome::der_est, &RepOutcome::der_lo, &RepOutcome::der_hi, i);
      res.rows.push_back(performance_metrics(truth_der.names[i], "derived", est,
                                             lo, hi, truth_der.value[i]));
    }
  }
  return res;
}

}  // namespace longmed
