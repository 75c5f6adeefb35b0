#include "commands.hpp"

#include <optional>

#include "dataset.hpp"
#include "fitting.hpp"
#include "mc_driver.hpp"
#include "reporting.hpp"
#include "rng.hpp"
#include "run_config.hpp"
#include "simulate.hpp"

namespace longmed {

namespace {

thread_local std::string g_last_error;

RunConfig load_config(const std::string& config_path, const CmdOverrides& ov) {
  const std::string text = read_text_file(config_path);
  RunConfig cfg = parse_run_config(
      text, ov.has_model ? std::optional<int>(ov.model) : std::nullopt);
  if (ov.has_seed) {
    cfg.has_seed = true;
    cfg.seed = ov.seed;
  }
  if (ov.has_out) cfg.out = ov.out;
  return cfg;
}

void require_seed(bool present) {
  if (!present) {
    throw ValidationError("config: seed required (set \"seed\" or pass --seed)");
  }
}

void require_out(const std::string& out) {
  if (out.empty()) {
    throw ValidationError("config: output path required (set \"out\" or pass --out)");
  }
}

int fit_impl(const std::string& config_path, const CmdOverrides& ov) {
  RunConfig cfg = load_config(config_path, ov);
  if (!cfg.fit) throw ValidationError("config: command 'fit' needs a \"fit\" section");
  require_seed(cfg.has_seed);
  require_out(cfg.out);
  FitConfig fc = *cfg.fit;
  if (ov.univariate) fc.univariate = true;
  const Model model = cfg.model == 1 ? Model::kModel1 : Model::kModel2;

  const Dataset data = read_dataset_csv(fc.data);
  FitOptions opt;
  opt.max_starts = fc.max_starts;
  opt.grad_tol = fc.grad_tol;
  opt.max_iter = fc.max_iter;

  if (fc.univariate) {
    const std::vector<char> procs = model_processes(model);
    std::vector<FitResult> fits;
    fits.reserve(procs.size());
    for (std::size_t i = 0; i < procs.size(); ++i) {
      opt.seed = derive_stream(cfg.seed, i);
      fits.push_back(fit(extract_process(data, procs[i]), Model::kUnivariate, opt));
    }
    write_text_file(cfg.out,
                    univariate_report_json(model, procs, fits, fc.data, cfg.seed));
    write_text_file(csv_path_for(cfg.out), univariate_report_csv(procs, fits));
    for (std::size_t i = 0; i < fits.size(); ++i) {
      if (!fits[i].converged) {
        set_last_error(std::string("process '") + procs[i] +
                       "' did not converge: " + fits[i].message);
        return kExitNoConverge;
      }
    }
    return kExitOk;
  }

  opt.seed = cfg.seed;
  const FitResult res = fit(data, model, opt);
  write_text_file(cfg.out, fit_report_json(res, fc.data, cfg.seed));
  write_text_file(csv_path_for(cfg.out), fit_report_csv(res));
  if (!res.converged) {
    set_last_error("fit did not converge: " + res.message);
    return kExitNoConverge;
  }
  return kExitOk;
}

int simulate_impl(const std::string& config_path, const CmdOverrides& ov) {
  RunConfig cfg = load_config(config_path, ov);
  if (!cfg.simulate) {
    throw ValidationError("config: command 'simulate' needs a \"simulate\" section");
  }
  SimulateConfig sc = *cfg.simulate;
  if (ov.has_out) sc.data_out = ov.out;  // --out names the dataset file
  else if (sc.data_out.empty()) sc.data_out = cfg.out;
  require_out(sc.data_out);
  if (sc.truth_out.empty()) {
    const std::string csv = ".csv";
    if (sc.data_out.size() > csv.size() &&
        sc.data_out.compare(sc.data_out.size() - csv.size(), csv.size(), csv) == 0) {
      sc.truth_out = sc.data_out.substr(0, sc.data_out.size() - csv.size()) +
                     ".truth.json";
    } else {
      sc.truth_out = sc.data_out + ".truth.json";
    }
  }

  ConditionSpec spec = sc.cond;
  if (!sc.cond_has_seed) {
    require_seed(cfg.has_seed);
    spec.seed = cfg.seed;
  }
  spec.validate_spec();

  const TruthBundle truth = build_truth(spec);
  std::mt19937_64 rng = make_rng(spec.seed, 0);
  const Dataset data = generate_dataset(truth, spec.n, spec.J, spec.time_jitter, rng);
  write_dataset_csv(data, sc.data_out);
  write_text_file(sc.truth_out, truth_report_json(spec, truth, spec.seed));
  return kExitOk;
}

int mc_impl(const std::string& config_path, const CmdOverrides& ov) {
  RunConfig cfg = load_config(config_path, ov);
  if (!cfg.mc) throw ValidationError("config: command 'mc' needs an \"mc\" section");
  require_seed(cfg.has_seed);
  require_out(cfg.out);

  std::vector<ConditionSpec> specs = cfg.mc->conditions;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (!cfg.mc->has_seed[i]) specs[i].seed = derive_stream(cfg.seed, i);
    if (ov.has_reps) specs[i].reps = ov.reps;
    specs[i].validate_spec();
    build_truth(specs[i]);  // infeasible conditions rejected before any work
  }

  std::vector<ConditionResult> results;
  results.reserve(specs.size());
  for (const auto& spec : specs) results.push_back(run_condition(spec));

  write_text_file(cfg.out, mc_report_json(results, cfg.seed));
  write_text_file(csv_path_for(cfg.out), mc_report_csv(results));

  for (const auto& r : results) {
    if (r.partial) {
      set_last_error("condition '" + r.label + "' hit the attempt cap with " +
                     std::to_string(r.converged) + "/" +
                     std::to_string(r.spec.reps) + " convergent replications");
      return kExitPartialMc;
    }
  }
  return kExitOk;
}

template <typename Fn>
int run_guarded(Fn&& body) {
  g_last_error.clear();
  try {
    return body();
  } catch (const ValidationError& e) {
    set_last_error(e.what());
    return kExitValidation;
  } catch (const IoError& e) {
    set_last_error(e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    set_last_error(std::string("internal error: ") + e.what());
    return kExitInternal;
  }
}

}  // namespace

int cmd_fit(const std::string& config_path, const CmdOverrides& ov) {
  return run_guarded([&] { return fit_impl(config_path, ov); });
}

int cmd_simulate(const std::string& config_path, const CmdOverrides& ov) {
  return run_guarded([&] { return simulate_impl(config_path, ov); });
}

int cmd_mc(const std::string& config_path, const CmdOverrides& ov) {
  return run_guarded([&] { return mc_impl(config_path, ov); });
}

const std::string& last_error() { return g_last_error; }

void set_last_error(const std::string& msg) { g_last_error = msg; }

}  // namespace longmed
