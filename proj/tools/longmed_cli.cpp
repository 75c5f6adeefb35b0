// Command-line front end.  All real work happens behind the C API; this
// translation unit only parses flags and maps statuses to exit codes.

#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "longmed/longmed.h"

namespace {

struct SubArgs {
  std::string config;
  int model = 1;
  std::uint64_t seed = 0;
  std::string out;
  bool univariate = false;
  int reps = 0;
  CLI::Option* model_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* out_opt = nullptr;
  CLI::Option* reps_opt = nullptr;
};

void add_common(CLI::App* cmd, SubArgs& a) {
  cmd->add_option("--config", a.config, "JSON config file")->required();
  a.model_opt =
      cmd->add_option("--model", a.model, "model kind")->check(CLI::Range(1, 2));
  a.seed_opt = cmd->add_option("--seed", a.seed, "master RNG seed");
  a.out_opt = cmd->add_option("--out", a.out, "output path");
}

lm_cmd_overrides to_overrides(const SubArgs& a) {
  lm_cmd_overrides ov;
  lm_cmd_overrides_init(&ov);
  ov.has_model = a.model_opt->count() > 0;
  ov.model = a.model;
  ov.has_seed = a.seed_opt->count() > 0;
  ov.seed = a.seed;
  ov.out = a.out_opt->count() > 0 ? a.out.c_str() : nullptr;
  ov.univariate = a.univariate ? 1 : 0;
  ov.has_reps = a.reps_opt && a.reps_opt->count() > 0;
  ov.reps = a.reps;
  return ov;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bilinear-spline growth mediation models: fit, simulate, mc"};
  app.require_subcommand(1);

  SubArgs fit_args, sim_args, mc_args;
  CLI::App* fit_cmd =
      app.add_subcommand("fit", "Fit a mediation model to a dataset");
  add_common(fit_cmd, fit_args);
  fit_cmd->add_flag("--univariate", fit_args.univariate,
                    "Fit each process alone (knot check)");

  CLI::App* sim_cmd =
      app.add_subcommand("simulate", "Generate one synthetic dataset");
  add_common(sim_cmd, sim_args);

  CLI::App* mc_cmd =
      app.add_subcommand("mc", "Run a Monte Carlo condition grid");
  add_common(mc_cmd, mc_args);
  mc_args.reps_opt = mc_cmd->add_option("--reps", mc_args.reps,
                                        "Convergent replications per condition")
                         ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return LM_E_VALIDATION;
  }

  lm_status status = LM_OK;
  if (fit_cmd->parsed()) {
    const lm_cmd_overrides ov = to_overrides(fit_args);
    status = lm_cmd_fit(fit_args.config.c_str(), &ov);
  } else if (sim_cmd->parsed()) {
    const lm_cmd_overrides ov = to_overrides(sim_args);
    status = lm_cmd_simulate(sim_args.config.c_str(), &ov);
  } else if (mc_cmd->parsed()) {
    const lm_cmd_overrides ov = to_overrides(mc_args);
    status = lm_cmd_mc(mc_args.config.c_str(), &ov);
  }

  if (status != LM_OK) {
    std::fprintf(stderr, "error: %s\n", lm_last_error());
  }
  return static_cast<int>(status);
}
