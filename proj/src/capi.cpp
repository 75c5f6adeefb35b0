#include "longmed/longmed.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <new>

#include "commands.hpp"
#include "dataset.hpp"
#include "effects.hpp"
#include "fitting.hpp"
#include "reporting.hpp"

using longmed::CmdOverrides;
using longmed::Dataset;
using longmed::FitResult;

struct lm_dataset {
  Dataset data;
};

struct lm_fit_result {
  FitResult res;
};

namespace {

lm_status fail(lm_status code, const std::string& msg) {
  longmed::set_last_error(msg);
  return code;
}

// Maps exceptions escaping the C++ core onto status codes.
template <typename Fn>
lm_status guarded(Fn&& body) {
  longmed::set_last_error("");
  try {
    return body();
  } catch (const longmed::ValidationError& e) {
    return fail(LM_E_VALIDATION, e.what());
  } catch (const longmed::IoError& e) {
    return fail(LM_E_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(LM_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(LM_E_INTERNAL, std::string("internal error: ") + e.what());
  }
}

CmdOverrides convert(const lm_cmd_overrides* ov) {
  CmdOverrides out;
  if (!ov) return out;
  out.has_model = ov->has_model != 0;
  out.model = ov->model;
  out.has_seed = ov->has_seed != 0;
  out.seed = ov->seed;
  if (ov->out) {
    out.has_out = true;
    out.out = ov->out;
  }
  out.univariate = ov->univariate != 0;
  out.has_reps = ov->has_reps != 0;
  out.reps = ov->reps;
  return out;
}

lm_status run_command(const char* config_path, const lm_cmd_overrides* ov,
                      int (*cmd)(const std::string&, const CmdOverrides&)) {
  if (!config_path) return fail(LM_E_VALIDATION, "config path is null");
  lm_status code = LM_OK;
  const lm_status wrap = guarded([&] {
    code = static_cast<lm_status>(cmd(config_path, convert(ov)));
    return LM_OK;
  });
  return wrap == LM_OK ? code : wrap;
}

double nan_value() { return std::numeric_limits<double>::quiet_NaN(); }

bool param_index_ok(const lm_fit_result* r, int i) {
  return r && i >= 0 && i < static_cast<int>(r->res.params.size());
}

bool effect_index_ok(const lm_fit_result* r, int i) {
  return r && i >= 0 && i < static_cast<int>(r->res.effects.size());
}

}  // namespace

extern "C" {

lm_status lm_dataset_read_csv(const char* path, lm_dataset** out) {
  if (!path || !out) return fail(LM_E_VALIDATION, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto* d = new lm_dataset{longmed::read_dataset_csv(path)};
    *out = d;
    return LM_OK;
  });
}

int lm_dataset_rows(const lm_dataset* d) { return d ? d->data.n() : 0; }

int lm_dataset_occasions(const lm_dataset* d) { return d ? d->data.J : 0; }

int lm_dataset_model(const lm_dataset* d) {
  if (!d) return 0;
  return d->data.model == longmed::Model::kModel1 ? LM_MODEL_1 : LM_MODEL_2;
}

void lm_dataset_free(lm_dataset* d) { delete d; }

void lm_fit_options_init(lm_fit_options* opt) {
  if (!opt) return;
  opt->max_starts = 10;
  opt->grad_tol = 1e-5;
  opt->max_iter = 500;
  opt->seed = 1;
}

lm_status lm_fit(const lm_dataset* data, int model, const lm_fit_options* opt,
                 lm_fit_result** out) {
  if (!data || !out) return fail(LM_E_VALIDATION, "null argument");
  *out = nullptr;
  if (model != LM_MODEL_1 && model != LM_MODEL_2) {
    return fail(LM_E_VALIDATION, "model must be 1 or 2");
  }
  return guarded([&]() -> lm_status {
    longmed::FitOptions o;
    if (opt) {
      o.max_starts = opt->max_starts;
      o.grad_tol = opt->grad_tol;
      o.max_iter = opt->max_iter;
      o.seed = opt->seed;
    }
    auto* r = new lm_fit_result{longmed::fit(
        data->data,
        model == LM_MODEL_1 ? longmed::Model::kModel1 : longmed::Model::kModel2,
        o)};
    *out = r;
    if (!r->res.converged) {
      return fail(LM_E_NO_CONVERGE, "fit did not converge: " + r->res.message);
    }
    return LM_OK;
  });
}

int lm_fit_converged(const lm_fit_result* r) {
  return r && r->res.converged ? 1 : 0;
}

double lm_fit_loglik(const lm_fit_result* r) {
  return r ? r->res.loglik : nan_value();
}

int lm_fit_param_count(const lm_fit_result* r) {
  return r ? static_cast<int>(r->res.params.size()) : 0;
}

const char* lm_fit_param_name(const lm_fit_result* r, int i) {
  return param_index_ok(r, i) ? r->res.params[i].name.c_str() : nullptr;
}

double lm_fit_param_est(const lm_fit_result* r, int i) {
  return param_index_ok(r, i) ? r->res.params[i].est : nan_value();
}

double lm_fit_param_se(const lm_fit_result* r, int i) {
  if (!param_index_ok(r, i) || !r->res.params[i].se_ok) return nan_value();
  return r->res.params[i].se;
}

int lm_fit_effect_count(const lm_fit_result* r) {
  return r ? static_cast<int>(r->res.effects.size()) : 0;
}

const char* lm_fit_effect_label(const lm_fit_result* r, int i) {
  return effect_index_ok(r, i) ? r->res.effects[i].label.c_str() : nullptr;
}

const char* lm_fit_effect_kind(const lm_fit_result* r, int i) {
  return effect_index_ok(r, i) ? longmed::effect_kind_name(r->res.effects[i].kind)
                               : nullptr;
}

double lm_fit_effect_est(const lm_fit_result* r, int i) {
  return effect_index_ok(r, i) ? r->res.effects[i].est : nan_value();
}

double lm_fit_effect_se(const lm_fit_result* r, int i) {
  if (!effect_index_ok(r, i) || !r->res.effects[i].se_ok) return nan_value();
  return r->res.effects[i].se;
}

char* lm_fit_report_json(const lm_fit_result* r, const char* data_path,
                         uint64_t seed) {
  if (!r) return nullptr;
  try {
    const std::string json =
        longmed::fit_report_json(r->res, data_path ? data_path : "", seed);
    char* buf = static_cast<char*>(std::malloc(json.size() + 1));
    if (!buf) return nullptr;
    std::memcpy(buf, json.c_str(), json.size() + 1);
    return buf;
  } catch (...) {
    return nullptr;
  }
}

void lm_fit_result_free(lm_fit_result* r) { delete r; }

void lm_cmd_overrides_init(lm_cmd_overrides* ov) {
  if (!ov) return;
  ov->has_model = 0;
  ov->model = 1;
  ov->has_seed = 0;
  ov->seed = 0;
  ov->out = nullptr;
  ov->univariate = 0;
  ov->has_reps = 0;
  ov->reps = 0;
}

lm_status lm_cmd_fit(const char* config_path, const lm_cmd_overrides* ov) {
  return run_command(config_path, ov, longmed::cmd_fit);
}

lm_status lm_cmd_simulate(const char* config_path, const lm_cmd_overrides* ov) {
  return run_command(config_path, ov, longmed::cmd_simulate);
}

lm_status lm_cmd_mc(const char* config_path, const lm_cmd_overrides* ov) {
  return run_command(config_path, ov, longmed::cmd_mc);
}

const char* lm_last_error(void) { return longmed::last_error().c_str(); }

void lm_string_free(char* s) { std::free(s); }

}  // extern "C"
