#include "run_config.hpp"

#include <json.hpp>

#include <set>

namespace longmed {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ValidationError("config: unknown key '" + it.key() + "' in " + where);
    }
  }
}

double get_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ValidationError("config: " + where + " must be a number");
  return v.get<double>();
}

int get_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) {
    throw ValidationError("config: " + where + " must be an integer");
  }
  return v.get<int>();
}

std::string get_string(const json& v, const std::string& where) {
  if (!v.is_string()) throw ValidationError("config: " + where + " must be a string");
  return v.get<std::string>();
}

bool get_bool(const json& v, const std::string& where) {
  if (!v.is_boolean()) throw ValidationError("config: " + where + " must be a boolean");
  return v.get<bool>();
}

std::uint64_t get_seed(const json& v, const std::string& where) {
  if (!v.is_number_unsigned() && !v.is_number_integer()) {
    throw ValidationError("config: " + where + " must be a non-negative integer");
  }
  if (v.is_number_integer() && v.get<long long>() < 0) {
    throw ValidationError("config: " + where + " must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

Model model_from_int(int m, const std::string& where) {
  if (m == 1) return Model::kModel1;
  if (m == 2) return Model::kModel2;
  throw ValidationError("config: " + where + " must be 1 or 2");
}

// shared by simulate.cond and mc.conditions[i]
ConditionSpec parse_condition(const json& c, const std::string& where,
                              int default_model, bool* explicit_seed) {
  if (!c.is_object()) throw ValidationError("config: " + where + " must be an object");
  check_keys(c,
             {"model", "n", "J", "knots", "theta", "residual_corr", "scenario",
              "shape", "time_jitter", "reps", "max_starts", "seed", "label"},
             where);
  ConditionSpec spec;
  spec.model = model_from_int(
      c.contains("model") ? get_int(c["model"], where + ".model") : default_model,
      where + ".model");
  if (!c.contains("n") || !c.contains("J")) {
    throw ValidationError("config: " + where + " needs 'n' and 'J'");
  }
  spec.n = get_int(c["n"], where + ".n");
  spec.J = get_int(c["J"], where + ".J");
  if (!c.contains("knots")) throw ValidationError("config: " + where + " needs 'knots'");
  const json& k = c["knots"];
  if (!k.is_object()) throw ValidationError("config: " + where + ".knots must be an object");
  check_keys(k, {"x", "m", "y"}, where + ".knots");
  if (!k.contains("m") || !k.contains("y")) {
    throw ValidationError("config: " + where + ".knots needs 'm' and 'y'");
  }
  spec.knot_m = get_number(k["m"], where + ".knots.m");
  spec.knot_y = get_number(k["y"], where + ".knots.y");
  if (spec.model == Model::kModel2) {
    if (!k.contains("x")) {
      throw ValidationError("config: " + where + ".knots needs 'x' for model 2");
    }
    spec.knot_x = get_number(k["x"], where + ".knots.x");
  } else if (k.contains("x")) {
    throw ValidationError("config: " + where + ".knots.x applies to model 2 only");
  }
  if (c.contains("theta")) spec.theta = get_number(c["theta"], where + ".theta");
  if (c.contains("residual_corr")) {
    spec.residual_corr = get_number(c["residual_corr"], where + ".residual_corr");
  }
  if (c.contains("scenario")) {
    spec.scenario = scenario_from_string(get_string(c["scenario"], where + ".scenario"));
  }
  if (c.contains("shape")) {
    spec.shape = shape_from_string(get_string(c["shape"], where + ".shape"));
  }
  if (c.contains("time_jitter")) {
    spec.time_jitter = get_number(c["time_jitter"], where + ".time_jitter");
  }
  if (c.contains("reps")) spec.reps = get_int(c["reps"], where + ".reps");
  if (c.contains("max_starts")) {
    spec.max_starts = get_int(c["max_starts"], where + ".max_starts");
  }
  if (explicit_seed) *explicit_seed = c.contains("seed");
  if (c.contains("seed")) spec.seed = get_seed(c["seed"], where + ".seed");
  if (c.contains("label")) spec.label = get_string(c["label"], where + ".label");
  try {
    spec.validate_spec();
  } catch (const ValidationError& e) {
    throw ValidationError("config: " + where + ": " + e.what());
  }
  return spec;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text,
                           std::optional<int> model_override) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ValidationError("config: top level must be an object");
  check_keys(root, {"model", "seed", "out", "fit", "simulate", "mc"}, "top level");

  RunConfig cfg;
  if (root.contains("model")) {
    cfg.model = get_int(root["model"], "model");
    model_from_int(cfg.model, "model");
  }
  if (model_override) {
    cfg.model = *model_override;
    model_from_int(cfg.model, "--model");
  }
  if (root.contains("seed")) {
    cfg.has_seed = true;
    cfg.seed = get_seed(root["seed"], "seed");
  }
  if (root.contains("out")) cfg.out = get_string(root["out"], "out");

  if (root.contains("fit")) {
    const json& f = root["fit"];
    if (!f.is_object()) throw ValidationError("config: fit must be an object");
    check_keys(f, {"data", "univariate", "max_starts", "grad_tol", "max_iter"}, "fit");
    FitConfig fc;
    if (!f.contains("data")) throw ValidationError("config: fit needs 'data'");
    fc.data = get_string(f["data"], "fit.data");
    if (f.contains("univariate")) fc.univariate = get_bool(f["univariate"], "fit.univariate");
    if (f.contains("max_starts")) fc.max_starts = get_int(f["max_starts"], "fit.max_starts");
    if (f.contains("grad_tol")) fc.grad_tol = get_number(f["grad_tol"], "fit.grad_tol");
    if (f.contains("max_iter")) fc.max_iter = get_int(f["max_iter"], "fit.max_iter");
    if (fc.max_starts < 1) throw ValidationError("config: fit.max_starts must be >= 1");
    if (!(fc.grad_tol > 0)) throw ValidationError("config: fit.grad_tol must be positive");
    if (fc.max_iter < 1) throw ValidationError("config: fit.max_iter must be >= 1");
    cfg.fit = fc;
  }

  if (root.contains("simulate")) {
    const json& s = root["simulate"];
    if (!s.is_object()) throw ValidationError("config: simulate must be an object");
    check_keys(s, {"condition", "data_out", "truth_out"}, "simulate");
    if (!s.contains("condition")) {
      throw ValidationError("config: simulate needs 'condition'");
    }
    SimulateConfig sc;
    bool cond_seed = false;
    sc.cond = parse_condition(s["condition"], "simulate.condition", cfg.model, &cond_seed);
    sc.cond_has_seed = cond_seed;
    if (s.contains("data_out")) sc.data_out = get_string(s["data_out"], "simulate.data_out");
    if (s.contains("truth_out")) sc.truth_out = get_string(s["truth_out"], "simulate.truth_out");
    cfg.simulate = sc;
  }

  if (root.contains("mc")) {
    const json& m = root["mc"];
    if (!m.is_object()) throw ValidationError("config: mc must be an object");
    check_keys(m, {"conditions"}, "mc");
    if (!m.contains("conditions") || !m["conditions"].is_array() ||
        m["conditions"].empty()) {
      throw ValidationError("config: mc needs a non-empty 'conditions' array");
    }
    McConfig mc;
    int idx = 0;
    for (const auto& c : m["conditions"]) {
      bool has_seed = false;
      mc.conditions.push_back(parse_condition(
          c, "mc.conditions[" + std::to_string(idx) + "]", cfg.model, &has_seed));
      mc.has_seed.push_back(has_seed);
      ++idx;
    }
    cfg.mc = mc;
  }
  return cfg;
}

}  // namespace longmed
