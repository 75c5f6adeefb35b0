#pragma once

// JSON run configuration: schema-validated, unknown keys rejected.  One file
// may carry sections for several commands; each command reads its own.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "simulate.hpp"

namespace longmed {

struct FitConfig {
  std::string data;        // dataset csv (required)
  bool univariate = false;
  int max_starts = 10;
  double grad_tol = 1e-5;
  int max_iter = 500;
};

struct SimulateConfig {
  ConditionSpec cond;        // reps/max_starts unused here
  bool cond_has_seed = false;  // condition carried its own seed
  std::string data_out;      // required (or via --out)
  std::string truth_out;     // default derived from data_out
};

struct McConfig {
  std::vector<ConditionSpec> conditions;  // non-empty
  std::vector<bool> has_seed;             // per condition: explicit seed given
};

struct RunConfig {
  int model = 1;  // 1 or 2
  bool has_seed = false;
  std::uint64_t seed = 0;
  std::string out;
  std::optional<FitConfig> fit;
  std::optional<SimulateConfig> simulate;
  std::optional<McConfig> mc;
};

// Throws ValidationError on schema violations (unknown keys, wrong types,
// out-of-range values).  model_override replaces the top-level model before
// sections are parsed (a --model flag behaves as if the config said so).
RunConfig parse_run_config(const std::string& json_text,
                           std::optional<int> model_override = {});

}  // namespace longmed
