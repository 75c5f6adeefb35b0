#pragma once

// Monte Carlo condition driver: generate -> fit -> score, repeated until the
// requested number of convergent replications is reached (attempt cap 2x).
// Every attempt index owns a reproducibly derived RNG stream, so results are
// identical across runs and across worker counts.

#include <cstdint>
#include <vector>

#include "metrics.hpp"
#include "simulate.hpp"

namespace longmed {

struct ConditionResult {
  ConditionSpec spec;
  std::string label;
  int attempts = 0;    // datasets generated
  int converged = 0;   // replications that reached a usable optimum
  bool partial = false;  // attempt cap reached before `reps` successes
  double convergence_rate = 0.0;  // converged / attempts
  std::vector<MetricRow> rows;    // params, effects, derived means
};

// Worker count for replication-level parallelism (>= 1).
int mc_worker_count();

ConditionResult run_condition(const ConditionSpec& spec);

}  // namespace longmed
