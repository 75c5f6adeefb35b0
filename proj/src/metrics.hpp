#pragma once

// Per-quantity Monte Carlo performance measures: relative bias, empirical
// SE, relative RMSE, coverage probability, and the Monte Carlo SE of the
// bias.  Quantities whose generating value is zero report absolute bias and
// RMSE instead (flagged), since the relative forms divide by the truth.

#include <string>
#include <vector>

namespace longmed {

struct MetricRow {
  std::string name;
  std::string group;  // "param" | "effect" | "derived"
  double truth = 0.0;
  bool absolute = false;  // truth == 0: bias/rmse are absolute, not relative
  double bias = 0.0;      // sum(est_s - truth) / (S * truth), or absolute mean error
  double emp_se = 0.0;    // sqrt(sum (est_s - mean)^2 / (S - 1))
  double rmse = 0.0;      // sqrt(sum (est_s - truth)^2 / S) / truth, or absolute
  double coverage = 0.0;  // share of CIs containing the truth
  double mc_se_bias = 0.0;  // sqrt(Var(est) / S)
  int reps = 0;
};

MetricRow performance_metrics(const std::string& name, const std::string& group,
                              const std::vector<double>& estimates,
                              const std::vector<double>& ci_lo,
                              const std::vector<double>& ci_hi, double truth);

}  // namespace longmed
