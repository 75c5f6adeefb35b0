#include "metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace longmed {

MetricRow performance_metrics(const std::string& name, const std::string& group,
                              const std::vector<double>& estimates,
                              const std::vector<double>& ci_lo,
                              const std::vector<double>& ci_hi, double truth) {
  const std::size_t s = estimates.size();
  if (s < 2) throw std::invalid_argument("performance metrics need at least 2 replications");
  if (ci_lo.size() != s || ci_hi.size() != s) {
    throw std::invalid_argument("estimate and interval lists must be aligned");
  }
  MetricRow row;
  row.name = name;
  row.group = group;
  row.truth = truth;
  row.absolute = truth == 0.0;
  row.reps = static_cast<int>(s);

  double sum_err = 0.0, sum_sq_err = 0.0, mean = 0.0;
  int covered = 0;
  for (std::size_t i = 0; i < s; ++i) {
    const double e = estimates[i] - truth;
    sum_err += e;
    sum_sq_err += e * e;
    mean += estimates[i];
    if (ci_lo[i] <= truth && truth <= ci_hi[i]) ++covered;
  }
  mean /= static_cast<double>(s);
  double ss_mean = 0.0;
  for (double v : estimates) ss_mean += (v - mean) * (v - mean);

  const double scale = row.absolute ? 1.0 : truth;
  row.bias = sum_err / (static_cast<double>(s) * scale);
  row.emp_se = std::sqrt(ss_mean / static_cast<double>(s - 1));
  row.rmse = std::sqrt(sum_sq_err / static_cast<double>(s)) / std::abs(scale);
  row.coverage = static_cast<double>(covered) / static_cast<double>(s);
  row.mc_se_bias = std::sqrt(ss_mean / static_cast<double>(s - 1) / static_cast<double>(s));
  return row;
}

}  // namespace longmed
