#pragma once

// Wide-format panel data: one row per individual, per-process occasion and
// value columns.  Columns: `id`; `x` (Model 1 baseline covariate); for each
// longitudinal process u present, `u_t1..u_tJ` (occasions) and `u_v1..u_vJ`
// (observed values).  No missing cells; occasions strictly increasing per
// process; J consistent across rows.

#include <stdexcept>
#include <string>
#include <vector>

#include "growth_model.hpp"

namespace longmed {

// Bad input data or configuration (maps to exit code 2).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Filesystem trouble (maps to exit code 5).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IndividualRecord {
  std::string id;
  double x = 0.0;  // scalar baseline covariate (Model 1 only)
  Eigen::VectorXd x_t, x_v;  // covariate process (Model 2 only)
  Eigen::VectorXd m_t, m_v;
  Eigen::VectorXd y_t, y_v;
};

struct Dataset {
  Model model = Model::kModel1;
  int J = 0;
  std::vector<IndividualRecord> rows;

  int n() const { return static_cast<int>(rows.size()); }
};

// Processes carried by a model's data files, in stacking order.
std::vector<char> model_processes(Model model);

// Occasion-count and per-process invariants; throws ValidationError naming
// the offending row and process.
void validate(const Dataset& data);

// Reads a dataset, inferring the model kind from the header (`x` column =>
// Model 1; `x_t*` columns => Model 2; neither => mediator/outcome only is
// rejected).  Validates before returning.
Dataset read_dataset_csv(const std::string& path);

void write_dataset_csv(const Dataset& data, const std::string& path);

// Pull one process out as a univariate dataset (values live in m_t/m_v).
Dataset extract_process(const Dataset& data, char process);

struct TimeRange {
  double lo = 0.0;
  double hi = 0.0;
};

// Pooled observed time range of one process across all rows.
TimeRange process_time_range(const Dataset& data, char process);

// Render a double with enough digits to round-trip exactly.
std::string format_full(double v);

}  // namespace longmed
