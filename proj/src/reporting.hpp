#pragma once

// Report rendering: nested JSON documents plus flat CSV exports.  All
// floating-point values are serialized with 17 significant digits so reruns
// with the same config and seed reproduce reports byte for byte; reports
// carry no timestamps or environment echoes for the same reason.

#include <cstdint>
#include <string>
#include <vector>

#include "fitting.hpp"
#include "mc_driver.hpp"
#include "simulate.hpp"

namespace longmed {

std::string fit_report_json(const FitResult& res, const std::string& data_path,
                            std::uint64_t seed);
std::string fit_report_csv(const FitResult& res);

// Univariate mode: one fit per process, in model stacking order.
std::string univariate_report_json(Model model, const std::vector<char>& processes,
                                   const std::vector<FitResult>& fits,
                                   const std::string& data_path, std::uint64_t seed);
std::string univariate_report_csv(const std::vector<char>& processes,
                                  const std::vector<FitResult>& fits);

// Generating-truth sidecar written next to a simulated dataset.
std::string truth_report_json(const ConditionSpec& spec, const TruthBundle& truth,
                              std::uint64_t seed);

// Condition blocks plus a grid summary (per quantity, median and range of
// each metric across the conditions where it appears).
std::string mc_report_json(const std::vector<ConditionResult>& results,
                           std::uint64_t top_seed);
std::string mc_report_csv(const std::vector<ConditionResult>& results);

// out.json -> out.csv; any other name gets ".csv" appended.
std::string csv_path_for(const std::string& out_path);

void write_text_file(const std::string& path, const std::string& text);  // IoError
std::string read_text_file(const std::string& path);                     // IoError

}  // namespace longmed
