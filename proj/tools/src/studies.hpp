#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "config.hpp"

namespace eqloop::tools {

/// One checked property: {test, status, residual, tolerance}. Passes when
/// residual <= tolerance, or residual >= tolerance for lower bounds (p-values).
struct Check {
  std::string test;
  double residual = 0.0;
  double tolerance = 0.0;
  bool lower_bound = false;
  bool pass() const { return lower_bound ? residual >= tolerance : residual <= tolerance; }
};

/// Long-format table plus the checks of a study.
struct StudyResult {
  std::string kind;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::vector<Check> checks;
  bool pass() const;
  nlohmann::json summary() const;
};

std::string format_number(double v);

StudyResult run_study(const StudyConfig& cfg);
/// "algebra" | "geometry" | "stochastic"; ConfigError otherwise.
StudyResult verify_suite(const std::string& name, std::uint64_t seed = 1, int threads = 1);

std::string to_csv(const StudyResult& r);
/// Reads a CSV written by to_csv (header + rows).
StudyResult parse_csv(const std::string& text);
/// Writes <dir>/<kind>.csv and <dir>/<kind>.json.
void write_outputs(const StudyResult& r, const std::string& dir);

/// Normalized plot program of the configured study (for --dump-plot).
std::string plot_program(const StudyConfig& cfg);

}  // namespace eqloop::tools
