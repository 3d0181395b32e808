#pragma once

// Built-in reference checks shared by the acceptance test binary and the
// `verify` subcommand of the command-line tool.

#include <cstdint>
#include <string>
#include <vector>

namespace dichotomy {

struct Measurement {
  std::string label;
  double value = 0.0;
  double bound = 0.0;
  std::string relation;  // "<=", ">=" or "=="
  bool passed = false;
};

struct CheckResult {
  int criterion = 0;
  std::string name;
  std::string title;
  bool passed = false;
  std::vector<Measurement> measurements;
  std::string error;  // set when the check threw
  double seconds = 0.0;
};

struct VerifyOptions {
  double truncation_time = 12.0;
  std::uint64_t seed = 20240611;
};

/// Check names in criterion order.
std::vector<std::string> check_names();

/// Runs one named check; exceptions are caught and reported as failures.
/// Throws std::invalid_argument for an unknown name.
CheckResult run_check(const std::string& name, const VerifyOptions& options = {});

/// One line: "PASS [n] name: label=value (<= bound), ...".
std::string format_check(const CheckResult& result);

}  // namespace dichotomy
