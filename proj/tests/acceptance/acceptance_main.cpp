// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include "dichotomy/verification.hpp"

#include <cstdlib>
#include <iostream>
#include <string>

int main(int argc, char** argv) {
  dichotomy::VerifyOptions options;
  std::string only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) only = argv[++i];
  }

  int failures = 0;
  for (const std::string& name : dichotomy::check_names()) {
    if (!only.empty() && name != only) continue;
    const dichotomy::CheckResult r = dichotomy::run_check(name, options);
    std::cout << dichotomy::format_check(r) << std::endl;
    if (!r.passed) ++failures;
  }
  std::cout << (failures == 0 ? "ALL CRITERIA PASSED" : std::to_string(failures) + " CRITERIA FAILED") << std::endl;
  return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
