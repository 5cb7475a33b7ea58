#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace eppo::verify {

struct CheckResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;   // worst error observed (units depend on the check)
  double tolerance = 0.0;
  std::string detail;
};

struct VerifyOptions {
  // Substring match on check names; empty runs everything.
  std::string filter;
  std::uint64_t seed = 20240601;
  // Fault injection: constant added to the NLL under test.
  double nll_offset = 0.0;
};

std::vector<std::string> check_names();

// Runs the selected oracle and property checks in check_names() order.
std::vector<CheckResult> run_checks(const VerifyOptions& options);

}  // namespace eppo::verify
