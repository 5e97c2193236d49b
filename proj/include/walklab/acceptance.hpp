#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace walklab {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  double seconds = 0.0;
  std::vector<std::string> details;
};

struct AcceptanceOptions {
  std::uint64_t seed = 20240810;
  std::size_t threads = 8;
  // Scales Monte Carlo budgets; 1.0 is the full configuration the
  // verification suite runs with.
  double budget_scale = 1.0;
};

// Runs the ten verification criteria, printing one pass/fail line each.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt,
                                            std::ostream& out);

bool all_passed(const std::vector<CriterionResult>& results);

}  // namespace walklab
