#include <cstdlib>
#include <iostream>
#include <string>

#include "walklab/acceptance.hpp"

// Verification suite: one pass/fail line per criterion. Budgets are the
// full configuration; WALKLAB_ACCEPT_SCALE (0 < s <= 1) trims Monte Carlo
// budgets for quick local runs.
int main(int argc, char** argv) {
  walklab::AcceptanceOptions opt;
  opt.threads = 2;
  if (const char* t = std::getenv("WALKLAB_ACCEPT_THREADS"))
    opt.threads = std::strtoul(t, nullptr, 10);
  if (const char* s = std::getenv("WALKLAB_ACCEPT_SCALE"))
    opt.budget_scale = std::strtod(s, nullptr);
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg.rfind("--scale=", 0) == 0)
      opt.budget_scale = std::strtod(arg.c_str() + 8, nullptr);
    if (arg.rfind("--seed=", 0) == 0)
      opt.seed = std::strtoull(arg.c_str() + 7, nullptr, 10);
  }
  const auto results = walklab::run_acceptance(opt, std::cout);
  int failed = 0;
  for (const auto& r : results)
    if (!r.pass) ++failed;
  std::cout << (failed == 0 ? "ACCEPTANCE: all criteria passed"
                            : "ACCEPTANCE: " + std::to_string(failed) +
                                  " criterion(s) failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
