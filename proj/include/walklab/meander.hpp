#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "walklab/kernel.hpp"
#include "walklab/stats.hpp"
#include "walklab/walk.hpp"

namespace walklab {

// Provenance every estimated table carries into reports.
struct TableProvenance {
  std::string family;
  std::size_t n_steps = 0;
  std::size_t samples = 0;
  double bandwidth = 0.0;
  std::uint64_t seed = 0;
  double a_coeff = 0.0;
};

struct MeanderConfig {
  std::size_t n_steps = 10'000;
  std::size_t samples = 40'000;  // accepted endpoints
  double grid_max = 4.5;
  double grid_step = 0.02;
  double bandwidth = 0.0;  // 0: Silverman rule on the accepted sample
  std::uint64_t seed = 0xA11CE;
  std::uint64_t stream_base = 0;
  std::size_t threads = 8;
  std::size_t attempt_budget = 2'000'000'000;
};

// Kernel-smoothed density of S_n / a_n on {L_n >= 0}; the finite-n walk
// functional approximating the time-one marginal of the meander.
struct MeanderTable {
  int sign = +1;  // -1: meander of the negated walk
  StableParams params;
  std::vector<double> grid;
  std::vector<double> value;
  std::vector<double> stderr_;
  TableProvenance provenance;

  double eval(double w) const;             // linear interpolation, 0 outside
  double moment(double power) const;       // int w^power g(w) dw (trapezoid)
  double moment_stderr(double power) const;
  double mass() const;
};

MeanderTable estimate_meander_density(const IncrementFamily& f, int sign,
                                      const MeanderConfig& cfg);

struct BridgeConfig {
  std::size_t n_steps = 2'000;
  std::vector<double> a_grid;  // requested scaled start points
  std::vector<double> b_grid;  // requested scaled end points
  // Monte Carlo route only:
  std::size_t paths_per_start = 400'000;
  double bin_width_scaled = 0.05;  // in units of a_n
  std::uint64_t seed = 0xB21D;
  std::uint64_t stream_base = 0;
  std::size_t threads = 8;
};

// P_a(bridge over [0,1] from a to b stays nonnegative), approximated by the
// n-step walk. The lattice route evaluates the exact ratio
// q_n(x, y) / P(S_n = y - x) at x = round(a a_n), y = round(b a_n); grids
// store the actual scaled coordinates x/a_n, y/a_n.
struct BridgePositivityTable {
  StableParams params;
  std::vector<double> a_grid;
  std::vector<double> b_grid;
  std::vector<std::vector<double>> value;    // [a][b]
  std::vector<std::vector<double>> stderr_;  // zero on the exact route
  bool exact = false;
  TableProvenance provenance;
  double bias_probe = 0.0;  // max discretization delta seen on probe points

  double eval(double a, double b) const;  // bilinear, clamped to the grid
};

BridgePositivityTable bridge_positivity_dp(const IncrementFamily& lazy,
                                           const BridgeConfig& cfg);
BridgePositivityTable bridge_positivity_mc(const IncrementFamily& f,
                                           const BridgeConfig& cfg);

}  // namespace walklab
