#pragma once

#include <cstdint>
#include <vector>

#include "walklab/walk.hpp"

namespace walklab {

// zeta = P(first weak ascending ladder height = 0)
//      = sum_n P(S_1 < 0, ..., S_{n-1} < 0, S_n = 0).
struct ZetaEstimate {
  double value = 0.0;
  double truncation_bound = 0.0;  // bound on the uncounted series tail
  std::size_t horizon = 0;
  std::vector<double> series;  // term per n (lattice only)
};

// Lattice families: exact dynamic program over (time, height), truncated at
// `horizon` with an n^{-3/2} tail bound. Continuous families: exactly 0.
ZetaEstimate estimate_zeta(const IncrementFamily& f, std::size_t horizon = 512);

// Same series with the descending-side definition
// sum_n P(S_1 > 0, ..., S_{n-1} > 0, S_n = 0); equal by time reversal.
ZetaEstimate estimate_zeta_descending(const IncrementFamily& f,
                                      std::size_t horizon = 512);

// P(tau_1^+ > n) = P(S_1 < 0, ..., S_n < 0) for n = 0..N, exact DP for the
// lazy lattice.
std::vector<double> stay_strictly_negative_exact(const IncrementFamily& f,
                                                 std::size_t N);
// P(tau_1^- > n) = P(S_1 > 0, ..., S_n > 0).
std::vector<double> stay_strictly_positive_exact(const IncrementFamily& f,
                                                 std::size_t N);
// Monte Carlo versions for any family (early abort once the event dies).
double stay_strictly_negative_mc(const IncrementFamily& f, std::size_t n,
                                 std::size_t budget, Philox& rng);
double stay_strictly_positive_mc(const IncrementFamily& f, std::size_t n,
                                 std::size_t budget, Philox& rng);

enum class RenewalKind {
  Vplus,        // sum_k P(H_k^+ <= x)
  Vminus,       // sum_k P(H_k^- <= x)
  VplusUnder,   // strict inequality (left-continuous)
  VminusUnder,
  VplusHat,     // strict-ladder analogue, = (1-zeta) V
  VminusHat,
};

struct RenewalTable {
  RenewalKind kind = RenewalKind::Vminus;
  std::vector<double> grid;
  std::vector<double> values;
  std::vector<double> stderrs;
  double zeta = 0.0;
  bool exact = false;
  double alpha_rho = 1.0;  // regular-variation index used for extrapolation

  // Piecewise-linear inside the grid, power-law tail beyond it.
  double eval(double x) const;
};

struct RenewalConfig {
  std::size_t paths = 2'000;
  std::size_t horizon = 100'000;
  std::uint64_t seed = 1;
  std::uint64_t stream_base = 0;
  double max_rel_error = 0.10;
};

// Monte Carlo ladder-height counting along long walks.
RenewalTable estimate_renewal(const IncrementFamily& f, RenewalKind kind,
                              const std::vector<double>& grid,
                              const RenewalConfig& cfg);

// Closed-form table for the lazy lattice. The walk is skip-free in both
// directions, so first weak ladder heights live on {0,1} with
// P(height 1) = p; weak heights are Binomial(k, p) and
// V(x) = (floor(x)+1)/p, Vhat(x) = floor(x)+1, zeta = 1-p.
RenewalTable exact_renewal_lazy(const IncrementFamily& f, RenewalKind kind,
                                const std::vector<double>& grid);

}  // namespace walklab
