#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "walklab/rng.hpp"
#include "walklab/stable.hpp"

namespace walklab {

enum class FamilyKind { LazyLattice, Gaussian, TwoSidedPareto };

// A concrete step law attracted to a declared stable target, together with
// its norming convention a_n = a_coeff * n^{1/alpha}.
//
//   LazyLattice(p):   P(+1)=P(-1)=p, P(0)=1-2p; aperiodic span-1 lattice;
//                     a_n = sqrt(2p n), target N(0,1) i.e. (2, 0, 1/2).
//   Gaussian(sigma):  steps N(0, sigma^2); a_n = sigma sqrt(n); same target.
//   TwoSidedPareto:   |X| = U^{-1/alpha}, sign + with prob `balance`,
//                     mean-centered when alpha > 1; target (alpha, 2b-1, 1)
//                     with a_coeff pinned by characteristic-function
//                     matching of S_n/a_n against the target at large n.
struct IncrementFamily {
  FamilyKind kind = FamilyKind::LazyLattice;
  double p = 0.3;            // LazyLattice
  double sigma = 1.0;        // Gaussian
  double tail_alpha = 1.5;   // TwoSidedPareto
  double balance = 0.5;      //   P(positive side)
  double centering = 0.0;    //   subtracted from every step
  StableParams stable_target;
  bool lattice = false;

  double sample_step(Philox& rng) const {
    switch (kind) {
      case FamilyKind::LazyLattice: {
        const double u = rng.uniform();
        if (u < p) return 1.0;
        if (u < 2.0 * p) return -1.0;
        return 0.0;
      }
      case FamilyKind::Gaussian:
        return sigma * rng.normal();
      case FamilyKind::TwoSidedPareto: {
        const double mag = std::pow(rng.uniform(), -1.0 / tail_alpha);
        const double x = (rng.uniform() < balance) ? mag : -mag;
        return x - centering;
      }
    }
    return 0.0;
  }

  double a_coeff() const;  // Pareto pin is computed once and cached
  std::string describe() const;
};

IncrementFamily make_lazy_lattice(double p);
IncrementFamily make_gaussian(double sigma);
IncrementFamily make_two_sided_pareto(double alpha, double balance);

// Norming constants a_n = a_coeff n^{1/alpha} and b_n = 1/(n a_n).
struct ScalingLaw {
  double alpha = 2.0;
  double a_coeff = 1.0;
  double a(double n) const { return a_coeff * std::pow(n, 1.0 / alpha); }
  double b(double n) const { return 1.0 / (n * a(n)); }
};

ScalingLaw scaling_law(const IncrementFamily& f);
// (a_n, b_n) pair for one n.
std::pair<double, double> scaling_constants(const IncrementFamily& f,
                                            std::int64_t n);

struct WalkPath {
  double x0 = 0.0;
  std::vector<double> steps;      // X_1..X_n
  std::vector<double> positions;  // S_0..S_n, S_0 = x0
  std::vector<double> min_from1;  // L_k = min_{1<=j<=k} S_j; [0] = +inf
  std::vector<double> min_from0;  // L*_k = min_{0<=j<=k} S_j

  std::size_t length() const { return steps.size(); }
};

WalkPath simulate_path(const IncrementFamily& f, std::size_t n, double x0,
                       Philox& rng);

// Ladder epochs/heights of the increments (positions relative to S_0).
// Weak epochs use >= / <=, strict ones > / <; heights are +/- the walk
// value at the epoch, so all four height sequences are nonnegative.
struct LadderSeq {
  std::vector<std::size_t> epochs;
  std::vector<double> heights;
};

struct LadderStats {
  LadderSeq weak_asc, weak_desc, strict_asc, strict_desc;
};

LadderStats ladder_stats(const WalkPath& path);

}  // namespace walklab
