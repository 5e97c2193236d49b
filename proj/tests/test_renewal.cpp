#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "walklab/errors.hpp"
#include "walklab/renewal.hpp"

using namespace walklab;

namespace {

// Enumerate all 3^n step sequences of the lazy lattice.
double brute_zeta_term(double p, int n) {
  const double r = 1.0 - 2.0 * p;
  long pows = 1;
  for (int i = 0; i < n; ++i) pows *= 3;
  double total = 0.0;
  for (long mask = 0; mask < pows; ++mask) {
    long m = mask;
    double prob = 1.0;
    int s = 0;
    bool ok = true;
    for (int i = 0; i < n; ++i) {
      const int d = m % 3;
      m /= 3;
      if (d == 0) {
        s += 1;
        prob *= p;
      } else if (d == 1) {
        s -= 1;
        prob *= p;
      } else {
        prob *= r;
      }
      if (i < n - 1 && s >= 0) {
        ok = false;
        break;
      }
    }
    if (ok && s == 0) total += prob;
  }
  return total;
}

double brute_stay_negative(double p, int n) {
  const double r = 1.0 - 2.0 * p;
  long pows = 1;
  for (int i = 0; i < n; ++i) pows *= 3;
  double total = 0.0;
  for (long mask = 0; mask < pows; ++mask) {
    long m = mask;
    double prob = 1.0;
    int s = 0;
    bool ok = true;
    for (int i = 0; i < n; ++i) {
      const int d = m % 3;
      m /= 3;
      if (d == 0) {
        s += 1;
        prob *= p;
      } else if (d == 1) {
        s -= 1;
        prob *= p;
      } else {
        prob *= r;
      }
      if (s >= 0) {
        ok = false;
        break;
      }
    }
    if (ok) total += prob;
  }
  return total;
}

}  // namespace

TEST_CASE("zeta series terms match exhaustive enumeration") {
  const IncrementFamily lazy = make_lazy_lattice(0.3);
  const ZetaEstimate z = estimate_zeta(lazy, 64);
  for (int n = 1; n <= 11; ++n)
    CHECK(z.series[n - 1] ==
          doctest::Approx(brute_zeta_term(0.3, n)).epsilon(1e-12));
}

TEST_CASE("zeta converges to 1 - p within its truncation bound") {
  for (double p : {0.2, 0.3, 0.45}) {
    const IncrementFamily lazy = make_lazy_lattice(p);
    const ZetaEstimate z = estimate_zeta(lazy, 4096);
    CHECK(z.value <= 1.0 - p + 1e-12);
    CHECK(z.value + z.truncation_bound >= (1.0 - p) * 0.999);
    CHECK(std::fabs(z.value - (1.0 - p)) < 2.0 * z.truncation_bound + 1e-6);
  }
}

TEST_CASE("zeta duality: ascending and descending series agree") {
  const IncrementFamily lazy = make_lazy_lattice(0.3);
  const ZetaEstimate za = estimate_zeta(lazy, 512);
  const ZetaEstimate zd = estimate_zeta_descending(lazy, 512);
  CHECK(za.value == doctest::Approx(zd.value).epsilon(1e-12));
}

TEST_CASE("zeta for atomless increments is exactly zero") {
  const ZetaEstimate z = estimate_zeta(make_gaussian(1.0));
  CHECK(z.value == 0.0);
  CHECK(z.truncation_bound == 0.0);
}

TEST_CASE("stay-negative tail matches enumeration and symmetry") {
  const IncrementFamily lazy = make_lazy_lattice(0.3);
  const std::vector<double> tail = stay_strictly_negative_exact(lazy, 10);
  for (int n = 1; n <= 10; ++n)
    CHECK(tail[n] == doctest::Approx(brute_stay_negative(0.3, n)).epsilon(1e-12));
  const std::vector<double> tail_pos = stay_strictly_positive_exact(lazy, 10);
  for (int n = 0; n <= 10; ++n) CHECK(tail[n] == tail_pos[n]);
}

TEST_CASE("exact lattice renewal closed forms") {
  const IncrementFamily lazy = make_lazy_lattice(0.3);
  const std::vector<double> grid = {0, 1, 2, 5.5, 10};
  RenewalTable v = exact_renewal_lazy(lazy, RenewalKind::Vplus, grid);
  CHECK(v.values[0] == doctest::Approx(1.0 / 0.3));  // = 1/(1-zeta)
  CHECK(v.values[1] == doctest::Approx(2.0 / 0.3));
  CHECK(v.values[3] == doctest::Approx(6.0 / 0.3));  // floor(5.5)+1
  RenewalTable vhat = exact_renewal_lazy(lazy, RenewalKind::VplusHat, grid);
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(vhat.values[i] == doctest::Approx(0.3 * v.values[i]));
  RenewalTable vund = exact_renewal_lazy(lazy, RenewalKind::VplusUnder, grid);
  CHECK(vund.values[0] == 0.0);               // P(H < 0) = 0
  CHECK(vund.values[1] == doctest::Approx(1.0 / 0.3));  // heights < 1 = {0}
  CHECK(vund.values[3] == doctest::Approx(6.0 / 0.3));  // < 5.5 = {0..5}
}

TEST_CASE("Monte Carlo renewal agrees with the exact lattice table") {
  const IncrementFamily lazy = make_lazy_lattice(0.3);
  const std::vector<double> grid = {0, 1, 2, 4};
  RenewalConfig cfg;
  cfg.paths = 3000;
  cfg.horizon = 200'000;
  cfg.seed = 31;
  const double a_T = scaling_law(lazy).a(double(cfg.horizon));
  for (RenewalKind kind : {RenewalKind::Vplus, RenewalKind::Vminus,
                           RenewalKind::VplusHat, RenewalKind::VplusUnder}) {
    RenewalTable mc = estimate_renewal(lazy, kind, grid, cfg);
    RenewalTable exact = exact_renewal_lazy(lazy, kind, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double err = std::max(mc.stderrs[i], 1e-6);
      // finite-horizon counting can only miss ladder points, so the bias
      // is one-sided and of order V(x) (x+1)/a_horizon
      const double trunc = 3.0 * exact.values[i] * (grid[i] + 1.0) / a_T;
      CHECK(mc.values[i] < exact.values[i] + 5.0 * err);
      CHECK(mc.values[i] > exact.values[i] - 5.0 * err - trunc);
    }
    cfg.stream_base += 1u << 16;
  }
}

TEST_CASE("renewal table structure: nondecreasing, V(0), eval") {
  const IncrementFamily gauss = make_gaussian(1.0);
  RenewalConfig cfg;
  cfg.paths = 1500;
  cfg.horizon = 20'000;
  cfg.seed = 32;
  const std::vector<double> grid = {0, 0.5, 1, 2, 4, 8};
  RenewalTable v = estimate_renewal(gauss, RenewalKind::Vminus, grid, cfg);
  // zeta = 0 for continuous steps, so V-(0) = 1
  CHECK(v.values[0] == doctest::Approx(1.0).epsilon(0.05));
  for (std::size_t i = 1; i < grid.size(); ++i)
    CHECK(v.values[i] + 1e-9 >= v.values[i - 1]);
  // underlined kind coincides for continuous families
  cfg.stream_base = 1u << 18;
  RenewalTable vu =
      estimate_renewal(gauss, RenewalKind::VminusUnder, grid, cfg);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double err = 5.0 * (v.stderrs[i] + vu.stderrs[i]) + 1e-9;
    CHECK(std::fabs(vu.values[i] - v.values[i]) < err);
  }
  // interpolation / extrapolation sanity
  CHECK(v.eval(-1.0) == 0.0);
  CHECK(v.eval(1.5) >= v.values[2]);
  CHECK(v.eval(16.0) > v.values.back());
}

TEST_CASE("regular variation of the exact renewal function") {
  const IncrementFamily lazy = make_lazy_lattice(0.3);
  const ScalingLaw sc = scaling_law(lazy);
  // slope of log V+(a_n) in log n should be alpha*rho/alpha = rho = 1/2
  const RenewalTable v = exact_renewal_lazy(
      lazy, RenewalKind::Vplus, {sc.a(100.0), sc.a(100'000.0)});
  const double slope = std::log(v.values[1] / v.values[0]) /
                       std::log(100'000.0 / 100.0);
  CHECK(slope == doctest::Approx(0.5).epsilon(0.1));  // +-0.05 absolute
  // product stabilization across the spec's n ladder
  double lo = 1e300, hi = 0.0;
  for (double n : {1e3, 4e3, 1.6e4}) {
    const RenewalTable t =
        exact_renewal_lazy(lazy, RenewalKind::Vplus, {sc.a(n)});
    const double prod = t.values[0] * t.values[0] / n;  // V+ = V- by symmetry
    lo = std::min(lo, prod);
    hi = std::max(hi, prod);
  }
  CHECK(hi / lo < 1.15);
}

TEST_CASE("budget guard raises on hopeless accuracy demands") {
  const IncrementFamily gauss = make_gaussian(1.0);
  RenewalConfig cfg;
  cfg.paths = 3;
  cfg.horizon = 200;
  cfg.max_rel_error = 0.001;
  CHECK_THROWS_AS(
      estimate_renewal(gauss, RenewalKind::Vplus, {0.0, 1.0, 30.0}, cfg),
      BudgetTooSmall);
}

TEST_CASE("grid validation") {
  const IncrementFamily lazy = make_lazy_lattice(0.3);
  RenewalConfig cfg;
  CHECK_THROWS_AS(
      estimate_renewal(lazy, RenewalKind::Vplus, {1.0, 1.0}, cfg),
      InvalidConfig);
  CHECK_THROWS_AS(
      estimate_renewal(lazy, RenewalKind::Vplus, {-1.0, 1.0}, cfg),
      InvalidConfig);
}
