#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "walklab/errors.hpp"
#include "walklab/stats.hpp"
#include "walklab/walk.hpp"

using namespace walklab;

namespace {

// Definition-checking oracle: rescan the whole path for each ladder kind.
LadderStats brute_ladders(const WalkPath& path) {
  LadderStats out;
  const double base = path.positions[0];
  const std::size_t n = path.steps.size();
  auto scan = [&](bool ascending, bool strict, LadderSeq& seq) {
    std::size_t last_epoch = 0;
    for (;;) {
      const double ref =
          (last_epoch == 0 ? 0.0 : path.positions[last_epoch] - base);
      std::size_t found = 0;
      for (std::size_t k = last_epoch + 1; k <= n; ++k) {
        const double s = path.positions[k] - base;
        const double v = ascending ? s : -s;
        const double r = ascending ? ref : -ref;
        if (strict ? v > r : v >= r) {
          found = k;
          break;
        }
      }
      if (!found) break;
      seq.epochs.push_back(found);
      const double s = path.positions[found] - base;
      seq.heights.push_back(ascending ? s : -s);
      last_epoch = found;
    }
  };
  scan(true, false, out.weak_asc);
  scan(false, false, out.weak_desc);
  scan(true, true, out.strict_asc);
  scan(false, true, out.strict_desc);
  return out;
}

bool same_seq(const LadderSeq& a, const LadderSeq& b) {
  return a.epochs == b.epochs && a.heights == b.heights;
}

}  // namespace

TEST_CASE("family construction and scaling") {
  const IncrementFamily lazy = make_lazy_lattice(0.3);
  CHECK(lazy.stable_target.alpha == 2.0);
  CHECK(lazy.stable_target.scale == doctest::Approx(0.5));
  CHECK(lazy.lattice);
  auto [a100, b100] = scaling_constants(lazy, 100);
  CHECK(a100 == doctest::Approx(std::sqrt(60.0)));  // sqrt(0.6 n)
  CHECK(b100 * 100.0 * a100 == doctest::Approx(1.0).epsilon(1e-14));

  const IncrementFamily gauss = make_gaussian(1.0);
  CHECK_FALSE(gauss.lattice);
  CHECK(scaling_constants(gauss, 49).first == doctest::Approx(7.0));

  // a_{4n}/a_n -> 2 for alpha = 2
  const ScalingLaw sc = scaling_law(lazy);
  CHECK(sc.a(4000.0) / sc.a(1000.0) == doctest::Approx(2.0));

  CHECK_THROWS_AS(make_lazy_lattice(0.0), BadFamilyParams);
  CHECK_THROWS_AS(make_lazy_lattice(0.5), BadFamilyParams);
  CHECK_THROWS_AS(make_gaussian(-1.0), BadFamilyParams);
  CHECK_THROWS_AS(make_two_sided_pareto(2.1, 0.5), BadFamilyParams);
  CHECK_THROWS_AS(make_two_sided_pareto(1.5, 1.0), BadFamilyParams);
  CHECK_THROWS_AS(make_two_sided_pareto(1.0, 0.7), BadFamilyParams);
}

TEST_CASE("path simulation basics") {
  const IncrementFamily lazy = make_lazy_lattice(0.3);
  Philox rng(21, 0);
  WalkPath p = simulate_path(lazy, 5, 0.0, rng);
  CHECK(p.positions.size() == 6);
  CHECK(p.positions[0] == 0.0);
  for (std::size_t k = 1; k <= 5; ++k) {
    CHECK(p.positions[k] ==
          doctest::Approx(p.positions[k - 1] + p.steps[k - 1]));
    CHECK(p.min_from0[k] == std::min(p.min_from0[k - 1], p.positions[k]));
    CHECK(p.min_from0[k] == std::min(p.x0, p.min_from1[k]));
  }
}

TEST_CASE("centered families have near-zero mean sums") {
  for (const IncrementFamily& f :
       {make_lazy_lattice(0.3), make_gaussian(1.0),
        make_two_sided_pareto(1.5, 0.7)}) {
    Philox rng(22, 0);
    const std::size_t paths = 20'000, n = 64;
    double acc = 0.0, acc2 = 0.0;
    for (std::size_t i = 0; i < paths; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += f.sample_step(rng);
      acc += s;
      acc2 += s * s;
    }
    const double mean = acc / paths;
    const double se = std::sqrt((acc2 / paths - mean * mean) / paths);
    CHECK(std::fabs(mean) < 4.5 * se);
  }
}

TEST_CASE("ladder examples from flat and rising paths") {
  WalkPath rising;
  rising.x0 = 0;
  rising.positions = {0, 1, 2, 3};
  rising.steps = {1, 1, 1};
  LadderStats ls = ladder_stats(rising);
  CHECK(ls.weak_asc.epochs == std::vector<std::size_t>{1, 2, 3});
  CHECK(ls.weak_asc.heights == std::vector<double>{1, 2, 3});
  CHECK(ls.weak_desc.epochs.empty());
  CHECK(ls.strict_desc.epochs.empty());

  WalkPath flat;
  flat.x0 = 0;
  flat.positions = {0, 0};
  flat.steps = {0};
  LadderStats fs = ladder_stats(flat);
  REQUIRE(fs.weak_asc.epochs.size() == 1);
  CHECK(fs.weak_asc.epochs[0] == 1);
  CHECK(fs.weak_asc.heights[0] == 0.0);
  CHECK(fs.strict_asc.epochs.empty());
  // a flat step is a weak epoch on both sides, never a strict one
  CHECK(fs.weak_desc.epochs.size() == 1);
  CHECK(fs.strict_desc.epochs.empty());
}

TEST_CASE("ladders agree with the definition-rescan oracle") {
  Philox rng(23, 0);
  for (const IncrementFamily& f :
       {make_lazy_lattice(0.3), make_gaussian(1.0)}) {
    for (int rep = 0; rep < 1000; ++rep) {
      WalkPath p = simulate_path(f, 20, 0.0, rng);
      LadderStats fast = ladder_stats(p);
      LadderStats slow = brute_ladders(p);
      REQUIRE(same_seq(fast.weak_asc, slow.weak_asc));
      REQUIRE(same_seq(fast.weak_desc, slow.weak_desc));
      REQUIRE(same_seq(fast.strict_asc, slow.strict_asc));
      REQUIRE(same_seq(fast.strict_desc, slow.strict_desc));
      // every strict epoch is a weak epoch
      for (std::size_t e : fast.strict_asc.epochs)
        CHECK(std::find(fast.weak_asc.epochs.begin(),
                        fast.weak_asc.epochs.end(),
                        e) != fast.weak_asc.epochs.end());
    }
  }
}

TEST_CASE("scaled lattice walk matches the stable limit") {
  const IncrementFamily lazy = make_lazy_lattice(0.3);
  Philox rng(24, 0);
  const std::size_t n = 1000, paths = 10'000;
  const double a_n = scaling_law(lazy).a(static_cast<double>(n));
  std::vector<double> scaled(paths);
  for (double& s : scaled) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += lazy.sample_step(rng);
    s = acc / a_n;
  }
  EmpiricalCdf ecdf = empirical_cdf(std::move(scaled));
  const double ks = ks_statistic(ecdf, [&](double z) {
    return stable_cdf(lazy.stable_target, z, 1e-7);
  });
  CHECK(ks <= 0.02);
}

TEST_CASE("ladder-count duality under path reversal") {
  const IncrementFamily lazy = make_lazy_lattice(0.3);
  Philox rng(25, 0);
  const std::size_t n = 200, paths = 10'000;
  std::vector<double> fwd, rev;
  for (std::size_t i = 0; i < paths; ++i) {
    WalkPath p = simulate_path(lazy, n, 0.0, rng);
    fwd.push_back(
        static_cast<double>(ladder_stats(p).weak_asc.epochs.size()));
    WalkPath r;
    r.x0 = 0.0;
    r.positions.resize(n + 1);
    for (std::size_t k = 0; k <= n; ++k)
      r.positions[k] = p.positions[n] - p.positions[n - k];
    rev.push_back(
        static_cast<double>(ladder_stats(r).weak_asc.epochs.size()));
  }
  MeanStderr mf = mean_stderr(fwd), mr = mean_stderr(rev);
  const double joint =
      std::sqrt(mf.stderr_ * mf.stderr_ + mr.stderr_ * mr.stderr_);
  CHECK(std::fabs(mf.mean - mr.mean) < 4.0 * joint);
}

TEST_CASE("pareto normalization matches the target CF" *
          doctest::timeout(600)) {
  const IncrementFamily f = make_two_sided_pareto(1.5, 0.7);
  const double a = f.a_coeff();  // triggers the deterministic pin
  CHECK(a > 0.5);
  CHECK(a < 5.0);
  CHECK(a == f.a_coeff());  // cached, identical
  // independent oracle: empirical CF of fresh S_n/a_n against G
  const std::size_t n = 10'000, paths = 12'000;
  const double a_n = scaling_law(f).a(static_cast<double>(n));
  Philox rng(26, 0);
  std::vector<double> scaled(paths);
  for (double& s : scaled) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += f.sample_step(rng);
    s = acc / a_n;
  }
  for (double w : {-2.0, -1.0, 1.0, 2.0}) {
    double re = 0.0, im = 0.0;
    for (double s : scaled) {
      re += std::cos(w * s);
      im += std::sin(w * s);
    }
    const auto target = f.stable_target.cf(w);
    const double diff = std::hypot(re / paths - target.real(),
                                   im / paths - target.imag());
    CHECK(diff < 0.035);  // 1/sqrt(paths) noise plus the pin tolerance
  }
}
