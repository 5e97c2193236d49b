#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "walklab/bpre.hpp"
#include "walklab/errors.hpp"
#include "walklab/regime.hpp"
#include "walklab/stats.hpp"

using namespace walklab;

namespace {

// Moebius-matrix composition oracle for geometric (linear-fractional) pgfs:
// f(s) = q / (1 - th s) corresponds to [[0, q], [-th, 1]].
double geometric_survival_oracle(const Environment& env, std::size_t horizon) {
  long double a = 1.0L, b = 0.0L, c = 0.0L, d = 1.0L;  // identity
  for (std::size_t i = 0; i < horizon; ++i) {
    const long double q = 1.0L / (1.0L + (long double)env.laws[i].mean);
    const long double th = 1.0L - q;
    // compose: current o f_i  (matrices multiply on the right)
    const long double na = b * (-th) + a * 0.0L;
    const long double nb = a * q + b * 1.0L;
    const long double nc = d * (-th) + c * 0.0L;
    const long double nd = c * q + d * 1.0L;
    a = na;
    b = nb;
    c = nc;
    d = nd;
  }
  const long double comp_at_0 = b / d;
  return static_cast<double>(1.0L - comp_at_0);
}

EnvironmentModel lattice_hybrid() {
  return {make_lazy_lattice(0.3), OffspringKind::HybridBernoulliPoisson};
}

}  // namespace

TEST_CASE("offspring laws: pgf, mean, survival transform") {
  for (const OffspringLaw law :
       {OffspringLaw{OffspringKind::HybridBernoulliPoisson, 0.6},
        OffspringLaw{OffspringKind::HybridBernoulliPoisson, 2.3},
        OffspringLaw{OffspringKind::Geometric, 1.7}}) {
    CHECK(law.pgf(1.0) == doctest::Approx(1.0));
    // numerical derivative at 1 equals the mean
    const double h = 1e-6;
    CHECK((law.pgf(1.0) - law.pgf(1.0 - h)) / h ==
          doctest::Approx(law.mean).epsilon(1e-4));
    for (double w : {1e-12, 1e-6, 0.3, 1.0})
      CHECK(law.survival_transform(w) ==
            doctest::Approx(1.0 - law.pgf(1.0 - w)).epsilon(1e-9));
  }
}

TEST_CASE("gamma(b) closed forms and the hybrid uniform bound") {
  OffspringLaw bern{OffspringKind::HybridBernoulliPoisson, 0.4};
  CHECK(bern.gamma_truncated(2) == 0.0);  // no mass at or above 2
  CHECK(bern.gamma_truncated(1) == doctest::Approx(1.0 / 0.4));

  OffspringLaw pois1{OffspringKind::HybridBernoulliPoisson, 1.0};
  const double e1 = std::exp(-1.0);
  CHECK(pois1.gamma_truncated(2) ==
        doctest::Approx((2.0 - e1) / ((1.0 - e1) * (1.0 - e1))));
  // sup over the Poisson branch sits at M = 1 and is ~4.0846
  CHECK(pois1.gamma_truncated(2) == doctest::Approx(4.0846).epsilon(1e-3));
  double sup = 0.0;
  for (double M = 1.0; M <= 50.0; M += 0.01) {
    OffspringLaw law{OffspringKind::HybridBernoulliPoisson, M};
    sup = std::max(sup, law.gamma_truncated(2));
  }
  CHECK(sup <= 4.085);

  OffspringLaw geo{OffspringKind::Geometric, 2.5};
  CHECK(geo.gamma_truncated(1) == doctest::Approx(2.0 + 1.0 / 2.5));
  // b = 2 via the series against a direct finite sum
  double m1 = 0.0, m2 = 0.0;
  const double q = 1.0 / 3.5, th = 1.0 - q;
  double pk = q * th * th;
  for (int k = 2; k < 4000; ++k) {
    m1 += k * pk;
    m2 += double(k) * k * pk;
    pk *= th;
  }
  CHECK(geo.gamma_truncated(2) == doctest::Approx(m2 / (m1 * m1)).epsilon(1e-9));
}

TEST_CASE("environment sampling: log-means and associated walk") {
  const EnvironmentModel model = lattice_hybrid();
  Philox rng(51, 0);
  Environment env = sample_environment(model, 1000, rng);
  double s = 0.0;
  for (std::size_t i = 0; i < env.length(); ++i) {
    CHECK(env.log_means[i] == std::log(env.laws[i].mean));
    s += env.log_means[i];
    CHECK(env.walk[i + 1] == doctest::Approx(s).epsilon(1e-12));
  }
  // empirical law of X over many draws matches the lattice family
  std::size_t up = 0, down = 0, flat = 0;
  const std::size_t n = 100'000;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = model.family.sample_step(rng);
    if (x > 0.5) ++up;
    else if (x < -0.5) ++down;
    else ++flat;
  }
  CHECK(double(up) / n == doctest::Approx(0.3).epsilon(0.02));
  CHECK(double(down) / n == doctest::Approx(0.3).epsilon(0.02));
  CHECK(double(flat) / n == doctest::Approx(0.4).epsilon(0.02));
}

TEST_CASE("branching simulation: conditional mean identity and absorption") {
  const EnvironmentModel model = lattice_hybrid();
  Philox rng(52, 0);
  Environment env = sample_environment(model, 12, rng);
  const std::int64_t z0 = 5;
  const std::size_t reps = 10'000;
  std::vector<double> normalized;
  for (std::size_t i = 0; i < reps; ++i) {
    BpreTrajectory t = simulate_bpre(env, z0, rng);
    normalized.push_back(t.z[12] * std::exp(-env.walk[12]));
    for (std::size_t k = 1; k <= 12; ++k)
      if (t.z[k - 1] == 0.0) CHECK(t.z[k] == 0.0);
  }
  MeanStderr m = mean_stderr(normalized);
  CHECK(std::fabs(m.mean - double(z0)) < 4.0 * m.stderr_);
}

TEST_CASE("single-generation offspring law is exact") {
  Philox rng(53, 0);
  // Poisson(2) generation from one parent
  Environment env;
  env.log_means = {std::log(2.0)};
  env.walk = {0.0, std::log(2.0)};
  env.laws = {{OffspringKind::HybridBernoulliPoisson, 2.0}};
  const std::size_t n = 100'000;
  std::vector<double> counts(16, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    BpreTrajectory t = simulate_bpre(env, 1, rng);
    const std::size_t k = std::min<std::size_t>(15, std::size_t(t.z[1]));
    counts[k] += 1.0;
  }
  double chi2 = 0.0;
  int dof = 0;
  double pk = std::exp(-2.0);
  double tail = n;
  for (int k = 0; k < 15; ++k) {
    const double expect = n * pk;
    if (expect >= 5.0) {
      chi2 += (counts[k] - expect) * (counts[k] - expect) / expect;
      ++dof;
    }
    tail -= expect;
    pk *= 2.0 / (k + 1);
  }
  CHECK(chi_square_sf(chi2, dof - 1) > 0.01);
}

TEST_CASE("survival probability: structure and the Moebius oracle") {
  EnvironmentModel geo{make_lazy_lattice(0.3), OffspringKind::Geometric};
  Philox rng(54, 0);
  Environment env = sample_environment(geo, 400, rng);
  CHECK(survival_prob_given_env(env, 3, 0) == 1.0);
  double prev = 1.0;
  for (std::size_t h : {1u, 5u, 20u, 100u, 400u}) {
    const double s = survival_prob_given_env(env, 1, h);
    CHECK(s <= prev + 1e-15);
    CHECK(s >= 0.0);
    prev = s;
  }
  for (std::size_t h : {1u, 7u, 50u, 211u, 400u}) {
    const double mine = survival_prob_given_env(env, 1, h);
    const double oracle = geometric_survival_oracle(env, h);
    CHECK(mine == doctest::Approx(oracle).epsilon(1e-10));
  }
  // multi-ancestor consistency: 1 - (1-w)^k
  const double w = survival_w_given_env(env, 50);
  CHECK(survival_prob_given_env(env, 4, 50) ==
        doctest::Approx(1.0 - std::pow(1.0 - w, 4)).epsilon(1e-12));
}

TEST_CASE("condition B2 verdicts") {
  B2Report hybrid_lattice =
      check_condition_B2(lattice_hybrid(), 2, 0.5, 60'000);
  CHECK(hybrid_lattice.pass);
  CHECK(hybrid_lattice.gamma_sup <= 4.085);

  EnvironmentModel hybrid_pareto{make_two_sided_pareto(1.5, 0.7),
                                 OffspringKind::HybridBernoulliPoisson};
  B2Report hp = check_condition_B2(hybrid_pareto, 2, 0.5, 60'000);
  CHECK(hp.pass);

  EnvironmentModel geo_gauss{make_gaussian(1.0), OffspringKind::Geometric};
  B2Report gg = check_condition_B2(geo_gauss, 1, 0.5, 60'000);
  CHECK(gg.pass);
  // moment trace stabilizes: last two stages within 15%
  REQUIRE(gg.moments.size() >= 2);
  const double a = gg.moments[gg.moments.size() - 2];
  const double b = gg.moments.back();
  CHECK(std::fabs(b - a) / b < 0.15);

  EnvironmentModel geo_pareto{make_two_sided_pareto(1.5, 0.7),
                              OffspringKind::Geometric};
  B2Report gp = check_condition_B2(geo_pareto, 1, 0.5, 120'000);
  CHECK_FALSE(gp.pass);
  CHECK(gp.moments.back() > 1.2 * gp.moments.front());  // keeps growing
}

TEST_CASE("theta estimator: positivity, truncation monotonicity, stability") {
  const EnvironmentModel model = lattice_hybrid();
  ThetaConfig cfg;
  cfg.J = 16;
  cfg.K = 24;
  cfg.horizon = 1'200;
  cfg.replicas = 40'000;
  cfg.env_samples = 1'200;
  cfg.seed = 55;
  ThetaEstimate full = estimate_theta(model, cfg);
  CHECK(full.value > 0.0);
  CHECK(full.value < 1.0);
  CHECK(full.stderr_ > 0.0);

  // prefix sums over J are nondecreasing by construction
  double acc = 0.0;
  for (double tj : full.theta_j) {
    CHECK(tj >= 0.0);
    acc += tj;
  }
  CHECK(acc == doctest::Approx(full.value).epsilon(1e-9));

  // smaller K with the same seed can only lose mass
  ThetaConfig small_k = cfg;
  small_k.K = 8;
  CHECK(estimate_theta(model, small_k).value <= full.value + 1e-12);

  // longer horizon nests the survival event the other way
  ThetaConfig long_h = cfg;
  long_h.horizon = 2'400;
  ThetaEstimate longer = estimate_theta(model, long_h);
  CHECK(longer.value <=
        full.value + 3.0 * (full.stderr_ + longer.stderr_) + 1e-12);

  // replication across independent seeds
  ThetaConfig other = cfg;
  other.seed = 56;
  ThetaEstimate rep = estimate_theta(model, other);
  CHECK(std::fabs(rep.value - full.value) <
        3.5 * (rep.stderr_ + full.stderr_));

  // weak-minimum convention also works and differs only mildly
  ThetaConfig weak = cfg;
  weak.strict_min = false;
  ThetaEstimate w = estimate_theta(model, weak);
  CHECK(w.value > 0.0);
}

TEST_CASE("importance sampler matches stratum-conditioned brute force") {
  const EnvironmentModel model = lattice_hybrid();
  const std::size_t n = 120, m = 24;
  const double phi = 2.0;
  RegimeConfig rc;
  rc.model = model;
  rc.n = n;
  rc.m = m;
  rc.phi = phi;
  rc.regime = 1;
  rc.sampler = RegimeSampler::EnvImportance;
  rc.target_accepted = 6'000;
  rc.min_accepted = 1'000;
  rc.seed = 57;
  rc.estimate_frequency_prediction = false;
  RegimeReport imp = run_regime_experiment(rc, [](double) { return 0.0; });

  // brute force restricted to the same stratum {L_n >= 0}
  const double a_m = scaling_law(model.family).a(static_cast<double>(m));
  Philox rng(58, 0);
  std::vector<double> stats;
  while (stats.size() < 2'000) {
    Environment env;
    {
      WalkPath p = simulate_path(model.family, n, 0.0, rng);
      if (p.min_from1[n] < 0.0 || p.positions[n] > phi) continue;
      env = environment_from_walk(model, p);
    }
    BpreTrajectory t = simulate_bpre(env, 1, rng);
    if (t.z[n] <= 0.0 || t.saturated) continue;
    stats.push_back(std::log(t.z[n - m]) / a_m);
  }
  EmpiricalCdf brute = empirical_cdf(stats);
  CHECK(ks_between(imp.cdf, brute) < 0.06);
}

TEST_CASE("rescaled population flattens as n grows") {
  const EnvironmentModel model = lattice_hybrid();
  auto iqr_at = [&](std::size_t n, std::uint64_t seed) {
    const std::size_t m = n / 10;
    RegimeConfig rc;
    rc.model = model;
    rc.n = n;
    rc.m = m;
    rc.phi = 2.0;
    rc.regime = 1;
    rc.sampler = RegimeSampler::EnvImportance;
    rc.target_accepted = 3'000;
    rc.min_accepted = 500;
    rc.seed = seed;
    rc.estimate_frequency_prediction = false;
    // ratio Zhat(n-m)/Zhat(n-2m) under the conditioned law
    ConditionKernel kernel(model.family, n, 0);
    Philox rng(seed, 0);
    std::vector<double> ratios;
    std::vector<double> weights;
    while (ratios.size() < rc.target_accepted) {
      const std::int64_t y = kernel.sample_endpoint_at_most(2, rng);
      WalkPath path = kernel.sample_bridge(y, rng);
      Environment env = environment_from_walk(model, path);
      const double h = survival_prob_given_env(env, 1, n);
      if (h <= 0.0) continue;
      for (int attempt = 0; attempt < 64; ++attempt) {
        BpreTrajectory t = simulate_bpre(env, 1, rng);
        if (t.z[n] <= 0.0) continue;
        if (!t.saturated && t.z[n - 2 * m] > 0.0) {
          ratios.push_back(t.zhat(env, n - m) / t.zhat(env, n - 2 * m));
          weights.push_back(h);
        }
        break;
      }
    }
    EmpiricalCdf cdf = empirical_cdf(ratios, weights);
    auto quantile = [&](double q) {
      for (std::size_t i = 0; i < cdf.points.size(); ++i)
        if (cdf.cdf[i] >= q) return cdf.points[i];
      return cdf.points.back();
    };
    return quantile(0.75) - quantile(0.25);
  };
  const double iqr200 = iqr_at(200, 59);
  const double iqr600 = iqr_at(600, 60);
  CHECK(iqr600 < iqr200);
}

TEST_CASE("conditional-expectation pieces are ordered and bounded") {
  const EnvironmentModel model = lattice_hybrid();
  ConditionKernel kernel(model.family, 160, 0);
  Philox rng(61, 0);
  const double a_m = scaling_law(model.family).a(32.0);
  double h_and_event = 0.0, event_only = 0.0;
  const std::size_t reps = 4'000;
  for (std::size_t i = 0; i < reps; ++i) {
    const std::int64_t y = kernel.sample_endpoint_at_most(2, rng);
    WalkPath path = kernel.sample_bridge(y, rng);
    Environment env = environment_from_walk(model, path);
    const double h = survival_prob_given_env(env, 1, 160);
    CHECK(h >= 0.0);
    CHECK(h <= 1.0);
    const bool ev = path.positions[160 - 32] <= a_m;
    if (ev) {
      h_and_event += h;
      event_only += 1.0;
    }
  }
  CHECK(h_and_event <= event_only);  // H_n <= 1 forces the domination
}
