#include "walklab/regime.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "walklab/errors.hpp"
#include "walklab/renewal.hpp"

namespace walklab {

namespace {

void validate_regime_window(const RegimeConfig& cfg, double a_m, double a_n) {
  if (cfg.m > cfg.n / 5)
    throw RegimeMismatch("m must satisfy m <= n/5");
  switch (cfg.regime) {
    case 1:
      if (cfg.phi > 0.55 * a_m)
        throw RegimeMismatch("regime 1 needs phi = o(a_m); phi <= a_m/2");
      break;
    case 2:
      if (cfg.phi < 0.25 * a_m || cfg.phi > 4.0 * a_m)
        throw RegimeMismatch("regime 2 needs phi comparable to a_m");
      break;
    case 3:
      if (cfg.phi < 2.5 * a_m || cfg.phi > 0.8 * a_n)
        throw RegimeMismatch("regime 3 needs a_m = o(phi), phi = o(a_n)");
      break;
    default:
      throw InvalidConfig("regime must be 1, 2 or 3");
  }
}

struct EventSample {
  double statistic = 0.0;
  double weight = 1.0;
  bool saturated = false;
};

double regime_statistic(const RegimeConfig& cfg, const Environment& env,
                        const BpreTrajectory& traj, double a_m) {
  const std::size_t idx = cfg.n - cfg.m;
  const double logz = std::log(traj.z[idx]);
  if (cfg.regime == 3) return (logz - env.walk[cfg.n]) / a_m;
  return logz / a_m;
}

}  // namespace

RegimeReport run_regime_experiment(
    const RegimeConfig& cfg, const std::function<double(double)>& reference) {
  const ScalingLaw sc = scaling_law(cfg.model.family);
  const double a_m = sc.a(static_cast<double>(cfg.m));
  const double a_n = sc.a(static_cast<double>(cfg.n));
  validate_regime_window(cfg, a_m, a_n);

  RegimeReport rep;
  rep.model = cfg.model.describe();
  rep.n = cfg.n;
  rep.m = cfg.m;
  rep.regime = cfg.regime;
  rep.phi = cfg.phi;
  rep.a_m = a_m;
  rep.sampler = cfg.sampler == RegimeSampler::BruteForce ? "brute_force"
                                                         : "env_importance";

  std::vector<double> stats, weights;
  double h_sum = 0.0;
  std::size_t h_count = 0;

  if (cfg.sampler == RegimeSampler::BruteForce) {
    Philox rng(cfg.seed, cfg.stream_base);
    std::size_t attempts = 0;
    while (stats.size() < cfg.target_accepted &&
           attempts < cfg.max_replicas) {
      ++attempts;
      Environment env = sample_environment(cfg.model, cfg.n, rng);
      if (env.walk[cfg.n] > cfg.phi) continue;
      BpreTrajectory traj = simulate_bpre(env, cfg.z0, rng);
      if (traj.z[cfg.n] <= 0.0) continue;
      if (traj.saturated) {
        ++rep.saturated_excluded;  // counts as survived, excluded from stats
        continue;
      }
      stats.push_back(regime_statistic(cfg, env, traj, a_m));
      weights.push_back(1.0);
    }
    rep.attempted = attempts;
    rep.event_freq = static_cast<double>(stats.size() +
                                         rep.saturated_excluded) /
                     static_cast<double>(attempts);
    rep.event_freq_stderr =
        std::sqrt(rep.event_freq * (1.0 - rep.event_freq) /
                  static_cast<double>(attempts));
  } else {
    if (cfg.model.family.kind != FamilyKind::LazyLattice)
      throw BadFamilyParams("env_importance needs the lattice environment");
    const auto phi_floor = static_cast<std::int64_t>(std::floor(cfg.phi));
    ConditionKernel kernel(cfg.model.family, cfg.n, 0);
    const double p_q = kernel.mass_at_most(cfg.n, phi_floor);
    Philox rng(cfg.seed, cfg.stream_base);
    std::size_t draws = 0;
    while (stats.size() < cfg.target_accepted && draws < cfg.max_replicas) {
      ++draws;
      const std::int64_t y = kernel.sample_endpoint_at_most(phi_floor, rng);
      WalkPath path = kernel.sample_bridge(y, rng);
      Environment env = environment_from_walk(cfg.model, path);
      const double h = survival_prob_given_env(env, cfg.z0, cfg.n);
      h_sum += h;
      ++h_count;
      if (h <= 0.0) continue;
      // Conditional Z | {Z_n > 0} by retry; the acceptance-probability
      // correction keeps dropped environments from biasing the average.
      for (std::size_t attempt = 0; attempt < cfg.retry_cap; ++attempt) {
        BpreTrajectory traj = simulate_bpre(env, cfg.z0, rng);
        if (traj.z[cfg.n] <= 0.0) continue;
        const double accept_p = -std::expm1(
            static_cast<double>(cfg.retry_cap) * std::log1p(-std::min(h, 1.0 - 1e-16)));
        const double w = h / accept_p;
        if (traj.saturated) {
          ++rep.saturated_excluded;
        } else {
          stats.push_back(regime_statistic(cfg, env, traj, a_m));
          weights.push_back(w);
        }
        break;
      }
    }
    rep.attempted = draws;
    const double h_mean = h_sum / static_cast<double>(h_count);
    rep.stratum0_freq = p_q * h_mean;  // tau_n = 0 stratum mass
    rep.event_freq = rep.stratum0_freq;
    rep.event_freq_stderr =
        p_q * std::sqrt(h_mean * (1.0 - h_mean) /
                        static_cast<double>(h_count));
  }

  if (stats.size() < cfg.min_accepted)
    throw TooFewAccepted("accepted " + std::to_string(stats.size()) +
                         " < floor " + std::to_string(cfg.min_accepted));
  rep.accepted = stats.size();
  rep.statistic = stats;
  rep.weight = weights;
  rep.cdf = empirical_cdf(stats, weights);
  rep.ks = ks_statistic(rep.cdf, reference);
  rep.ref_at_points.reserve(rep.cdf.points.size());
  for (double x : rep.cdf.points) rep.ref_at_points.push_back(reference(x));

  if (cfg.estimate_frequency_prediction &&
      cfg.sampler == RegimeSampler::EnvImportance) {
    // The importance path only covers the tau_n = 0 stratum; the factor-2
    // frequency comparison wants the full event, measured without bias.
    EventFrequency ef =
        measure_event_frequency(cfg.model, cfg.n, cfg.phi, cfg.freq_attempts,
                                cfg.seed ^ 0xF4E9, cfg.z0, cfg.threads);
    rep.event_freq = ef.freq;
    rep.event_freq_stderr = ef.stderr_;
    rep.residual_measured =
        ef.freq > 0.0 ? std::max(0.0, 1.0 - rep.stratum0_freq / ef.freq)
                      : 0.0;
  }
  if (cfg.estimate_frequency_prediction) {
    ThetaConfig tc = cfg.theta;
    tc.z0 = cfg.z0;
    ThetaEstimate theta = estimate_theta(cfg.model, tc);
    rep.theta_value = theta.value;
    rep.theta_stderr = theta.stderr_;
    // residual strata tau_n > 0, as a fraction of Theta
    rep.residual_fraction =
        theta.value > 0.0 ? 1.0 - theta.theta_j[0] / theta.value : 0.0;
    ConditionKernel kernel(cfg.model.family, cfg.n, 0);
    const double p_q = kernel.mass_at_most(
        cfg.n, static_cast<std::int64_t>(std::floor(cfg.phi)));
    rep.predicted_freq = theta.value * p_q;
    const RenewalTable vplus = exact_renewal_lazy(
        cfg.model.family, RenewalKind::Vplus, {0.0, cfg.phi + 1.0});
    double sum_v = 0.0;
    for (std::int64_t j = 0; j <= static_cast<std::int64_t>(cfg.phi); ++j)
      sum_v += vplus.eval(static_cast<double>(j));
    rep.predicted_freq_display =
        theta.value * sc.b(static_cast<double>(cfg.n)) * sum_v;
    rep.freq_ratio =
        rep.predicted_freq > 0.0 ? rep.event_freq / rep.predicted_freq : 0.0;
  }
  return rep;
}

RegimeReport small_deviation_experiment(const RegimeConfig& cfg) {
  const ScalingLaw sc = scaling_law(cfg.model.family);
  const double a_n = sc.a(static_cast<double>(cfg.n));
  if (cfg.phi > 0.25 * a_n + 1e-9)
    throw RegimeMismatch("small deviations need phi <= a_n/4");
  const double ar = cfg.model.family.stable_target.alpha *
                    cfg.model.family.stable_target.rho;
  auto reference = [ar](double y) {
    if (y <= 0.0) return 0.0;
    if (y >= 1.0) return 1.0;
    return std::pow(y, ar + 1.0);
  };

  const double phi = cfg.phi;

  RegimeReport rep;
  rep.model = cfg.model.describe();
  rep.n = cfg.n;
  rep.m = 0;
  rep.regime = 0;  // marks the small-deviation statistic
  rep.phi = phi;
  rep.a_m = sc.a(static_cast<double>(std::max<std::size_t>(cfg.m, 1)));
  rep.sampler = cfg.sampler == RegimeSampler::BruteForce ? "brute_force"
                                                         : "env_importance";

  std::vector<double> stats, weights;
  double h_sum = 0.0;
  std::size_t h_count = 0;
  if (cfg.sampler == RegimeSampler::BruteForce) {
    Philox rng(cfg.seed, cfg.stream_base);
    std::size_t attempts = 0;
    while (stats.size() < cfg.target_accepted && attempts < cfg.max_replicas) {
      ++attempts;
      Environment env = sample_environment(cfg.model, cfg.n, rng);
      if (env.walk[cfg.n] > phi) continue;
      BpreTrajectory traj = simulate_bpre(env, cfg.z0, rng);
      if (traj.z[cfg.n] <= 0.0) continue;
      if (traj.saturated) {
        ++rep.saturated_excluded;
        continue;
      }
      stats.push_back(std::log(traj.z[cfg.n]) / phi);
      weights.push_back(1.0);
    }
    rep.attempted = attempts;
    rep.event_freq =
        static_cast<double>(stats.size() + rep.saturated_excluded) /
        static_cast<double>(attempts);
  } else {
    if (cfg.model.family.kind != FamilyKind::LazyLattice)
      throw BadFamilyParams("env_importance needs the lattice environment");
    ConditionKernel kernel(cfg.model.family, cfg.n, 0);
    const auto phi_floor = static_cast<std::int64_t>(std::floor(phi));
    const double p_q = kernel.mass_at_most(cfg.n, phi_floor);
    Philox rng(cfg.seed, cfg.stream_base);
    std::size_t draws = 0;
    while (stats.size() < cfg.target_accepted && draws < cfg.max_replicas) {
      ++draws;
      const std::int64_t y = kernel.sample_endpoint_at_most(phi_floor, rng);
      WalkPath path = kernel.sample_bridge(y, rng);
      Environment env = environment_from_walk(cfg.model, path);
      const double h = survival_prob_given_env(env, cfg.z0, cfg.n);
      h_sum += h;
      ++h_count;
      if (h <= 0.0) continue;
      for (std::size_t attempt = 0; attempt < cfg.retry_cap; ++attempt) {
        BpreTrajectory traj = simulate_bpre(env, cfg.z0, rng);
        if (traj.z[cfg.n] <= 0.0) continue;
        const double accept_p = -std::expm1(
            static_cast<double>(cfg.retry_cap) *
            std::log1p(-std::min(h, 1.0 - 1e-16)));
        if (traj.saturated) {
          ++rep.saturated_excluded;
        } else {
          stats.push_back(std::log(traj.z[cfg.n]) / phi);
          weights.push_back(h / accept_p);
        }
        break;
      }
    }
    rep.attempted = draws;
    const double h_mean = h_sum / static_cast<double>(h_count);
    rep.event_freq = p_q * h_mean;
  }
  if (stats.size() < cfg.min_accepted)
    throw TooFewAccepted("accepted " + std::to_string(stats.size()) +
                         " < floor " + std::to_string(cfg.min_accepted));
  rep.accepted = stats.size();
  rep.statistic = stats;
  rep.weight = weights;
  rep.cdf = empirical_cdf(stats, weights);
  rep.ks = ks_statistic(rep.cdf, reference);
  for (double x : rep.cdf.points) rep.ref_at_points.push_back(reference(x));
  return rep;
}

EventFrequency measure_event_frequency(const EnvironmentModel& model,
                                       std::size_t n, double phi,
                                       std::size_t attempts,
                                       std::uint64_t seed, std::int64_t z0,
                                       std::size_t threads) {
  threads = std::max<std::size_t>(1, threads);
  std::vector<std::size_t> hits(threads, 0);
  const std::size_t per = attempts / threads;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      Philox rng(seed, (w + 1) * (1ull << 40));
      for (std::size_t i = 0; i < per; ++i) {
        double s = 0.0;
        double z = static_cast<double>(z0);
        bool saturated = false;
        bool alive = true;
        for (std::size_t k = 0; k < n; ++k) {
          const double x = model.family.sample_step(rng);
          s += x;
          if (saturated) continue;
          OffspringLaw law{model.offspring, std::exp(x)};
          if (z >= kPopulationCap || z * law.mean >= 2.0 * kPopulationCap) {
            saturated = true;  // counts as surviving from here on
            continue;
          }
          z = static_cast<double>(
              law.total_offspring(rng, static_cast<std::int64_t>(z)));
          if (z <= 0.0) {
            alive = false;
            break;
          }
        }
        if (alive && s <= phi) ++hits[w];
      }
    });
  }
  for (auto& th : pool) th.join();
  EventFrequency out;
  out.attempts = per * threads;
  for (std::size_t h : hits) out.hits += h;
  out.freq = static_cast<double>(out.hits) / out.attempts;
  out.stderr_ = std::sqrt(out.freq * (1.0 - out.freq) / out.attempts);
  return out;
}

TcondReport verify_Tcond(const TcondConfig& cfg, const LimitLawEval& laws) {
  if (cfg.model.family.kind != FamilyKind::LazyLattice)
    throw BadFamilyParams("Tcond verification needs the lattice environment");
  const ScalingLaw sc = scaling_law(cfg.model.family);
  const double a_m = sc.a(static_cast<double>(cfg.m));
  if (cfg.phi > 0.55 * a_m)
    throw RegimeMismatch("Tcond instance needs the regime-1 window");

  TcondReport rep;
  ConditionKernel kernel(cfg.model.family, cfg.n, 0);
  const auto phi_floor = static_cast<std::int64_t>(std::floor(cfg.phi));
  Philox rng(cfg.seed, cfg.stream_base);
  std::vector<double> terms;
  terms.reserve(cfg.env_draws);
  const double z_cut = cfg.z * a_m;
  for (std::size_t i = 0; i < cfg.env_draws; ++i) {
    const std::int64_t y = kernel.sample_endpoint_at_most(phi_floor, rng);
    WalkPath path = kernel.sample_bridge(y, rng);
    Environment env = environment_from_walk(cfg.model, path);
    const double h = survival_prob_given_env(env, cfg.k, cfg.n);
    terms.push_back(path.positions[cfg.n - cfg.m] <= z_cut ? h : 0.0);
  }
  MeanStderr lhs = mean_stderr(terms);
  rep.lhs = lhs.mean;
  rep.lhs_stderr = lhs.stderr_;
  rep.env_draws = cfg.env_draws;

  // E_0^[H_inf] from h-transformed environments with survival to a long
  // horizon; the horizon-doubling delta is the reported truncation error.
  const std::size_t horizon = cfg.horizon_factor * cfg.n;
  const RenewalTable vminus = exact_renewal_lazy(
      cfg.model.family, RenewalKind::Vminus,
      {0.0, 16.0, 64.0, 256.0, 1024.0});
  std::vector<double> hs, hs_half, ws;
  Philox rng2(cfg.seed, cfg.stream_base + 1'000'000);
  for (std::size_t i = 0; i < cfg.h_env_samples; ++i) {
    WeightedPath wp =
        sample_h_transform(cfg.model.family, horizon, 0.0, vminus, rng2);
    Environment env = environment_from_walk(cfg.model, wp.path);
    hs.push_back(survival_prob_given_env(env, cfg.k, horizon));
    hs_half.push_back(survival_prob_given_env(env, cfg.k, horizon / 2));
    ws.push_back(wp.weight);
  }
  MeanStderr hinf = weighted_mean_stderr(hs, ws);
  MeanStderr hinf_half = weighted_mean_stderr(hs_half, ws);
  rep.h_inf = hinf.mean;
  rep.h_inf_stderr = hinf.stderr_;
  rep.horizon_doubling_delta = std::fabs(hinf_half.mean - hinf.mean);
  rep.a1_z = laws.A1(cfg.z);
  rep.rhs = rep.a1_z * rep.h_inf;
  rep.rhs_stderr = rep.a1_z * rep.h_inf_stderr;
  return rep;
}

}  // namespace walklab
