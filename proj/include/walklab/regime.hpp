#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "walklab/bpre.hpp"
#include "walklab/limit_laws.hpp"
#include "walklab/stats.hpp"

namespace walklab {

enum class RegimeSampler { BruteForce, EnvImportance };

struct RegimeConfig {
  EnvironmentModel model;
  std::size_t n = 300;
  std::size_t m = 30;
  double phi = 2.0;       // the conditioning level phi(n)
  int regime = 1;         // 1: phi = o(a_m); 2: phi ~ T a_m; 3: a_m = o(phi)
  RegimeSampler sampler = RegimeSampler::EnvImportance;
  std::size_t target_accepted = 2'000;
  std::size_t max_replicas = 50'000'000;
  std::size_t retry_cap = 64;  // conditional Z draws per environment
  std::int64_t z0 = 1;
  std::uint64_t seed = 0x4E61;
  std::uint64_t stream_base = 0;
  std::size_t min_accepted = 200;
  bool estimate_frequency_prediction = true;
  std::size_t freq_attempts = 4'000'000;  // brute-force frequency budget
  std::size_t threads = 2;
  ThetaConfig theta;  // used when the prediction is requested
};

struct RegimeReport {
  // config echo
  std::string model;
  std::size_t n = 0, m = 0;
  int regime = 0;
  double phi = 0.0;
  double a_m = 0.0;
  std::string sampler;

  std::size_t accepted = 0;
  std::size_t attempted = 0;
  std::size_t saturated_excluded = 0;
  std::vector<double> statistic;
  std::vector<double> weight;
  EmpiricalCdf cdf;
  std::vector<double> ref_at_points;  // reference CDF on cdf.points
  double ks = 0.0;

  double event_freq = 0.0;         // estimated P(S_n <= phi, Z_n > 0)
  double event_freq_stderr = 0.0;
  double stratum0_freq = 0.0;      // mass of the tau_n = 0 stratum
  double theta_value = 0.0;
  double theta_stderr = 0.0;
  double predicted_freq = 0.0;          // Theta * P(L_n >= 0, S_n <= phi)
  double predicted_freq_display = 0.0;  // Theta * b_n * sum_{j<=phi} V+(j)
  double freq_ratio = 0.0;              // event_freq / predicted_freq
  double residual_fraction = 0.0;       // asymptotic strata split from Theta
  double residual_measured = 0.0;       // 1 - stratum0 / measured frequency
};

// Conditional law of (log Z_{n-m})/a_m (regimes 1-2) or
// (log Z_{n-m} - S_n)/a_m (regime 3) given {S_n <= phi(n), Z_n > 0},
// with the reference law supplied by the caller.
RegimeReport run_regime_experiment(
    const RegimeConfig& cfg, const std::function<double(double)>& reference);

// Conditional law of (log Z_n)/phi(n) given the same event; reference
// y^{alpha rho + 1} clipped to [0,1].
RegimeReport small_deviation_experiment(const RegimeConfig& cfg);

struct EventFrequency {
  double freq = 0.0;
  double stderr_ = 0.0;
  std::size_t attempts = 0;
  std::size_t hits = 0;
};

// Unbiased P(S_n <= phi, Z_n > 0) by joint unconditioned simulation with
// early abort at extinction.
EventFrequency measure_event_frequency(const EnvironmentModel& model,
                                       std::size_t n, double phi,
                                       std::size_t attempts,
                                       std::uint64_t seed,
                                       std::int64_t z0 = 1,
                                       std::size_t threads = 2);

struct TcondConfig {
  EnvironmentModel model;
  std::size_t n = 400;
  std::size_t m = 40;
  double phi = 2.0;
  double z = 1.0;
  std::int64_t k = 1;
  std::size_t env_draws = 60'000;      // conditioned-kernel draws for the lhs
  std::size_t h_env_samples = 20'000;  // h-transform draws for E^[Hinf]
  std::size_t horizon_factor = 10;     // ultimate-survival proxy horizon
  std::uint64_t seed = 0x7C0D;
  std::uint64_t stream_base = 0;
};

struct TcondReport {
  double lhs = 0.0, lhs_stderr = 0.0;
  double a1_z = 0.0;
  double h_inf = 0.0, h_inf_stderr = 0.0;
  double rhs = 0.0, rhs_stderr = 0.0;
  double horizon_doubling_delta = 0.0;
  std::size_t env_draws = 0;
};

// lhs = E[H_n; S_{n-m} <= z a_m | S_n <= phi, L_n >= 0] with
// H_n = P(Z_n > 0 | E, Z_0 = k); rhs = A1(z) * E_0^[H_inf].
TcondReport verify_Tcond(const TcondConfig& cfg, const LimitLawEval& laws);

}  // namespace walklab
