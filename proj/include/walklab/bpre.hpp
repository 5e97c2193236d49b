#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "walklab/kernel.hpp"
#include "walklab/walk.hpp"

namespace walklab {

enum class OffspringKind {
  HybridBernoulliPoisson,  // Bernoulli(M) for M < 1, Poisson(M) for M >= 1
  Geometric,               // P(k) = q (1-q)^k with q = 1/(1+M)
};

// One generation's reproduction law, parameterized by its mean M = f'(1).
struct OffspringLaw {
  OffspringKind kind = OffspringKind::HybridBernoulliPoisson;
  double mean = 1.0;

  bool poisson_branch() const {
    return kind == OffspringKind::HybridBernoulliPoisson && mean >= 1.0;
  }
  double pgf(double s) const;
  // 1 - f(1 - w); iterating this keeps tiny survival masses accurate.
  double survival_transform(double w) const;
  // gamma(b) = sum_{k>=b} k^2 f_k / (sum_{k>=b} k f_k)^2; 0/0 reads as 0.
  double gamma_truncated(int b) const;
  // Sum of `parents` iid offspring draws in O(1).
  std::int64_t total_offspring(Philox& rng, std::int64_t parents) const;
};

struct EnvironmentModel {
  IncrementFamily family;  // law of X = log f'(1)
  OffspringKind offspring = OffspringKind::HybridBernoulliPoisson;
  std::string describe() const;
};

struct Environment {
  std::vector<double> log_means;  // X_1..X_n
  std::vector<double> walk;       // S_0..S_n (associated walk)
  std::vector<OffspringLaw> laws; // f_1..f_n

  std::size_t length() const { return log_means.size(); }
};

Environment sample_environment(const EnvironmentModel& model, std::size_t n,
                               Philox& rng);
// Attach offspring laws to an already-sampled associated walk (used by the
// conditioned-environment samplers).
Environment environment_from_walk(const EnvironmentModel& model,
                                  const WalkPath& path);

constexpr double kPopulationCap = 1e12;

struct BpreTrajectory {
  std::vector<double> z;  // Z_0..Z_n (integer-valued, double for the cap)
  bool saturated = false;
  std::size_t saturated_at = 0;

  double zhat(const Environment& env, std::size_t k) const;  // e^{-S_k} Z_k
};

BpreTrajectory simulate_bpre(const Environment& env, std::int64_t z0,
                             Philox& rng, double cap = kPopulationCap);

// P(Z_horizon > 0 | E, Z_0 = z0) by exact backward pgf composition.
double survival_prob_given_env(const Environment& env, std::int64_t z0,
                               std::size_t horizon);
// The complementary extinction mass w with survival(z0) = 1 - (1-w)^{z0}.
double survival_w_given_env(const Environment& env, std::size_t horizon);

struct B2Report {
  bool pass = false;
  std::string verdict_reason;
  double gamma_sup = 0.0;       // max gamma(b) over sampled environments
  std::vector<double> moments;  // empirical E[(log+ gamma)^{alpha+eps}] per
                                // doubling budget stage
  double eps = 0.0;
  int b = 0;
};

// Checks the truncated-moment condition: analytic verdict for the known
// families plus the empirical moment trace across doubling budgets.
B2Report check_condition_B2(const EnvironmentModel& model, int b, double eps,
                            std::size_t budget, std::uint64_t seed = 0xB2);

struct ThetaConfig {
  std::size_t J = 24;           // outer stratum truncation
  std::int64_t K = 40;          // population truncation
  std::size_t horizon = 3'000;  // ultimate-survival proxy
  std::size_t replicas = 120'000;
  std::size_t env_samples = 3'000;  // conditioned environments per group
  std::uint64_t seed = 0x7E7A;
  std::uint64_t stream_base = 0;
  std::size_t groups = 8;  // replication groups for the error bar
  bool strict_min = true;  // tau_j = j read as first strict attainment
  std::int64_t z0 = 1;
};

struct ThetaEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  std::vector<double> theta_j;       // per-stratum contributions
  std::vector<double> survival_up;   // Hinf(k) estimates, k = 1..K
  double horizon_doubling_delta = 0.0;
};

ThetaEstimate estimate_theta(const EnvironmentModel& model,
                             const ThetaConfig& cfg);

}  // namespace walklab
