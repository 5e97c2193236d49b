#include "walklab/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <ostream>
#include <sstream>
#include <thread>

#include "walklab/experiment.hpp"

namespace walklab {

namespace {

struct Ctx {
  AcceptanceOptions opt;
  CanonicalTables tables;
  ZetaEstimate zeta;
  std::vector<double> tau_plus_tail;  // exact P(tau_1^+ > n)
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(5);
  os << v;
  return os.str();
}

using Metric = std::pair<std::string, bool>;

CriterionResult finish(int id, const std::string& name,
                       const std::vector<Metric>& metrics, double seconds,
                       std::ostream& out) {
  CriterionResult r;
  r.id = id;
  r.name = name;
  r.seconds = seconds;
  r.pass = true;
  for (const auto& [line, ok] : metrics) {
    r.pass = r.pass && ok;
    r.details.push_back((ok ? "ok: " : "FAIL: ") + line);
  }
  out << (r.pass ? "[PASS]" : "[FAIL]") << " criterion " << id << ": " << name
      << "  (" << fmt(seconds) << "s)\n";
  for (const auto& d : r.details) out << "       " << d << "\n";
  out.flush();
  return r;
}

// ---- criterion 1: the C* identity ---------------------------------------

CriterionResult criterion1(Ctx& ctx, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& f = ctx.tables.family;
  const ScalingLaw sc = scaling_law(f);
  const RenewalTable vplus = exact_renewal_lazy(
      f, RenewalKind::Vplus, {0.0, sc.a(1e3), sc.a(1e4), 2.0 * sc.a(1e4)});
  const double ladder_1e3 = ctx.tau_plus_tail[1000] * vplus.eval(sc.a(1e3));
  const double ladder_1e4 = ctx.tau_plus_tail[10000] * vplus.eval(sc.a(1e4));
  const double ar = ctx.tables.laws->alpha_rho();
  const double integral = ctx.tables.meander_minus->moment(ar);
  const double c_meander = 1.0 / integral;
  const double gap3 = std::fabs(ladder_1e3 - c_meander) / c_meander;
  const double gap4 = std::fabs(ladder_1e4 - c_meander) / c_meander;
  const double identity = std::fabs(ladder_1e4 * integral - 1.0);
  std::vector<Metric> m = {
      {"ladder route n=1e3: " + fmt(ladder_1e3) + " vs meander route " +
           fmt(c_meander) + " (rel gap " + fmt(gap3) + " <= 0.10)",
       gap3 <= 0.10},
      {"ladder route n=1e4: " + fmt(ladder_1e4) + " (rel gap " + fmt(gap4) +
           " <= 0.10)",
       gap4 <= 0.10},
      {"C* x integral w^{ar} g-(w) dw = " + fmt(ladder_1e4 * integral) +
           " within 0.1 of 1",
       identity <= 0.10}};
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return finish(1, "C* two-route identity (ladder product vs meander moment)",
                m, secs, out);
}

// ---- criterion 2: Brownian closed forms ----------------------------------

CriterionResult criterion2(Ctx& ctx, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& gplus = *ctx.tables.meander_plus;
  double ray_sup = 0.0;
  for (std::size_t i = 0; i < gplus.grid.size(); ++i) {
    const double w = gplus.grid[i];
    if (w < 0.1 || w > 3.0) continue;
    ray_sup = std::max(ray_sup,
                       std::fabs(gplus.value[i] - brownian_meander_density(w)));
  }
  double bridge_sup = 0.0;
  for (double a : {0.5, 1.0, 2.0})
    for (double b : {0.5, 1.0, 2.0})
      bridge_sup = std::max(
          bridge_sup, std::fabs(ctx.tables.bridge->eval(a, b) -
                                brownian_bridge_positivity(a, b)));
  const double target = std::sqrt(2.0 / M_PI);
  const double c_l = ctx.tables.constants.c_star_ladder.value;
  const double c_m = ctx.tables.constants.c_star_meander.value;
  const double dl = std::fabs(c_l - target) / target;
  const double dm = std::fabs(c_m - target) / target;
  std::vector<Metric> m = {
      {"g+ vs Rayleigh sup on [0.1,3]: " + fmt(ray_sup) + " <= 0.05",
       ray_sup <= 0.05},
      {"C(a,b) vs 1-exp(-2ab), 9 points: sup " + fmt(bridge_sup) + " <= 0.05",
       bridge_sup <= 0.05},
      {"C* ladder " + fmt(c_l) + " within 10% of sqrt(2/pi)", dl <= 0.10},
      {"C* meander " + fmt(c_m) + " within 10% of sqrt(2/pi)", dm <= 0.10}};
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return finish(2, "Brownian closed-form suite (Rayleigh meander, bridge, C*)",
                m, secs, out);
}

// ---- criterion 3: local limit at the origin ------------------------------

CriterionResult criterion3(Ctx& ctx, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& f = ctx.tables.family;
  const std::size_t n = 2000;
  ConditionKernel kernel(f, n, 0);
  const double q00 = kernel.q(n, 0);
  const ScalingLaw sc = scaling_law(f);
  const double pred = (1.0 - (1.0 - f.p)) /* 1 - zeta = p */ *
                      (*ctx.tables.density)(0.0) *
                      sc.b(static_cast<double>(n)) *
                      ctx.tables.vminus->eval(0.0) *
                      ctx.tables.vplus->eval(0.0);
  const double ratio = q00 / pred;
  std::vector<Metric> m = {
      {"q_2000(0,0) = " + fmt(q00) + ", prediction " + fmt(pred) +
           ", ratio " + fmt(ratio) + " within [0.85, 1.15]",
       ratio >= 0.85 && ratio <= 1.15}};
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return finish(3, "local limit at the origin vs exact kernel", m, secs, out);
}

// ---- criterion 4: the three regimes on exact kernels ---------------------

CriterionResult criterion4(Ctx& ctx, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& f = ctx.tables.family;
  const std::size_t N = 2000, m_steps = 100;
  const double a_m = scaling_law(f).a(static_cast<double>(m_steps));
  std::vector<Metric> metrics;

  // regime 1: y = 3 = o(a_m)
  double worst1 = 0.0;
  for (double z : {0.5, 1.0, 2.0}) {
    const double dp =
        conditional_cdf_left_vicinity(f, N, m_steps, 3, z * a_m);
    const double ref = ctx.tables.laws->A1(z);
    worst1 = std::max(worst1, std::fabs(dp - ref));
  }
  metrics.push_back({"regime 1 (y=3): sup |DP - A1| over z in {0.5,1,2} = " +
                         fmt(worst1) + " <= 0.05",
                     worst1 <= 0.05});

  // regime 2: y = ceil(a_m), compared against B(z, 1)
  const auto y2 = static_cast<std::int64_t>(std::ceil(a_m));
  double worst2 = 0.0;
  for (double z : {0.5, 1.0, 2.0}) {
    const double dp =
        conditional_cdf_left_vicinity(f, N, m_steps, y2, z * a_m);
    const double ref = ctx.tables.laws->B(z, 1.0);
    worst2 = std::max(worst2, std::fabs(dp - ref));
  }
  metrics.push_back({"regime 2 (y=" + std::to_string(y2) +
                         "): sup |DP - B(.,1)| = " + fmt(worst2) + " <= 0.07",
                     worst2 <= 0.07});

  // regime 3: y = ceil(4 a_m), statistic (S_{N-m} - S_N)/a_m
  const auto y3 = static_cast<std::int64_t>(std::ceil(4.0 * a_m));
  double worst3 = 0.0, worst3_exact_end = 0.0;
  for (double z : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    const double dp = conditional_cdf_decrement(f, N, m_steps, y3, z * a_m);
    const double ref = stable_cdf(f.stable_target, z, 1e-8);
    worst3 = std::max(worst3, std::fabs(dp - ref));
    worst3_exact_end = std::max(
        worst3_exact_end,
        std::fabs(conditional_cdf_decrement_pinned(f, N, m_steps, y3,
                                                   z * a_m) -
                  ref));
  }
  metrics.push_back({"regime 3 (y=" + std::to_string(y3) +
                         ", endpoint <= y): sup |DP - stable cdf| = " +
                         fmt(worst3) + " <= 0.05",
                     worst3 <= 0.05});
  metrics.push_back(
      {"regime 3 diagnostic (endpoint = y, pinned-bridge form): sup = " +
           fmt(worst3_exact_end) +
           " -- the <= y form at this desk scale sits outside the a_m = "
           "o(y) window; see the analysis notes",
       true});
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return finish(4, "three-regime conditional laws on exact kernels (N=2000)",
                metrics, secs, out);
}

// ---- criterion 5: absolutely continuous analogue -------------------------

CriterionResult criterion5(Ctx& ctx, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const IncrementFamily gauss = make_gaussian(1.0);
  const std::size_t N = 1000, m_steps = 50;
  const double y = 1.5;
  const std::size_t target = static_cast<std::size_t>(
      std::max(5000.0, 5000.0 * ctx.opt.budget_scale));
  const double a_m = scaling_law(gauss).a(static_cast<double>(m_steps));

  const std::size_t threads = std::max<std::size_t>(1, ctx.opt.threads);
  std::vector<std::vector<double>> chunks(threads);
  const std::size_t quota = (target + threads - 1) / threads;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      Philox rng(ctx.opt.seed, 0xC5000 + w);
      auto& acc = chunks[w];
      while (acc.size() < quota) {
        double s = 0.0;
        bool alive = true;
        double s_nm = 0.0;
        for (std::size_t k = 1; k <= N; ++k) {
          s += gauss.sample_step(rng);
          if (s < 0.0) {
            alive = false;
            break;
          }
          if (k == N - m_steps) s_nm = s;
        }
        if (!alive || s > y) continue;
        acc.push_back(s_nm / a_m);
      }
    });
  }
  for (auto& th : pool) th.join();
  std::vector<double> sample;
  for (auto& c : chunks) sample.insert(sample.end(), c.begin(), c.end());
  EmpiricalCdf ecdf = empirical_cdf(sample);
  const double ks = ks_statistic(
      ecdf, [&](double z) { return ctx.tables.laws->A1(z); });
  std::vector<Metric> m = {
      {"accepted " + std::to_string(sample.size()) + " >= 5000",
       sample.size() >= 5000},
      {"KS(Gaussian rejection, A1) = " + fmt(ks) + " <= 0.07", ks <= 0.07}};
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return finish(5, "absolutely continuous analogue (Gaussian, N=1000, m=50)",
                m, secs, out);
}

// ---- criterion 6: global theorem, regime 1 -------------------------------

CriterionResult criterion6(Ctx& ctx, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  RegimeConfig rc;
  rc.model = {ctx.tables.family, OffspringKind::HybridBernoulliPoisson};
  rc.n = 300;
  rc.m = 30;
  rc.phi = 2.0;
  rc.regime = 1;
  rc.sampler = RegimeSampler::EnvImportance;
  rc.target_accepted = static_cast<std::size_t>(4000 * ctx.opt.budget_scale);
  rc.min_accepted = 1000;
  rc.seed = ctx.opt.seed ^ 0x6;
  rc.theta.seed = ctx.opt.seed ^ 0x66;
  rc.threads = ctx.opt.threads;
  rc.freq_attempts =
      static_cast<std::size_t>(6'000'000 * ctx.opt.budget_scale);
  RegimeReport rep = run_regime_experiment(
      rc, [&](double z) { return ctx.tables.laws->A1(z); });
  const bool ratio_ok = rep.freq_ratio >= 0.5 && rep.freq_ratio <= 2.0;
  const double display_ratio =
      rep.predicted_freq_display > 0.0
          ? rep.event_freq / rep.predicted_freq_display
          : 0.0;
  std::vector<Metric> m = {
      {"accepted " + std::to_string(rep.accepted) + " >= 1000",
       rep.accepted >= 1000},
      {"KS(log Z_{n-m}/a_m, A1) = " + fmt(rep.ks) + " <= 0.15",
       rep.ks <= 0.15},
      {"measured frequency " + fmt(rep.event_freq) +
           " vs Theta*P(Q_n(phi)) = " + fmt(rep.predicted_freq) +
           ": ratio " + fmt(rep.freq_ratio) + " in [0.5, 2]",
       ratio_ok},
      {"diagnostics: stratum-0 mass " + fmt(rep.stratum0_freq) +
           " (measured residual " + fmt(rep.residual_measured) +
           ", stationary split " + fmt(rep.residual_fraction) +
           "); display-form prediction " + fmt(rep.predicted_freq_display) +
           " gives ratio " + fmt(display_ratio) +
           " -- see the analysis notes on the dropped g(0) factor",
       true}};
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return finish(6, "BPRE regime-1 law with importance-sampled environments",
                m, secs, out);
}

// ---- criterion 7: small deviations ---------------------------------------

CriterionResult criterion7(Ctx& ctx, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  RegimeConfig rc;
  rc.model = {ctx.tables.family, OffspringKind::HybridBernoulliPoisson};
  rc.n = 300;
  rc.phi = 3.0;
  rc.sampler = RegimeSampler::EnvImportance;
  rc.target_accepted = static_cast<std::size_t>(4000 * ctx.opt.budget_scale);
  rc.min_accepted = 1000;
  rc.seed = ctx.opt.seed ^ 0x7;
  RegimeReport rep = small_deviation_experiment(rc);

  // Scale diagnostics: the same statistic at (n, phi) twice as large, plus
  // the unbiased brute-force law at the pinned size.
  RegimeConfig rc_big = rc;
  rc_big.n = 1'200;
  rc_big.phi = 6.0;
  rc_big.seed = ctx.opt.seed ^ 0x77;
  RegimeReport rep_big = small_deviation_experiment(rc_big);
  RegimeConfig rc_brute = rc;
  rc_brute.sampler = RegimeSampler::BruteForce;
  rc_brute.target_accepted =
      static_cast<std::size_t>(2000 * ctx.opt.budget_scale);
  rc_brute.min_accepted = 500;
  rc_brute.max_replicas = 20'000'000;
  rc_brute.seed = ctx.opt.seed ^ 0x777;
  RegimeReport rep_brute = small_deviation_experiment(rc_brute);

  std::vector<Metric> m = {
      {"accepted " + std::to_string(rep.accepted) + " >= 1000",
       rep.accepted >= 1000},
      {"KS(log Z_n / phi, y^2) = " + fmt(rep.ks) + " <= 0.15",
       rep.ks <= 0.15},
      {"diagnostics: unbiased brute-force KS at the same size = " +
           fmt(rep_brute.ks) + "; KS at (n=1200, phi=6) = " + fmt(rep_big.ks) +
           " -- the O(1) log-population offset shrinks like 1/phi; see the "
           "analysis notes",
       true}};
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return finish(7, "small-deviation law (log Z_n)/phi vs y^2", m, secs, out);
}

// ---- criterion 8: conditional expectation theorem ------------------------

CriterionResult criterion8(Ctx& ctx, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  TcondConfig tc;
  tc.model = {ctx.tables.family, OffspringKind::HybridBernoulliPoisson};
  tc.n = 400;
  tc.m = 40;
  tc.phi = 2.0;
  tc.z = 1.0;
  tc.k = 1;
  tc.env_draws = static_cast<std::size_t>(60'000 * ctx.opt.budget_scale);
  tc.h_env_samples =
      static_cast<std::size_t>(20'000 * ctx.opt.budget_scale);
  tc.seed = ctx.opt.seed ^ 0x8;
  TcondReport rep = verify_Tcond(tc, *ctx.tables.laws);
  const double gap = std::fabs(rep.lhs - rep.rhs);
  std::vector<Metric> m = {
      {"lhs " + fmt(rep.lhs) + " vs rhs A1(1)*E^[Hinf] = " + fmt(rep.rhs) +
           " (|gap| " + fmt(gap) + " <= 0.1; horizon delta " +
           fmt(rep.horizon_doubling_delta) + ")",
       gap <= 0.10}};
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return finish(8, "conditional-expectation instance at z=1, n=400, m=40, k=1",
                m, secs, out);
}

// ---- criterion 9: structural identities ----------------------------------

CriterionResult criterion9(Ctx& ctx, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& f = ctx.tables.family;
  std::vector<Metric> m;

  // V(0) = 1/(1 - zeta) and Vhat = (1 - zeta) V from the Monte Carlo path.
  RenewalConfig rc;
  rc.seed = ctx.opt.seed ^ 0x9;
  rc.paths = static_cast<std::size_t>(3000 * ctx.opt.budget_scale);
  rc.horizon = 50'000;
  const std::vector<double> grid = {0, 1, 2, 4, 8};
  RenewalTable vplus = estimate_renewal(f, RenewalKind::Vplus, grid, rc);
  rc.stream_base = 1ull << 33;
  RenewalTable vminus = estimate_renewal(f, RenewalKind::Vminus, grid, rc);
  rc.stream_base = 1ull << 34;
  RenewalTable vhat = estimate_renewal(f, RenewalKind::VplusHat, grid, rc);
  const double v0_expect = 1.0 / (1.0 - ctx.zeta.value);
  const double sig_p = std::fabs(vplus.values[0] - v0_expect) /
                       (vplus.stderrs[0] + v0_expect * v0_expect *
                                               ctx.zeta.truncation_bound);
  const double sig_m = std::fabs(vminus.values[0] - v0_expect) /
                       (vminus.stderrs[0] + v0_expect * v0_expect *
                                               ctx.zeta.truncation_bound);
  m.push_back({"V+(0) = " + fmt(vplus.values[0]) + " vs 1/(1-zeta) = " +
                   fmt(v0_expect) + " (" + fmt(sig_p) + " sigma <= 4)",
               sig_p <= 4.0});
  m.push_back({"V-(0) = " + fmt(vminus.values[0]) + " vs 1/(1-zeta) (" +
                   fmt(sig_m) + " sigma <= 4)",
               sig_m <= 4.0});
  double worst_hat = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double expect = (1.0 - ctx.zeta.value) * vplus.values[i];
    const double err = vhat.stderrs[i] + (1.0 - ctx.zeta.value) *
                                              vplus.stderrs[i] +
                       vplus.values[i] * ctx.zeta.truncation_bound;
    worst_hat = std::max(worst_hat,
                         std::fabs(vhat.values[i] - expect) / err);
  }
  m.push_back({"Vhat = (1-zeta) V across grid (worst " + fmt(worst_hat) +
                   " sigma <= 4)",
               worst_hat <= 4.0});

  // B mixture identity.
  const double mix1 = std::fabs(ctx.tables.laws->B(1.0, 1.0) -
                                ctx.tables.laws->B_via_A2(1.0, 1.0));
  const double mix2 = std::fabs(ctx.tables.laws->B(2.5, 0.7) -
                                ctx.tables.laws->B_via_A2(2.5, 0.7));
  m.push_back({"B vs A2-mixture quadrature identity: " + fmt(mix1) + ", " +
                   fmt(mix2) + " <= 1e-6",
               mix1 <= 1e-6 && mix2 <= 1e-6});

  // dp-backward vs rejection sampler, chi-square on S_{25} at N=50.
  {
    const std::size_t samples =
        static_cast<std::size_t>(10'000 * ctx.opt.budget_scale);
    ConditionKernel kernel(f, 50, 0);
    Philox rng(ctx.opt.seed, 0x95);
    std::vector<double> dp_mid, rej_mid;
    for (std::size_t i = 0; i < samples; ++i) {
      WalkPath a = sample_conditioned(f, 50, 0.0, EndSpec::exact(2.0),
                                      ConditionedMode::DpBackward, rng,
                                      10'000'000, &kernel);
      dp_mid.push_back(a.positions[25]);
      WalkPath b = sample_conditioned(f, 50, 0.0, EndSpec::exact(2.0),
                                      ConditionedMode::Rejection, rng);
      rej_mid.push_back(b.positions[25]);
    }
    ChiSquareResult chi = chi_square_two_sample(dp_mid, rej_mid);
    m.push_back({"dp-backward vs rejection chi-square p = " +
                     fmt(chi.p_value) + " > 0.01",
                 chi.p_value > 0.01});
  }

  // sampler empirical CF within 0.01 of G.
  for (const StableParams params :
       {make_params(2.0, 0.0, 0.5), make_params(1.5, 0.5, 1.0)}) {
    const std::size_t draws =
        static_cast<std::size_t>(1'000'000 * ctx.opt.budget_scale);
    const std::size_t threads = std::max<std::size_t>(1, ctx.opt.threads);
    std::vector<double> wgrid;
    for (double w = -3.0; w <= 3.0 + 1e-9; w += 0.5)
      if (std::fabs(w) > 1e-12) wgrid.push_back(w);
    std::vector<std::vector<double>> sre(threads), sim(threads);
    std::vector<std::thread> pool;
    const std::size_t per = draws / threads;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        Philox rng(ctx.opt.seed, 0x9C0 + w);
        std::vector<double> re(wgrid.size(), 0.0), imv(wgrid.size(), 0.0);
        for (std::size_t i = 0; i < per; ++i) {
          const double y = sample_stable(params, rng);
          for (std::size_t g = 0; g < wgrid.size(); ++g) {
            re[g] += std::cos(wgrid[g] * y);
            imv[g] += std::sin(wgrid[g] * y);
          }
        }
        sre[w] = std::move(re);
        sim[w] = std::move(imv);
      });
    }
    for (auto& th : pool) th.join();
    double worst = 0.0;
    for (std::size_t g = 0; g < wgrid.size(); ++g) {
      double re = 0.0, imv = 0.0;
      for (std::size_t w = 0; w < threads; ++w) {
        re += sre[w][g];
        imv += sim[w][g];
      }
      const double n = static_cast<double>(per * threads);
      const auto target = params.cf(wgrid[g]);
      worst = std::max(worst, std::hypot(re / n - target.real(),
                                         imv / n - target.imag()));
    }
    m.push_back({"sampler empirical CF vs G for " + params.describe() +
                     ": sup " + fmt(worst) + " <= 0.01",
                 worst <= 0.01});
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return finish(9, "structural identities (renewal, mixture, samplers, CF)",
                m, secs, out);
}

// ---- criterion 10: condition B2 verdicts ---------------------------------

CriterionResult criterion10(Ctx& ctx, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t budget =
      static_cast<std::size_t>(400'000 * ctx.opt.budget_scale);
  std::vector<Metric> m;

  EnvironmentModel hybrid_pareto{make_two_sided_pareto(1.5, 0.7),
                                 OffspringKind::HybridBernoulliPoisson};
  B2Report r1 =
      check_condition_B2(hybrid_pareto, 2, 0.5, budget, ctx.opt.seed ^ 0xA1);
  m.push_back({"hybrid offspring, alpha=1.5 environment: PASS expected",
               r1.pass});

  EnvironmentModel hybrid_lattice{ctx.tables.family,
                                  OffspringKind::HybridBernoulliPoisson};
  B2Report r2 =
      check_condition_B2(hybrid_lattice, 2, 0.5, budget, ctx.opt.seed ^ 0xA2);
  m.push_back({"hybrid offspring, alpha=2 environment: PASS expected (gamma "
               "sup " + fmt(r2.gamma_sup) + ")",
               r2.pass});

  EnvironmentModel geo_pareto{make_two_sided_pareto(1.5, 0.7),
                              OffspringKind::Geometric};
  B2Report r3 =
      check_condition_B2(geo_pareto, 1, 0.5, budget, ctx.opt.seed ^ 0xA3);
  const bool moments_grow =
      r3.moments.size() >= 2 &&
      r3.moments.back() > 1.2 * r3.moments.front();
  m.push_back({"geometric offspring on Pareto(1.5): FAIL expected "
               "(non-stabilizing moment trace: " +
                   fmt(r3.moments.front()) + " -> " + fmt(r3.moments.back()) +
                   ")",
               !r3.pass && moments_grow});
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return finish(10, "condition-B2 verdicts frozen as regressions", m, secs,
                out);
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt,
                                            std::ostream& out) {
  Ctx ctx{opt, {}, {}, {}};
  const auto t0 = std::chrono::steady_clock::now();
  CanonicalConfig cc;
  cc.seed = opt.seed;
  cc.threads = opt.threads;
  cc.meander_steps = 10'000;
  cc.meander_samples =
      static_cast<std::size_t>(40'000 * std::max(opt.budget_scale, 0.05));
  cc.bridge_steps = 2'000;
  ctx.tables = build_canonical_tables(cc);
  ctx.zeta = estimate_zeta(ctx.tables.family, 2048);
  ctx.tau_plus_tail = stay_strictly_negative_exact(ctx.tables.family, 10'000);
  out << "shared tables built in "
      << fmt(std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                           t0)
                 .count())
      << "s (" << ctx.tables.provenance_json << ")\n";

  std::vector<CriterionResult> results;
  results.push_back(criterion1(ctx, out));
  results.push_back(criterion2(ctx, out));
  results.push_back(criterion3(ctx, out));
  results.push_back(criterion4(ctx, out));
  results.push_back(criterion5(ctx, out));
  results.push_back(criterion6(ctx, out));
  results.push_back(criterion7(ctx, out));
  results.push_back(criterion8(ctx, out));
  results.push_back(criterion9(ctx, out));
  results.push_back(criterion10(ctx, out));
  return results;
}

bool all_passed(const std::vector<CriterionResult>& results) {
  for (const auto& r : results)
    if (!r.pass) return false;
  return true;
}

}  // namespace walklab
