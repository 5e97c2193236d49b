#include "walklab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <thread>

#include "json.hpp"
#include "walklab/errors.hpp"

namespace walklab {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kPartitionStride = 1ull << 32;

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const std::exception& e) {
    throw InvalidConfig(std::string(what) + ": " + e.what());
  }
}

double tol(const json& t, const std::string& key, double fallback) {
  if (t.contains(key)) return t.at(key).get<double>();
  return fallback;
}

void for_each_partition(std::size_t partitions,
                        const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(
      partitions, std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  std::atomic<std::size_t> next{0};
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t p = next.fetch_add(1);
        if (p >= partitions) return;
        body(p);
      }
    });
  }
  for (auto& th : pool) th.join();
}

CheckResult make_check(std::string name, double stat, double thr,
                       std::string table, std::string mode) {
  CheckResult c;
  c.name = std::move(name);
  c.statistic = stat;
  c.threshold = thr;
  c.pass = stat <= thr;
  c.table = std::move(table);
  c.mode = std::move(mode);
  return c;
}

IncrementFamily family_from_json(const json& p) {
  const std::string kind = p.value("family", "lazy_lattice");
  if (kind == "lazy_lattice") return make_lazy_lattice(p.value("p", 0.3));
  if (kind == "gaussian") return make_gaussian(p.value("sigma", 1.0));
  if (kind == "two_sided_pareto")
    return make_two_sided_pareto(p.value("tail_alpha", 1.5),
                                 p.value("balance", 0.7));
  throw InvalidConfig("unknown family: " + kind);
}

OffspringKind offspring_from_json(const json& p) {
  const std::string kind = p.value("offspring", "hybrid");
  if (kind == "hybrid") return OffspringKind::HybridBernoulliPoisson;
  if (kind == "geometric") return OffspringKind::Geometric;
  throw InvalidConfig("unknown offspring kind: " + kind);
}

// Decimated two-column CDF comparison table whose stored rows reproduce the
// reported KS statistic exactly.
Csv cdf_table_and_ks(const EmpiricalCdf& ecdf,
                     const std::function<double(double)>& reference,
                     double* ks_out, std::size_t max_rows = 2'000) {
  Csv csv;
  csv.header = {"point", "empirical", "empirical_left", "reference"};
  const std::size_t n = ecdf.points.size();
  const std::size_t stride = std::max<std::size_t>(1, n / max_rows);
  double ks = 0.0;
  for (std::size_t i = 0; i < n; i += stride) {
    const double left = i ? ecdf.cdf[i - 1] : 0.0;
    const double ref = reference(ecdf.points[i]);
    ks = std::max(ks, std::fabs(ecdf.cdf[i] - ref));
    ks = std::max(ks, std::fabs(left - ref));
    csv.rows.push_back({ecdf.points[i], ecdf.cdf[i], left, ref});
  }
  // always include the last atom
  if ((n - 1) % stride != 0) {
    const std::size_t i = n - 1;
    const double left = i ? ecdf.cdf[i - 1] : 0.0;
    const double ref = reference(ecdf.points[i]);
    ks = std::max(ks, std::fabs(ecdf.cdf[i] - ref));
    ks = std::max(ks, std::fabs(left - ref));
    csv.rows.push_back({ecdf.points[i], ecdf.cdf[i], left, ref});
  }
  *ks_out = ks;
  return csv;
}

double replay_statistic(const Csv& csv, const std::string& mode) {
  auto col = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < csv.header.size(); ++i)
      if (csv.header[i] == name) return i;
    throw InvalidConfig("replay: missing column " + name);
  };
  auto split = [&](const std::string& m) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
      const std::size_t pos = m.find(':', start);
      if (pos == std::string::npos) {
        parts.push_back(m.substr(start));
        break;
      }
      parts.push_back(m.substr(start, pos - start));
      start = pos + 1;
    }
    return parts;
  };
  const auto parts = split(mode);
  const std::string& op = parts[0];
  if (op == "ks") {
    const std::size_t ce = col("empirical"), cl = col("empirical_left"),
                      cr = col("reference");
    double ks = 0.0;
    for (const auto& row : csv.rows) {
      ks = std::max(ks, std::fabs(row[ce] - row[cr]));
      ks = std::max(ks, std::fabs(row[cl] - row[cr]));
    }
    return ks;
  }
  if (op == "max_abs_diff" || op == "rel_diff") {
    const std::size_t c1 = col(parts.at(1)), c2 = col(parts.at(2));
    double m = 0.0;
    for (const auto& row : csv.rows) {
      double d = std::fabs(row[c1] - row[c2]);
      if (op == "rel_diff") d /= std::max(std::fabs(row[c1]), 1e-300);
      m = std::max(m, d);
    }
    return m;
  }
  if (op == "monotone") {
    const std::size_t c = col(parts.at(1));
    double worst = 0.0;
    for (std::size_t i = 1; i < csv.rows.size(); ++i)
      worst = std::max(worst, csv.rows[i - 1][c] - csv.rows[i][c]);
    return worst;
  }
  if (op == "monotone_dec") {
    const std::size_t c = col(parts.at(1));
    double worst = 0.0;
    for (std::size_t i = 1; i < csv.rows.size(); ++i)
      worst = std::max(worst, csv.rows[i][c] - csv.rows[i - 1][c]);
    return worst;
  }
  if (op == "max") {
    const std::size_t c = col(parts.at(1));
    double m = -1e300;
    for (const auto& row : csv.rows) m = std::max(m, row[c]);
    return m;
  }
  if (op == "value") {
    const std::size_t c = col(parts.at(1));
    if (csv.rows.empty()) throw InvalidConfig("replay: empty table");
    return csv.rows.front()[c];
  }
  throw InvalidConfig("replay: unknown mode " + mode);
}

// ---------------------------------------------------------------- stable --

void run_stable_check(const ExperimentConfig& cfg, const json& p,
                      const json& t, ExperimentReport& rep) {
  const StableParams params = make_params(
      p.value("alpha", 2.0), p.value("beta", 0.0), p.value("scale", 0.5));
  const std::size_t cf_samples = p.value("cf_samples", 1'000'000);
  const std::size_t ks_samples = p.value("ks_samples", 100'000);

  // Empirical characteristic function on a fixed w grid.
  std::vector<double> wgrid;
  for (double w = -3.0; w <= 3.0 + 1e-9; w += 0.25)
    if (std::fabs(w) > 1e-12) wgrid.push_back(w);
  std::vector<std::vector<double>> re(cfg.partitions),
      im(cfg.partitions);
  std::vector<std::vector<double>> ks_chunks(cfg.partitions);
  const std::size_t per = cf_samples / cfg.partitions;
  const std::size_t ks_per = ks_samples / cfg.partitions;
  for_each_partition(cfg.partitions, [&](std::size_t part) {
    Philox rng(cfg.seed, part * kPartitionStride);
    std::vector<double> sre(wgrid.size(), 0.0), sim(wgrid.size(), 0.0);
    for (std::size_t i = 0; i < per; ++i) {
      const double y = sample_stable(params, rng);
      for (std::size_t g = 0; g < wgrid.size(); ++g) {
        sre[g] += std::cos(wgrid[g] * y);
        sim[g] += std::sin(wgrid[g] * y);
      }
    }
    re[part] = std::move(sre);
    im[part] = std::move(sim);
    auto& chunk = ks_chunks[part];
    chunk.reserve(ks_per);
    for (std::size_t i = 0; i < ks_per; ++i)
      chunk.push_back(sample_stable(params, rng));
  });

  Csv ecf;
  ecf.header = {"w", "ecf_re", "ecf_im", "target_re", "target_im", "mod_diff"};
  double worst_cf = 0.0;
  for (std::size_t g = 0; g < wgrid.size(); ++g) {
    double sre = 0.0, sim_ = 0.0;
    for (std::size_t part = 0; part < cfg.partitions; ++part) {
      sre += re[part][g];
      sim_ += im[part][g];
    }
    const double n = static_cast<double>(per * cfg.partitions);
    sre /= n;
    sim_ /= n;
    const auto target = params.cf(wgrid[g]);
    const double diff = std::hypot(sre - target.real(), sim_ - target.imag());
    worst_cf = std::max(worst_cf, diff);
    ecf.rows.push_back(
        {wgrid[g], sre, sim_, target.real(), target.imag(), diff});
  }
  rep.tables["ecf.csv"] = ecf;
  rep.checks.push_back(make_check("sampler_cf_match", worst_cf,
                                  tol(t, "cf", 0.01), "ecf.csv",
                                  "max:mod_diff"));

  std::vector<double> sample;
  for (auto& c : ks_chunks) sample.insert(sample.end(), c.begin(), c.end());
  EmpiricalCdf ecdf = empirical_cdf(std::move(sample));
  double ks = 0.0;
  rep.tables["sampler_cdf.csv"] = cdf_table_and_ks(
      ecdf, [&](double z) { return stable_cdf(params, z, 1e-7); }, &ks);
  // the decimated table is the statistic of record
  ks = replay_statistic(rep.tables["sampler_cdf.csv"], "ks");
  rep.checks.push_back(make_check("sampler_vs_cdf_ks", ks,
                                  tol(t, "ks", 0.01), "sampler_cdf.csv",
                                  "ks"));

  // Density mass and CDF monotonicity on a deterministic grid.
  const double reach =
      50.0 * std::pow(params.scale, 1.0 / params.alpha);
  Csv dens;
  dens.header = {"x", "g"};
  const std::size_t cells = 400;
  std::vector<double> gx, gv;
  for (std::size_t i = 0; i <= cells; ++i) {
    const double x = -reach + 2.0 * reach * i / cells;
    gx.push_back(x);
    gv.push_back(stable_density(params, x, 1e-9));
    dens.rows.push_back({x, gv.back()});
  }
  rep.tables["density.csv"] = dens;
  const double mass = trapezoid_mass(gx, gv);
  Csv mcsv;
  mcsv.header = {"mass", "abs_dev"};
  mcsv.rows.push_back({mass, std::fabs(mass - 1.0)});
  rep.tables["density_mass.csv"] = mcsv;
  rep.checks.push_back(make_check("density_mass", std::fabs(mass - 1.0),
                                  tol(t, "mass", 1e-3), "density_mass.csv",
                                  "value:abs_dev"));

  Csv cdfv;
  cdfv.header = {"z", "F"};
  const double creach = 8.0 * std::pow(params.scale, 1.0 / params.alpha);
  for (int i = -40; i <= 40; ++i) {
    const double z = creach * i / 40.0;
    cdfv.rows.push_back({z, stable_cdf(params, z, 1e-9)});
  }
  rep.tables["cdf.csv"] = cdfv;
  rep.checks.push_back(make_check(
      "cdf_monotone", replay_statistic(cdfv, "monotone:F"), 1e-10, "cdf.csv",
      "monotone:F"));

  // positivity parameter: Monte Carlo vs the closed-form cross-check
  Philox rng(cfg.seed, 0xF00);
  const std::size_t rho_budget = p.value("rho_budget", 200'000);
  RhoEstimate rho = positivity_parameter(params, rho_budget, rng);
  const double closed =
      positivity_parameter_closed_form(params.alpha, params.beta);
  Csv rcsv;
  rcsv.header = {"rho_mc", "rho_closed", "stderr", "sigmas"};
  const double sig = rho.sampled
                         ? std::fabs(rho.value - closed) /
                               std::max(rho.stderr_, 1e-12)
                         : 0.0;
  rcsv.rows.push_back({rho.value, closed, rho.stderr_, sig});
  rep.tables["rho.csv"] = rcsv;
  rep.checks.push_back(
      make_check("rho_mc_vs_closed_form", sig, 4.0, "rho.csv", "value:sigmas"));
  rep.replicas = cf_samples + ks_samples + rho_budget;
}

// ------------------------------------------------------------------ walk --

void run_walk_check(const ExperimentConfig& cfg, const json& p, const json& t,
                    ExperimentReport& rep) {
  const IncrementFamily fam = family_from_json(p);
  const std::string sub = cfg.sub.empty() ? "clt" : cfg.sub;

  if (sub == "clt") {
    const std::size_t n = p.value("n", 1'000);
    const std::size_t paths = p.value("paths", 10'000);
    const auto [a_n, b_n] = scaling_constants(fam, n);
    Csv scaling;
    scaling.header = {"n", "a_n", "b_n", "identity_dev"};
    scaling.rows.push_back(
        {static_cast<double>(n), a_n, b_n,
         std::fabs(b_n * static_cast<double>(n) * a_n - 1.0)});
    rep.tables["scaling.csv"] = scaling;
    rep.checks.push_back(make_check("b_n_identity",
                                    scaling.rows[0][3], 1e-12, "scaling.csv",
                                    "value:identity_dev"));

    std::vector<std::vector<double>> chunks(cfg.partitions);
    std::vector<std::vector<double>> ladder_fwd(cfg.partitions),
        ladder_rev(cfg.partitions);
    const std::size_t per = paths / cfg.partitions;
    for_each_partition(cfg.partitions, [&](std::size_t part) {
      Philox rng(cfg.seed, part * kPartitionStride);
      auto& c = chunks[part];
      c.reserve(per);
      for (std::size_t i = 0; i < per; ++i) {
        WalkPath path = simulate_path(fam, n, 0.0, rng);
        c.push_back(path.positions[n] / a_n);
        LadderStats ls = ladder_stats(path);
        ladder_fwd[part].push_back(
            static_cast<double>(ls.weak_asc.epochs.size()));
        // reversed increments: S_n - S_{n-k}
        WalkPath rev;
        rev.x0 = 0.0;
        rev.positions.resize(n + 1);
        rev.positions[0] = 0.0;
        for (std::size_t k = 1; k <= n; ++k)
          rev.positions[k] = path.positions[n] - path.positions[n - k];
        ladder_rev[part].push_back(static_cast<double>(
            ladder_stats(rev).weak_asc.epochs.size()));
      }
    });
    std::vector<double> scaled, lf, lr;
    for (std::size_t part = 0; part < cfg.partitions; ++part) {
      scaled.insert(scaled.end(), chunks[part].begin(), chunks[part].end());
      lf.insert(lf.end(), ladder_fwd[part].begin(), ladder_fwd[part].end());
      lr.insert(lr.end(), ladder_rev[part].begin(), ladder_rev[part].end());
    }
    EmpiricalCdf ecdf = empirical_cdf(std::move(scaled));
    double ks = 0.0;
    rep.tables["walk_cdf.csv"] = cdf_table_and_ks(
        ecdf,
        [&](double z) { return stable_cdf(fam.stable_target, z, 1e-7); }, &ks);
    ks = replay_statistic(rep.tables["walk_cdf.csv"], "ks");
    rep.checks.push_back(make_check("scaled_walk_ks", ks, tol(t, "ks", 0.02),
                                    "walk_cdf.csv", "ks"));

    MeanStderr mf = mean_stderr(lf), mr = mean_stderr(lr);
    const double joint =
        std::sqrt(mf.stderr_ * mf.stderr_ + mr.stderr_ * mr.stderr_);
    Csv dual;
    dual.header = {"fwd_mean", "rev_mean", "sigmas"};
    dual.rows.push_back(
        {mf.mean, mr.mean, std::fabs(mf.mean - mr.mean) / joint});
    rep.tables["duality.csv"] = dual;
    rep.checks.push_back(make_check("ladder_duality",
                                    dual.rows[0][2], 4.0, "duality.csv",
                                    "value:sigmas"));
    rep.replicas = paths;
    return;
  }

  if (sub == "renewal") {
    std::vector<double> grid = {0, 1, 2, 3, 4, 6, 8, 12, 16, 24, 32};
    RenewalConfig rc;
    rc.seed = cfg.seed;
    rc.paths = p.value("paths", 2'000);
    rc.horizon = p.value("horizon", 100'000);
    RenewalTable vplus = estimate_renewal(fam, RenewalKind::Vplus, grid, rc);
    rc.stream_base = kPartitionStride;
    RenewalTable vhat =
        estimate_renewal(fam, RenewalKind::VplusHat, grid, rc);
    const ZetaEstimate zeta = estimate_zeta(fam);
    Csv rcsv;
    rcsv.header = {"x",    "vplus",     "vplus_stderr", "vhat",
                   "vhat_stderr", "hat_sigmas", "exact"};
    double worst_hat = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double expect = (1.0 - zeta.value) * vplus.values[i];
      const double err =
          std::sqrt(vhat.stderrs[i] * vhat.stderrs[i] +
                    (1.0 - zeta.value) * (1.0 - zeta.value) *
                        vplus.stderrs[i] * vplus.stderrs[i]) +
          vplus.values[i] * zeta.truncation_bound;
      const double sig = std::fabs(vhat.values[i] - expect) / err;
      worst_hat = std::max(worst_hat, sig);
      const double exact =
          fam.kind == FamilyKind::LazyLattice
              ? exact_renewal_lazy(fam, RenewalKind::Vplus, {grid[i]})
                    .values[0]
              : 0.0;
      rcsv.rows.push_back({grid[i], vplus.values[i], vplus.stderrs[i],
                           vhat.values[i], vhat.stderrs[i], sig, exact});
    }
    rep.tables["renewal.csv"] = rcsv;
    rep.checks.push_back(make_check("hat_relation_sigmas", worst_hat, 4.0,
                                    "renewal.csv", "max:hat_sigmas"));
    const double v0 = vplus.values[0];
    const double v0_expect = 1.0 / (1.0 - zeta.value);
    const double v0_err =
        vplus.stderrs[0] + v0_expect * v0_expect * zeta.truncation_bound;
    Csv zcsv;
    zcsv.header = {"v0", "one_over_1mzeta", "sigmas"};
    zcsv.rows.push_back(
        {v0, v0_expect, std::fabs(v0 - v0_expect) / std::max(v0_err, 1e-12)});
    rep.tables["v_zero.csv"] = zcsv;
    rep.checks.push_back(make_check("v_zero_identity", zcsv.rows[0][2], 4.0,
                                    "v_zero.csv", "value:sigmas"));
    rep.replicas = 2 * rc.paths;
    return;
  }

  if (sub == "kernel") {
    const std::size_t N = p.value("N", 50);
    const std::int64_t x = p.value("x", 0);
    ConditionKernel kernel(fam, N, x);
    Csv kcsv;
    kcsv.header = {"n", "y", "q"};
    for (std::size_t n = 1; n <= N; ++n)
      for (std::int64_t y = 0; y <= kernel.max_height(); ++y)
        if (kernel.q(n, y) > 0.0)
          kcsv.rows.push_back({static_cast<double>(n),
                               static_cast<double>(y), kernel.q(n, y)});
    rep.tables["kernel.csv"] = kcsv;
    Csv rows;
    rows.header = {"n", "row_sum"};
    for (std::size_t n = 0; n <= N; ++n)
      rows.rows.push_back({static_cast<double>(n), kernel.survival(n)});
    rep.tables["kernel_row_sums.csv"] = rows;
    rep.checks.push_back(make_check(
        "row_sums_nonincreasing",
        replay_statistic(rows, "monotone_dec:row_sum"), 1e-12,
        "kernel_row_sums.csv", "monotone_dec:row_sum"));
    if (!cfg.cache_dir.empty()) {
      std::vector<double> final_row;
      for (std::int64_t y = 0; y <= kernel.max_height(); ++y)
        final_row.push_back(kernel.q(N, y));
      cache_store_kernel_row(cfg.cache_dir,
                             kernel_cache_key(fam, N, x), final_row);
    }
    rep.replicas = N;
    return;
  }

  if (sub == "conditioned") {
    const std::size_t N = p.value("N", 50);
    const std::int64_t y = p.value("y", 2);
    const std::size_t samples = p.value("samples", 10'000);
    ConditionKernel kernel(fam, N, 0);
    std::vector<double> dp_mid, rej_mid;
    Philox rng(cfg.seed, 0);
    for (std::size_t i = 0; i < samples; ++i) {
      WalkPath a = sample_conditioned(fam, N, 0.0, EndSpec::exact(double(y)),
                                      ConditionedMode::DpBackward, rng,
                                      10'000'000, &kernel);
      dp_mid.push_back(a.positions[N / 2]);
      WalkPath b = sample_conditioned(fam, N, 0.0, EndSpec::exact(double(y)),
                                      ConditionedMode::Rejection, rng);
      rej_mid.push_back(b.positions[N / 2]);
    }
    ChiSquareResult chi = chi_square_two_sample(dp_mid, rej_mid);
    Csv ccsv;
    ccsv.header = {"chi2", "dof", "p_value", "one_minus_p"};
    ccsv.rows.push_back({chi.statistic, chi.dof, chi.p_value,
                         1.0 - chi.p_value});
    rep.tables["conditioned_chi2.csv"] = ccsv;
    rep.checks.push_back(make_check("dp_vs_rejection_chi2",
                                    1.0 - chi.p_value, 0.99,
                                    "conditioned_chi2.csv",
                                    "value:one_minus_p"));
    rep.replicas = 2 * samples;
    return;
  }
  throw InvalidConfig("unknown walk sub-experiment: " + sub);
}

// ------------------------------------------------- limit laws and BPRE --

CanonicalConfig canonical_from_json(const json& p, std::uint64_t seed,
                                    std::size_t partitions) {
  CanonicalConfig cc;
  cc.lattice_p = p.value("p", 0.3);
  cc.meander_steps = p.value("meander_steps", 4'000);
  cc.meander_samples = p.value("meander_samples", 20'000);
  cc.bridge_steps = p.value("bridge_steps", 1'200);
  cc.seed = seed;
  cc.threads = partitions;
  return cc;
}

void run_model_experiment(const ExperimentConfig& cfg, const json& p,
                          const json& t, ExperimentReport& rep) {
  if (cfg.kind == "b2-check") {
    EnvironmentModel model{family_from_json(p), offspring_from_json(p)};
    const int b = p.value("b", 2);
    const double eps = p.value("eps", 0.5);
    const std::size_t budget = p.value("budget", 200'000);
    B2Report r = check_condition_B2(model, b, eps, budget, cfg.seed);
    Csv mcsv;
    mcsv.header = {"stage", "moment"};
    for (std::size_t i = 0; i < r.moments.size(); ++i)
      mcsv.rows.push_back({static_cast<double>(i), r.moments[i]});
    rep.tables["b2_moments.csv"] = mcsv;
    Csv vcsv;
    vcsv.header = {"pass", "gamma_sup", "expected_pass", "mismatch"};
    const double expected = p.value("expect_pass", r.pass) ? 1.0 : 0.0;
    const double mismatch = (r.pass ? 1.0 : 0.0) == expected ? 0.0 : 1.0;
    vcsv.rows.push_back(
        {r.pass ? 1.0 : 0.0, r.gamma_sup, expected, mismatch});
    rep.tables["b2_verdict.csv"] = vcsv;
    rep.checks.push_back(make_check("b2_verdict_matches", mismatch, 0.5,
                                    "b2_verdict.csv", "value:mismatch"));
    rep.replicas = budget;
    return;
  }

  // Remaining kinds run against the canonical lattice tables.
  CanonicalTables tables =
      build_canonical_tables(canonical_from_json(p, cfg.seed, cfg.partitions));
  json meta;
  meta["tables"] = json::parse(tables.provenance_json);

  if (cfg.kind == "limit-law") {
    const std::string sub = cfg.sub.empty() ? "laws" : cfg.sub;
    const auto& m = *tables.meander_minus;
    if (sub == "meander") {
      Csv mcsv;
      mcsv.header = {"z", "value", "stderr", "rayleigh", "abs_diff"};
      double sup = 0.0;
      for (std::size_t i = 0; i < m.grid.size(); ++i) {
        const double ray = brownian_meander_density(m.grid[i]);
        const double d = (m.grid[i] >= 0.1 && m.grid[i] <= 3.0)
                             ? std::fabs(m.value[i] - ray)
                             : 0.0;
        sup = std::max(sup, d);
        mcsv.rows.push_back({m.grid[i], m.value[i], m.stderr_[i], ray, d});
      }
      rep.tables["meander.csv"] = mcsv;
      Csv mass;
      mass.header = {"mass", "abs_dev"};
      mass.rows.push_back({m.mass(), std::fabs(m.mass() - 1.0)});
      rep.tables["meander_mass.csv"] = mass;
      rep.checks.push_back(make_check("meander_mass",
                                      std::fabs(m.mass() - 1.0),
                                      tol(t, "mass", 0.03),
                                      "meander_mass.csv", "value:abs_dev"));
      rep.checks.push_back(make_check("rayleigh_sup", sup,
                                      tol(t, "rayleigh", 0.05), "meander.csv",
                                      "max:abs_diff"));
      rep.replicas = m.provenance.samples;
      return;
    }
    if (sub == "bridge") {
      const auto& br = *tables.bridge;
      Csv bcsv;
      bcsv.header = {"a", "b", "value", "brownian", "abs_diff"};
      double sup = 0.0;
      for (std::size_t ai = 0; ai < br.a_grid.size(); ++ai)
        for (std::size_t bi = 0; bi < br.b_grid.size(); ++bi) {
          const double ref =
              brownian_bridge_positivity(br.a_grid[ai], br.b_grid[bi]);
          const double d = std::fabs(br.value[ai][bi] - ref);
          if (br.a_grid[ai] >= 0.4 && br.b_grid[bi] >= 0.4)
            sup = std::max(sup, d);
          bcsv.rows.push_back(
              {br.a_grid[ai], br.b_grid[bi], br.value[ai][bi], ref, d});
        }
      rep.tables["bridge.csv"] = bcsv;
      rep.checks.push_back(make_check("brownian_bridge_sup", sup,
                                      tol(t, "bridge", 0.05), "", ""));
      rep.replicas = br.a_grid.size() * br.b_grid.size();
      return;
    }
    if (sub == "constants") {
      const auto& c = tables.constants;
      Csv ccsv;
      ccsv.header = {"name_id", "ladder", "moment", "rel_gap"};
      auto row = [&](double id, const ValueWithError& a,
                     const ValueWithError& b) {
        ccsv.rows.push_back(
            {id, a.value, b.value,
             std::fabs(a.value - b.value) / std::fabs(a.value)});
      };
      row(0, c.c_star_ladder, c.c_star_meander);
      row(1, c.c_star2_ladder, c.c_star2_meander);
      row(2, c.c_star3_product, c.c_star3_composite);
      row(3, c.c_hat_dp, c.c_hat_mc);
      rep.tables["constants.csv"] = ccsv;
      rep.checks.push_back(
          make_check("constants_two_routes",
                     replay_statistic(ccsv, "max:rel_gap"),
                     tol(t, "route_gap", 0.10), "constants.csv",
                     "max:rel_gap"));
      Csv id;
      id.header = {"c_star", "moment_integral", "product_dev"};
      const double integral =
          tables.meander_minus->moment(tables.laws->alpha_rho());
      id.rows.push_back({c.c_star_ladder.value, integral,
                         std::fabs(c.c_star_ladder.value * integral - 1.0)});
      rep.tables["c_star_identity.csv"] = id;
      rep.checks.push_back(make_check(
          "c_star_moment_identity", id.rows[0][2], tol(t, "identity", 0.1),
          "c_star_identity.csv", "value:product_dev"));
      return;
    }
    if (sub == "laws") {
      const auto& laws = *tables.laws;
      Csv lcsv;
      lcsv.header = {"z", "A1", "A1_brownian", "A1_diff", "A2_t1", "B_T1"};
      double a1_sup = 0.0;
      for (double z = 0.0; z <= 3.0 + 1e-9; z += 0.25) {
        const double a1 = laws.A1(z);
        const double ref = brownian_A1(z);
        a1_sup = std::max(a1_sup, std::fabs(a1 - ref));
        lcsv.rows.push_back({z, a1, ref, std::fabs(a1 - ref), laws.A2(z, 1.0),
                             laws.B(z, 1.0)});
      }
      rep.tables["laws.csv"] = lcsv;
      rep.checks.push_back(make_check("A1_monotone",
                                      replay_statistic(lcsv, "monotone:A1"),
                                      1e-10, "laws.csv", "monotone:A1"));
      rep.checks.push_back(make_check("A1_brownian_sup", a1_sup,
                                      tol(t, "a1", 0.05), "laws.csv",
                                      "max:A1_diff"));
      const double mix =
          std::fabs(laws.B(2.0, 1.0) - laws.B_via_A2(2.0, 1.0));
      Csv mcsv2;
      mcsv2.header = {"B", "B_via_A2", "abs_diff"};
      mcsv2.rows.push_back(
          {laws.B(2.0, 1.0), laws.B_via_A2(2.0, 1.0), mix});
      rep.tables["mixture.csv"] = mcsv2;
      rep.checks.push_back(make_check("b_mixture_identity", mix,
                                      tol(t, "mixture", 1e-6), "mixture.csv",
                                      "value:abs_diff"));
      return;
    }
    throw InvalidConfig("unknown limit-law sub-experiment: " + sub);
  }

  EnvironmentModel model{tables.family, offspring_from_json(p)};
  if (cfg.kind == "bpre-regime") {
    RegimeConfig rc;
    rc.model = model;
    rc.n = p.value("n", 300);
    rc.m = p.value("m", 30);
    rc.phi = p.value("phi", 2.0);
    rc.regime = p.value("regime", 1);
    rc.sampler = p.value("sampler", std::string("env_importance")) ==
                         std::string("brute_force")
                     ? RegimeSampler::BruteForce
                     : RegimeSampler::EnvImportance;
    rc.target_accepted = p.value("target_accepted", 2'000);
    rc.min_accepted = p.value("min_accepted", 1'000);
    rc.z0 = p.value("z0", 1);
    rc.seed = cfg.seed;
    rc.theta.seed = cfg.seed ^ 0x7E7A;
    const ScalingLaw sc = scaling_law(model.family);
    const double a_m = sc.a(static_cast<double>(rc.m));
    std::function<double(double)> reference;
    if (rc.regime == 1) {
      reference = [&tables](double z) { return tables.laws->A1(z); };
    } else if (rc.regime == 2) {
      const double T = rc.phi / a_m;
      reference = [&tables, T](double z) { return tables.laws->B(z, T); };
    } else {
      const StableParams sp = model.family.stable_target;
      reference = [sp](double z) { return stable_cdf(sp, z, 1e-7); };
    }
    RegimeReport r = run_regime_experiment(rc, reference);
    double ks = 0.0;
    rep.tables["cdf.csv"] = cdf_table_and_ks(r.cdf, reference, &ks);
    ks = replay_statistic(rep.tables["cdf.csv"], "ks");
    rep.checks.push_back(
        make_check("regime_ks", ks, tol(t, "ks", 0.15), "cdf.csv", "ks"));
    Csv fcsv;
    fcsv.header = {"event_freq", "predicted", "predicted_display", "ratio",
                   "ratio_stat", "theta", "residual_fraction", "accepted"};
    const double ratio_stat =
        r.freq_ratio > 0.0
            ? std::max(r.freq_ratio / 2.0, 1.0 / (2.0 * r.freq_ratio))
            : 1e9;
    fcsv.rows.push_back({r.event_freq, r.predicted_freq,
                         r.predicted_freq_display, r.freq_ratio, ratio_stat,
                         r.theta_value, r.residual_fraction,
                         static_cast<double>(r.accepted)});
    rep.tables["frequency.csv"] = fcsv;
    rep.checks.push_back(make_check("frequency_within_factor_2", ratio_stat,
                                    1.0, "frequency.csv",
                                    "value:ratio_stat"));
    rep.replicas = r.attempted;
    rep.meta_json = meta.dump();
    return;
  }
  if (cfg.kind == "small-deviation") {
    RegimeConfig rc;
    rc.model = model;
    rc.n = p.value("n", 300);
    rc.m = 0;
    rc.phi = p.value("phi", 3.0);
    rc.sampler = p.value("sampler", std::string("env_importance")) ==
                         std::string("brute_force")
                     ? RegimeSampler::BruteForce
                     : RegimeSampler::EnvImportance;
    rc.target_accepted = p.value("target_accepted", 2'000);
    rc.min_accepted = p.value("min_accepted", 1'000);
    rc.seed = cfg.seed;
    RegimeReport r = small_deviation_experiment(rc);
    const double ar = model.family.stable_target.alpha *
                      model.family.stable_target.rho;
    auto reference = [ar](double y) {
      if (y <= 0.0) return 0.0;
      if (y >= 1.0) return 1.0;
      return std::pow(y, ar + 1.0);
    };
    double ks = 0.0;
    rep.tables["cdf.csv"] = cdf_table_and_ks(r.cdf, reference, &ks);
    ks = replay_statistic(rep.tables["cdf.csv"], "ks");
    rep.checks.push_back(make_check("small_deviation_ks", ks,
                                    tol(t, "ks", 0.15), "cdf.csv", "ks"));
    rep.replicas = r.attempted;
    rep.meta_json = meta.dump();
    return;
  }
  if (cfg.kind == "tcond") {
    TcondConfig tc;
    tc.model = model;
    tc.n = p.value("n", 400);
    tc.m = p.value("m", 40);
    tc.phi = p.value("phi", 2.0);
    tc.z = p.value("z", 1.0);
    tc.k = p.value("k", 1);
    tc.env_draws = p.value("env_draws", 40'000);
    tc.h_env_samples = p.value("h_env_samples", 10'000);
    tc.seed = cfg.seed;
    TcondReport r = verify_Tcond(tc, *tables.laws);
    Csv tcsv;
    tcsv.header = {"lhs", "lhs_stderr", "A1_z", "h_inf", "h_inf_stderr",
                   "rhs", "abs_diff", "horizon_delta"};
    tcsv.rows.push_back({r.lhs, r.lhs_stderr, r.a1_z, r.h_inf,
                         r.h_inf_stderr, r.rhs, std::fabs(r.lhs - r.rhs),
                         r.horizon_doubling_delta});
    rep.tables["tcond.csv"] = tcsv;
    rep.checks.push_back(make_check("tcond_lhs_vs_rhs",
                                    std::fabs(r.lhs - r.rhs),
                                    tol(t, "gap", 0.1), "tcond.csv",
                                    "value:abs_diff"));
    rep.replicas = tc.env_draws + tc.h_env_samples;
    rep.meta_json = meta.dump();
    return;
  }
  throw InvalidConfig("unhandled kind: " + cfg.kind);
}

}  // namespace

CanonicalTables build_canonical_tables(const CanonicalConfig& cfg) {
  CanonicalTables t;
  t.family = make_lazy_lattice(cfg.lattice_p);

  MeanderConfig mc;
  mc.n_steps = cfg.meander_steps;
  mc.samples = cfg.meander_samples;
  mc.seed = cfg.seed;
  mc.threads = cfg.threads;
  t.meander_minus = std::make_shared<MeanderTable>(
      estimate_meander_density(t.family, -1, mc));
  mc.stream_base = 1ull << 24;
  t.meander_plus = std::make_shared<MeanderTable>(
      estimate_meander_density(t.family, +1, mc));

  BridgeConfig bc;
  bc.n_steps = cfg.bridge_steps;
  for (double a = 0.0; a <= 4.4 + 1e-9; a += 0.1) bc.a_grid.push_back(a);
  for (double b = 0.0; b <= 2.4 + 1e-9; b += 0.05) bc.b_grid.push_back(b);
  t.bridge = std::make_shared<BridgePositivityTable>(
      bridge_positivity_dp(t.family, bc));

  t.density = std::make_shared<DensityEvaluator>(t.family.stable_target, 9.0,
                                                 1800, 1e-9);
  std::vector<double> rgrid;
  for (double x = 0.0; x <= 64.0 + 1e-9; x += 1.0) rgrid.push_back(x);
  t.vplus = std::make_shared<RenewalTable>(
      exact_renewal_lazy(t.family, RenewalKind::Vplus, rgrid));
  t.vminus = std::make_shared<RenewalTable>(
      exact_renewal_lazy(t.family, RenewalKind::Vminus, rgrid));

  ConstantsConfig cc;
  cc.seed = cfg.seed ^ 0xC0457;
  t.constants =
      estimate_constants(t.family, *t.meander_minus, *t.meander_plus, cc);

  t.laws = std::make_shared<LimitLawEval>(
      t.family.stable_target, t.constants.c_star(), t.meander_minus, t.bridge,
      t.density, 1e-8);

  json prov;
  prov["family"] = t.family.describe();
  prov["meander"] = {{"n_steps", t.meander_minus->provenance.n_steps},
                     {"samples", t.meander_minus->provenance.samples},
                     {"bandwidth", t.meander_minus->provenance.bandwidth},
                     {"seed", t.meander_minus->provenance.seed}};
  prov["bridge"] = {{"n_steps", t.bridge->provenance.n_steps},
                    {"bias_probe", t.bridge->bias_probe}};
  prov["c_star"] = {{"ladder", t.constants.c_star_ladder.value},
                    {"meander", t.constants.c_star_meander.value}};
  t.provenance_json = prov.dump();
  return t;
}

// ----------------------------------------------------------- public API --

ExperimentConfig parse_config(const std::string& json_text) {
  json j = parse_json(json_text, "config");
  ExperimentConfig cfg;
  cfg.kind = j.at("kind").get<std::string>();
  cfg.sub = j.value("sub", "");
  if (!j.contains("seed") || !j.contains("partitions"))
    throw InvalidConfig("seed and partitions are mandatory");
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.partitions = j.at("partitions").get<std::size_t>();
  if (cfg.partitions == 0) throw InvalidConfig("partitions must be >= 1");
  cfg.out_dir = j.value("out", "");
  cfg.cache_dir = j.value("cache", "");
  cfg.params_json = j.value("params", json::object()).dump();
  const json tols = j.value("tolerances", json::object());
  cfg.tolerances_json = tols.dump();
  for (const auto& [k, v] : tols.items()) {
    if (!v.is_number() || v.get<double>() <= 0.0)
      throw InvalidConfig("tolerance " + k + " must be positive");
  }
  return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["kind"] = cfg.kind;
  if (!cfg.sub.empty()) j["sub"] = cfg.sub;
  j["seed"] = cfg.seed;
  j["partitions"] = cfg.partitions;
  j["out"] = cfg.out_dir;
  j["cache"] = cfg.cache_dir;
  j["params"] = json::parse(cfg.params_json);
  j["tolerances"] = json::parse(cfg.tolerances_json);
  return j.dump(2);
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentReport rep;
  rep.config = cfg;
  const json p = parse_json(cfg.params_json, "params");
  const json t = parse_json(cfg.tolerances_json, "tolerances");

  if (cfg.kind == "stable-check") {
    run_stable_check(cfg, p, t, rep);
  } else if (cfg.kind == "walk-check") {
    run_walk_check(cfg, p, t, rep);
  } else if (cfg.kind == "limit-law" || cfg.kind == "bpre-regime" ||
             cfg.kind == "small-deviation" || cfg.kind == "tcond" ||
             cfg.kind == "b2-check") {
    run_model_experiment(cfg, p, t, rep);
  } else {
    throw InvalidConfig("unknown experiment kind: " + cfg.kind);
  }

  rep.all_pass = true;
  for (const auto& c : rep.checks) rep.all_pass = rep.all_pass && c.pass;
  rep.wallclock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  json meta = json::parse(rep.meta_json.empty() ? "{}" : rep.meta_json);
  meta["replicas"] = rep.replicas;
  rep.meta_json = meta.dump();
  return rep;
}

std::filesystem::path write_report(const ExperimentReport& report,
                                   const fs::path& dir) {
  fs::create_directories(dir);
  std::vector<std::string> files;
  write_text_atomic(dir / "config.json", config_to_json(report.config) + "\n");
  files.push_back("config.json");
  for (const auto& [name, csv] : report.tables) {
    write_text_atomic(dir / name, csv.to_string());
    files.push_back(name);
  }
  json r;
  r["all_pass"] = report.all_pass;
  r["wallclock_seconds"] = report.wallclock_seconds;
  r["meta"] = json::parse(report.meta_json);
  r["checks"] = json::array();
  for (const auto& c : report.checks) {
    json e;
    e["name"] = c.name;
    e["statistic"] = c.statistic;
    e["threshold"] = c.threshold;
    e["pass"] = c.pass;
    e["table"] = c.table;
    e["mode"] = c.mode;
    r["checks"].push_back(e);
  }
  write_text_atomic(dir / "report.json", r.dump(2) + "\n");
  files.push_back("report.json");
  return write_manifest(dir, files, "{}");
}

bool replay_verdict(const fs::path& dir, std::string* why) {
  json r;
  try {
    r = json::parse(read_text(dir / "report.json"));
  } catch (const std::exception& e) {
    if (why) *why = e.what();
    return false;
  }
  for (const auto& c : r.at("checks")) {
    const std::string table = c.at("table").get<std::string>();
    const std::string mode = c.at("mode").get<std::string>();
    if (table.empty()) continue;
    Csv csv;
    try {
      csv = parse_csv(read_text(dir / table));
    } catch (const std::exception& e) {
      if (why) *why = e.what();
      return false;
    }
    double stat;
    try {
      stat = replay_statistic(csv, mode);
    } catch (const std::exception& e) {
      if (why) *why = std::string("replay ") + table + ": " + e.what();
      return false;
    }
    const bool pass = stat <= c.at("threshold").get<double>();
    if (pass != c.at("pass").get<bool>()) {
      if (why)
        *why = "check " + c.at("name").get<std::string>() +
               " verdict mismatch on replay";
      return false;
    }
  }
  return true;
}

}  // namespace walklab
