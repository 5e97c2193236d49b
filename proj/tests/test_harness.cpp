#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "walklab/acceptance.hpp"
#include "walklab/errors.hpp"
#include "walklab/experiment.hpp"
#include "walklab/io.hpp"
#include "walklab/rng.hpp"
#include "walklab/stats.hpp"

using namespace walklab;
namespace fs = std::filesystem;

TEST_CASE("empirical cdf basics") {
  EmpiricalCdf c = empirical_cdf({1.0, 2.0, 3.0});
  CHECK(c.cdf == std::vector<double>{1.0 / 3, 2.0 / 3, 1.0});
  CHECK(c(0.5) == 0.0);
  CHECK(c(1.0) == doctest::Approx(1.0 / 3));
  CHECK(c(2.5) == doctest::Approx(2.0 / 3));

  EmpiricalCdf one = empirical_cdf({5.0, 1.0}, {0.0, 3.0});
  CHECK(one(1.0) == 1.0);  // all weight on a single sample
  CHECK(one(0.9) == 0.0);

  CHECK_THROWS_AS(empirical_cdf({}), EmptySample);
  CHECK_THROWS_AS(empirical_cdf({1.0}, {-1.0}), EmptySample);
}

TEST_CASE("weighted cdf equals the resampled multiset for integer weights") {
  const std::vector<double> xs = {0.3, -1.0, 2.0, 0.9};
  const std::vector<double> ws = {2, 1, 3, 2};
  EmpiricalCdf weighted = empirical_cdf(xs, ws);
  std::vector<double> resampled;
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (int k = 0; k < int(ws[i]); ++k) resampled.push_back(xs[i]);
  EmpiricalCdf plain = empirical_cdf(resampled);
  for (double x : {-2.0, -1.0, 0.3, 0.9, 1.5, 2.0, 3.0})
    CHECK(weighted(x) == doctest::Approx(plain(x)).epsilon(1e-15));
}

TEST_CASE("ks statistic examples and the refinement oracle") {
  EmpiricalCdf single = empirical_cdf({0.5});
  auto uniform = [](double x) { return std::clamp(x, 0.0, 1.0); };
  CHECK(ks_statistic(single, uniform) == doctest::Approx(0.5));

  EmpiricalCdf c = empirical_cdf({0.1, 0.4, 0.45, 0.8, 0.99});
  CHECK(ks_between(c, c) == 0.0);
  const double ks = ks_statistic(c, uniform);
  // brute force over a 10x refined grid, checking both step sides
  double brute = 0.0;
  for (double x = -0.05; x <= 1.05; x += 0.001)
    brute = std::max(brute, std::fabs(c(x) - uniform(x)));
  for (double p : c.points) {
    brute = std::max(brute, std::fabs(c(p) - uniform(p)));
    brute = std::max(brute, std::fabs(c(p - 1e-12) - uniform(p)));
  }
  CHECK(std::fabs(ks - brute) < 1e-9);
}

TEST_CASE("incomplete gamma and chi-square tails") {
  // gamma_q(1/2, x) = erfc(sqrt(x))
  for (double x : {0.1, 0.5, 1.0, 2.5, 7.0})
    CHECK(gamma_q(0.5, x) == doctest::Approx(std::erfc(std::sqrt(x))).epsilon(1e-10));
  for (double x : {0.2, 1.0, 3.0})
    CHECK(gamma_p(1.7, x) + gamma_q(1.7, x) == doctest::Approx(1.0));
  // chi-square with 2 dof has survival exp(-x/2)
  for (double x : {0.5, 2.0, 6.0})
    CHECK(chi_square_sf(x, 2.0) == doctest::Approx(std::exp(-x / 2)).epsilon(1e-10));
}

TEST_CASE("two-sample chi-square sanity") {
  Philox rng(71, 0);
  std::vector<double> a(4000), b(4000), c(4000);
  for (double& x : a) x = rng.normal();
  for (double& x : b) x = rng.normal();
  for (double& x : c) x = rng.normal() + 0.4;
  CHECK(chi_square_two_sample(a, b).p_value > 1e-4);
  CHECK(chi_square_two_sample(a, c).p_value < 1e-6);
}

TEST_CASE("philox streams: determinism and independence") {
  Philox a(123, 7), b(123, 7), c(123, 8), d(124, 7);
  std::vector<std::uint64_t> va, vb;
  for (int i = 0; i < 64; ++i) {
    va.push_back(a());
    vb.push_back(b());
  }
  CHECK(va == vb);
  bool differs_stream = false, differs_seed = false;
  for (int i = 0; i < 64; ++i) {
    if (c() != va[std::size_t(i)]) differs_stream = true;
    if (d() != va[std::size_t(i)]) differs_seed = true;
  }
  CHECK(differs_stream);
  CHECK(differs_seed);

  // uniforms live strictly inside (0,1) and have the right moments
  Philox u(3, 3);
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < 200'000; ++i) {
    const double x = u.uniform();
    CHECK(x > 0.0);
    CHECK(x < 1.0);
    sum += x;
    sum2 += x * x;
  }
  CHECK(sum / 200'000 == doctest::Approx(0.5).epsilon(0.01));
  CHECK(sum2 / 200'000 == doctest::Approx(1.0 / 3).epsilon(0.01));
}

TEST_CASE("discrete distribution helpers match their moments") {
  Philox rng(72, 0);
  const std::size_t n = 200'000;
  double s = 0, s2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = double(poisson_draw(rng, 4.0));
    s += x;
    s2 += x * x;
  }
  CHECK(s / n == doctest::Approx(4.0).epsilon(0.01));
  CHECK(s2 / n - (s / n) * (s / n) == doctest::Approx(4.0).epsilon(0.03));

  s = s2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = double(poisson_draw(rng, 80.0));
    s += x;
    s2 += x * x;
  }
  CHECK(s / n == doctest::Approx(80.0).epsilon(0.005));
  CHECK(s2 / n - (s / n) * (s / n) == doctest::Approx(80.0).epsilon(0.03));

  s = s2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = double(binomial_draw(rng, 5000, 0.3));
    s += x;
    s2 += x * x;
  }
  CHECK(s / n == doctest::Approx(1500.0).epsilon(0.002));
  CHECK(s2 / n - (s / n) * (s / n) == doctest::Approx(1050.0).epsilon(0.03));

  s = s2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = double(negative_binomial_draw(rng, 1000, 0.25));
    s += x;
    s2 += x * x;
  }
  CHECK(s / n == doctest::Approx(3000.0).epsilon(0.005));
  CHECK(s2 / n - (s / n) * (s / n) == doctest::Approx(12000.0).epsilon(0.05));
}

TEST_CASE("csv round trip") {
  Csv csv;
  csv.header = {"a", "b"};
  csv.rows = {{1.5, -2.0}, {0.25, 1e-9}};
  Csv back = parse_csv(csv.to_string());
  CHECK(back.header == csv.header);
  CHECK(back.rows == csv.rows);
}

TEST_CASE("manifest write, verify, tamper") {
  const fs::path dir = fs::temp_directory_path() / "walklab_manifest_test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_text_atomic(dir / "t1.csv", "x\n1\n");
  write_text_atomic(dir / "t2.csv", "y\n2\n");
  const fs::path manifest = write_manifest(dir, {"t1.csv", "t2.csv"}, "{}");
  std::string why;
  CHECK(verify_manifest(manifest, &why));
  write_text_atomic(dir / "t2.csv", "y\n3\n");
  CHECK_FALSE(verify_manifest(manifest, &why));
  CHECK(why.find("t2.csv") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("experiment: determinism, partition contract, replay") {
  ExperimentConfig cfg;
  cfg.kind = "stable-check";
  cfg.seed = 99;
  cfg.partitions = 4;
  cfg.params_json =
      R"({"alpha":2,"beta":0,"scale":0.5,"cf_samples":40000,"ks_samples":20000,"rho_budget":1000})";
  ExperimentReport r1 = run_experiment(cfg);
  ExperimentReport r2 = run_experiment(cfg);
  REQUIRE(r1.tables.size() == r2.tables.size());
  for (const auto& [name, csv] : r1.tables)
    CHECK(csv.to_string() == r2.tables.at(name).to_string());
  CHECK(r1.all_pass);

  // different partition count: a different stream assignment, still passing
  ExperimentConfig cfg8 = cfg;
  cfg8.partitions = 8;
  ExperimentReport r8 = run_experiment(cfg8);
  CHECK(r8.all_pass);
  CHECK(r8.tables.at("ecf.csv").to_string() !=
        r1.tables.at("ecf.csv").to_string());

  const fs::path dir = fs::temp_directory_path() / "walklab_report_test";
  fs::remove_all(dir);
  const fs::path manifest = write_report(r1, dir);
  CHECK(verify_manifest(manifest));
  std::string why;
  CHECK(replay_verdict(dir, &why));
  // corrupting a stored table must break the replayed verdict
  Csv ecf = parse_csv(read_text(dir / "ecf.csv"));
  for (auto& row : ecf.rows) row[5] += 1.0;  // mod_diff column
  write_text_atomic(dir / "ecf.csv", ecf.to_string());
  CHECK_FALSE(replay_verdict(dir, &why));
  fs::remove_all(dir);
}

TEST_CASE("config parsing rules") {
  CHECK_THROWS_AS(parse_config("{\"kind\":\"stable-check\"}"), InvalidConfig);
  CHECK_THROWS_AS(
      parse_config(
          R"({"kind":"stable-check","seed":1,"partitions":0})"),
      InvalidConfig);
  CHECK_THROWS_AS(
      parse_config(
          R"({"kind":"x","seed":1,"partitions":2,"tolerances":{"ks":-1}})"),
      InvalidConfig);
  ExperimentConfig ok = parse_config(
      R"({"kind":"walk-check","sub":"renewal","seed":5,"partitions":2})");
  CHECK(ok.kind == "walk-check");
  CHECK(ok.sub == "renewal");
  CHECK_THROWS_AS(run_experiment(parse_config(
                      R"({"kind":"nope","seed":1,"partitions":1})")),
                  InvalidConfig);
}

TEST_CASE("walk experiments run end to end") {
  ExperimentConfig cfg;
  cfg.kind = "walk-check";
  cfg.sub = "clt";
  cfg.seed = 100;
  cfg.partitions = 2;
  cfg.params_json = R"({"family":"lazy_lattice","p":0.3,"n":1000,"paths":10000})";
  ExperimentReport rep = run_experiment(cfg);
  CHECK(rep.all_pass);

  cfg.sub = "kernel";
  cfg.params_json = R"({"family":"lazy_lattice","p":0.3,"N":30})";
  const fs::path cache = fs::temp_directory_path() / "walklab_cache_test";
  fs::remove_all(cache);
  cfg.cache_dir = cache.string();
  ExperimentReport krep = run_experiment(cfg);
  CHECK(krep.all_pass);
  // kernel row landed in the cache under its content key
  std::vector<double> row;
  CHECK(cache_load_kernel_row(
      cache, kernel_cache_key(make_lazy_lattice(0.3), 30, 0), &row));
  CHECK(row.size() == 31);
  fs::remove_all(cache);
}
