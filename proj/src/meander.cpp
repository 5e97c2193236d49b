#include "walklab/meander.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "walklab/errors.hpp"

namespace walklab {

double MeanderTable::eval(double w) const {
  if (grid.empty()) throw EmptySample("meander table empty");
  if (w < grid.front() || w > grid.back()) return 0.0;
  const double step = grid[1] - grid[0];
  const std::size_t i = std::min(
      static_cast<std::size_t>((w - grid.front()) / step), grid.size() - 2);
  const double t = (w - grid[i]) / step;
  return value[i] * (1.0 - t) + value[i + 1] * t;
}

double MeanderTable::moment(double power) const {
  double acc = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double f0 = std::pow(grid[i - 1], power) * value[i - 1];
    const double f1 = std::pow(grid[i], power) * value[i];
    acc += 0.5 * (f0 + f1) * (grid[i] - grid[i - 1]);
  }
  return acc;
}

double MeanderTable::moment_stderr(double power) const {
  // Grid values share kernel-smoothing correlations over ~bandwidth, so
  // treat blocks of width h as fully correlated rather than independent.
  double var = 0.0;
  const double step = grid.size() > 1 ? grid[1] - grid[0] : 1.0;
  const double block = std::max(1.0, provenance.bandwidth / step);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double wgt = std::pow(grid[i], power) * step;
    var += wgt * wgt * stderr_[i] * stderr_[i] * block;
  }
  return std::sqrt(var);
}

double MeanderTable::mass() const { return trapezoid_mass(grid, value); }

MeanderTable estimate_meander_density(const IncrementFamily& f, int sign,
                                      const MeanderConfig& cfg) {
  MeanderTable t;
  t.sign = sign;
  t.params = f.stable_target;
  const double a_n = scaling_law(f).a(static_cast<double>(cfg.n_steps));
  const double flip = sign < 0 ? -1.0 : 1.0;

  const std::size_t threads = std::max<std::size_t>(1, cfg.threads);
  const std::size_t quota = (cfg.samples + threads - 1) / threads;
  std::vector<std::vector<double>> endpoints(threads);
  std::vector<std::uint8_t> exhausted(threads, 0);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      Philox rng(cfg.seed, cfg.stream_base + w);
      auto& acc = endpoints[w];
      acc.reserve(quota);
      std::size_t attempts = 0;
      const std::size_t budget = cfg.attempt_budget / threads;
      while (acc.size() < quota && attempts < budget) {
        ++attempts;
        double s = 0.0;
        bool alive = true;
        for (std::size_t k = 0; k < cfg.n_steps; ++k) {
          s += flip * f.sample_step(rng);
          if (s < 0.0) {
            alive = false;
            break;
          }
        }
        if (alive) acc.push_back(s / a_n);
      }
      if (acc.size() < quota) exhausted[w] = 1;
    });
  }
  for (auto& th : pool) th.join();
  std::vector<double> sample;
  for (auto& e : endpoints) sample.insert(sample.end(), e.begin(), e.end());
  for (std::uint8_t e : exhausted)
    if (e) throw BudgetTooSmall("meander attempt budget exhausted");

  double h = cfg.bandwidth;
  if (h <= 0.0) h = silverman_bandwidth(sample);
  std::vector<double> grid;
  for (double g = 0.0; g <= cfg.grid_max + 1e-12; g += cfg.grid_step)
    grid.push_back(g);
  KdeTable kde = kde_positive(sample, grid, h);
  t.grid = std::move(kde.grid);
  t.value = std::move(kde.value);
  t.stderr_ = std::move(kde.stderr_);
  t.provenance = {f.describe(), cfg.n_steps, sample.size(), h, cfg.seed,
                  scaling_law(f).a_coeff};
  return t;
}

double BridgePositivityTable::eval(double a, double b) const {
  auto locate = [](const std::vector<double>& g, double v, double& frac) {
    if (v <= g.front()) {
      frac = 0.0;
      return std::size_t(0);
    }
    if (v >= g.back()) {
      frac = 1.0;
      return g.size() - 2;
    }
    auto it = std::upper_bound(g.begin(), g.end(), v);
    std::size_t i = static_cast<std::size_t>(it - g.begin()) - 1;
    if (i > g.size() - 2) i = g.size() - 2;
    frac = (v - g[i]) / (g[i + 1] - g[i]);
    return i;
  };
  double fa, fb;
  const std::size_t ia = locate(a_grid, a, fa);
  const std::size_t ib = locate(b_grid, b, fb);
  const double v00 = value[ia][ib], v01 = value[ia][ib + 1];
  const double v10 = value[ia + 1][ib], v11 = value[ia + 1][ib + 1];
  return (1.0 - fa) * ((1.0 - fb) * v00 + fb * v01) +
         fa * ((1.0 - fb) * v10 + fb * v11);
}

BridgePositivityTable bridge_positivity_dp(const IncrementFamily& lazy,
                                           const BridgeConfig& cfg) {
  if (cfg.a_grid.size() < 2 || cfg.b_grid.size() < 2)
    throw InvalidConfig("bridge grids need at least two points");
  const std::size_t n = cfg.n_steps;
  const double a_n = scaling_law(lazy).a(static_cast<double>(n));
  BridgePositivityTable t;
  t.params = lazy.stable_target;
  t.exact = true;
  t.provenance = {lazy.describe(), n, 0, 0.0, 0, scaling_law(lazy).a_coeff};

  const std::vector<double> pmf = lattice_pmf(lazy, n);
  const std::vector<double> pmf_half = lattice_pmf(lazy, n / 2);
  const auto off = static_cast<std::int64_t>(n);
  const auto off_half = static_cast<std::int64_t>(n / 2);
  const double a_half = scaling_law(lazy).a(static_cast<double>(n / 2));

  for (double a : cfg.a_grid) {
    const std::int64_t x = std::llround(a * a_n);
    t.a_grid.push_back(static_cast<double>(x) / a_n);
    const std::vector<double> row = kernel_final_row(lazy, n, x);
    const std::vector<double> row_half = kernel_final_row(lazy, n / 2, x / 2);
    std::vector<double> vals, probe;
    for (double b : cfg.b_grid) {
      const std::int64_t y = std::llround(b * a_n);
      const double denom = pmf[y - x + off];
      if (denom <= 0.0) throw EmptyBin("no endpoint mass at requested b");
      const double c =
          (y >= 0 && y < static_cast<std::int64_t>(row.size())) ? row[y] / denom
                                                                : 0.0;
      vals.push_back(std::min(c, 1.0));
      // discretization probe: same scaled point at half the walk length
      const std::int64_t y2 = std::llround(b * a_half);
      const std::int64_t x2 = x / 2;
      const double denom2 = pmf_half[y2 - x2 + off_half];
      const double c2 =
          (denom2 > 0.0 && y2 >= 0 &&
           y2 < static_cast<std::int64_t>(row_half.size()))
              ? std::min(row_half[y2] / denom2, 1.0)
              : c;
      probe.push_back(std::fabs(c2 - vals.back()));
    }
    t.value.push_back(std::move(vals));
    t.stderr_.emplace_back(cfg.b_grid.size(), 0.0);
    for (double d : probe) t.bias_probe = std::max(t.bias_probe, d);
  }
  for (double b : cfg.b_grid) {
    const std::int64_t y = std::llround(b * a_n);
    t.b_grid.push_back(static_cast<double>(y) / a_n);
  }
  return t;
}

BridgePositivityTable bridge_positivity_mc(const IncrementFamily& f,
                                           const BridgeConfig& cfg) {
  if (cfg.a_grid.size() < 2 || cfg.b_grid.size() < 2)
    throw InvalidConfig("bridge grids need at least two points");
  const std::size_t n = cfg.n_steps;
  const double a_n = scaling_law(f).a(static_cast<double>(n));
  const double half_bin = 0.5 * cfg.bin_width_scaled * a_n;
  BridgePositivityTable t;
  t.params = f.stable_target;
  t.exact = false;
  t.a_grid = cfg.a_grid;
  t.b_grid = cfg.b_grid;
  t.provenance = {f.describe(), n, cfg.paths_per_start * cfg.a_grid.size(),
                  cfg.bin_width_scaled, cfg.seed, scaling_law(f).a_coeff};

  for (std::size_t ai = 0; ai < cfg.a_grid.size(); ++ai) {
    const double x0 = cfg.a_grid[ai] * a_n;
    const std::size_t B = cfg.b_grid.size();
    std::vector<double> hit(B, 0.0), tot(B, 0.0);
    const std::size_t threads = std::max<std::size_t>(1, cfg.threads);
    std::vector<std::vector<double>> hit_w(threads, std::vector<double>(B, 0.0));
    std::vector<std::vector<double>> tot_w(threads, std::vector<double>(B, 0.0));
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        Philox rng(cfg.seed, cfg.stream_base + ai * threads + w);
        const std::size_t quota = cfg.paths_per_start / threads;
        for (std::size_t rep = 0; rep < quota; ++rep) {
          double s = x0;
          bool nonneg = true;
          for (std::size_t k = 0; k < n; ++k) {
            s += f.sample_step(rng);
            if (s < 0.0) nonneg = false;
          }
          for (std::size_t bi = 0; bi < B; ++bi) {
            if (std::fabs(s - cfg.b_grid[bi] * a_n) <= half_bin) {
              tot_w[w][bi] += 1.0;
              if (nonneg) hit_w[w][bi] += 1.0;
            }
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    for (std::size_t w = 0; w < threads; ++w)
      for (std::size_t bi = 0; bi < B; ++bi) {
        hit[bi] += hit_w[w][bi];
        tot[bi] += tot_w[w][bi];
      }
    std::vector<double> vals, errs;
    for (std::size_t bi = 0; bi < B; ++bi) {
      if (tot[bi] < 1.0) throw EmptyBin("no endpoint mass in bin");
      const double c = hit[bi] / tot[bi];
      vals.push_back(c);
      errs.push_back(std::sqrt(std::max(c * (1.0 - c), 1e-12) / tot[bi]));
    }
    t.value.push_back(std::move(vals));
    t.stderr_.push_back(std::move(errs));
  }
  return t;
}

}  // namespace walklab
