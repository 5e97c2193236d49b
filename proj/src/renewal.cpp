#include "walklab/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "walklab/errors.hpp"

namespace walklab {

namespace {

void require_lazy(const IncrementFamily& f, const char* what) {
  if (f.kind != FamilyKind::LazyLattice)
    throw BadFamilyParams(std::string(what) + " needs the lazy lattice family");
}

// One step of the strictly-negative DP: v[h] = P(S_1<0,...,S_k<0, S_k=-h),
// h = 1..k. Returns the mass stepping to exactly 0 at k+1.
struct NegativeDp {
  explicit NegativeDp(double p) : p_(p), r_(1.0 - 2.0 * p) {}

  // advance from length k to k+1; v indexed by depth h >= 1
  void advance(std::vector<double>& v, std::vector<double>& next) const {
    const std::size_t m = v.size();
    next.assign(m + 1, 0.0);
    for (std::size_t h = 1; h < m; ++h) {
      const double mass = v[h];
      if (mass == 0.0) continue;
      next[h] += r_ * mass;
      next[h + 1] += p_ * mass;
      if (h > 1) next[h - 1] += p_ * mass;
      // h == 1 stepping up exits the negative half-line
    }
    next.resize(m + 1);
  }

  double p_;
  double r_;
};

}  // namespace

ZetaEstimate estimate_zeta(const IncrementFamily& f, std::size_t horizon) {
  ZetaEstimate z;
  z.horizon = horizon;
  if (!f.lattice) return z;  // atomless increments never hit 0 exactly
  require_lazy(f, "estimate_zeta");
  const double p = f.p, r = 1.0 - 2.0 * p;

  // v[h] = P(S_1<0,...,S_n<0, S_n = -h); term_{n+1} = p * v[1].
  std::vector<double> v(2, 0.0), next;
  v[1] = p;  // after one step
  z.series.push_back(r);  // n = 1: P(S_1 = 0)
  NegativeDp dp(p);
  for (std::size_t n = 2; n <= horizon; ++n) {
    z.series.push_back(p * v[1]);
    dp.advance(v, next);
    v.swap(next);
  }
  for (double t : z.series) z.value += t;
  // Tail of the first-return series decays like n^{-3/2}.
  const double last = z.series.back();
  const double c_fit = last * std::pow(static_cast<double>(horizon), 1.5);
  z.truncation_bound = 2.0 * c_fit / std::sqrt(static_cast<double>(horizon));
  return z;
}

ZetaEstimate estimate_zeta_descending(const IncrementFamily& f,
                                      std::size_t horizon) {
  ZetaEstimate z;
  z.horizon = horizon;
  if (!f.lattice) return z;
  require_lazy(f, "estimate_zeta");
  // Mirror of the ascending series; for the symmetric lazy lattice the DP
  // is identical, but keep the computation on the positive half-line so the
  // duality is exercised rather than assumed.
  const double p = f.p, r = 1.0 - 2.0 * p;
  std::vector<double> v(2, 0.0), next;
  v[1] = p;  // S_1 = +1
  NegativeDp dp(p);
  z.series.push_back(r);
  for (std::size_t n = 2; n <= horizon; ++n) {
    z.series.push_back(p * v[1]);
    dp.advance(v, next);
    v.swap(next);
  }
  for (double t : z.series) z.value += t;
  const double last = z.series.back();
  const double c_fit = last * std::pow(static_cast<double>(horizon), 1.5);
  z.truncation_bound = 2.0 * c_fit / std::sqrt(static_cast<double>(horizon));
  return z;
}

std::vector<double> stay_strictly_negative_exact(const IncrementFamily& f,
                                                 std::size_t N) {
  require_lazy(f, "stay_strictly_negative_exact");
  const double p = f.p;
  std::vector<double> out(N + 1, 0.0);
  out[0] = 1.0;
  std::vector<double> v(2, 0.0), next;
  v[1] = p;
  NegativeDp dp(p);
  for (std::size_t n = 1; n <= N; ++n) {
    double total = 0.0;
    for (double m : v) total += m;
    out[n] = total;
    if (n < N) {
      dp.advance(v, next);
      v.swap(next);
    }
  }
  return out;
}

std::vector<double> stay_strictly_positive_exact(const IncrementFamily& f,
                                                 std::size_t N) {
  // Lazy lattice is symmetric under negation.
  return stay_strictly_negative_exact(f, N);
}

double stay_strictly_negative_mc(const IncrementFamily& f, std::size_t n,
                                 std::size_t budget, Philox& rng) {
  std::size_t alive = 0;
  for (std::size_t i = 0; i < budget; ++i) {
    double s = 0.0;
    bool ok = true;
    for (std::size_t k = 0; k < n; ++k) {
      s += f.sample_step(rng);
      if (s >= 0.0) {
        ok = false;
        break;
      }
    }
    if (ok) ++alive;
  }
  return static_cast<double>(alive) / static_cast<double>(budget);
}

double stay_strictly_positive_mc(const IncrementFamily& f, std::size_t n,
                                 std::size_t budget, Philox& rng) {
  std::size_t alive = 0;
  for (std::size_t i = 0; i < budget; ++i) {
    double s = 0.0;
    bool ok = true;
    for (std::size_t k = 0; k < n; ++k) {
      s += f.sample_step(rng);
      if (s <= 0.0) {
        ok = false;
        break;
      }
    }
    if (ok) ++alive;
  }
  return static_cast<double>(alive) / static_cast<double>(budget);
}

double RenewalTable::eval(double x) const {
  if (x < 0.0) return 0.0;
  if (grid.empty()) throw EmptySample("renewal table empty");
  if (x <= grid.front()) return values.front();
  if (x >= grid.back()) {
    // Regularly varying extrapolation V(x) ~ V(x_max) (x/x_max)^{alpha rho}.
    const double xm = std::max(grid.back(), 1e-12);
    return values.back() * std::pow(x / xm, alpha_rho);
  }
  auto it = std::upper_bound(grid.begin(), grid.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - grid.begin());
  const double t = (x - grid[i - 1]) / (grid[i] - grid[i - 1]);
  return values[i - 1] * (1.0 - t) + values[i] * t;
}

namespace {

bool ascending_kind(RenewalKind k) {
  return k == RenewalKind::Vplus || k == RenewalKind::VplusUnder ||
         k == RenewalKind::VplusHat;
}
bool strict_inequality(RenewalKind k) {
  return k == RenewalKind::VplusUnder || k == RenewalKind::VminusUnder;
}
bool hat_kind(RenewalKind k) {
  return k == RenewalKind::VplusHat || k == RenewalKind::VminusHat;
}

}  // namespace

RenewalTable estimate_renewal(const IncrementFamily& f, RenewalKind kind,
                              const std::vector<double>& grid,
                              const RenewalConfig& cfg) {
  if (grid.empty()) throw EmptySample("renewal grid empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] < 0.0 || (i && grid[i] <= grid[i - 1]))
      throw InvalidConfig("renewal grid must be nonnegative increasing");
  }
  const bool asc = ascending_kind(kind);
  const bool strict_cmp = strict_inequality(kind);
  const bool strict_ladder = hat_kind(kind);

  RenewalTable t;
  t.kind = kind;
  t.grid = grid;
  t.alpha_rho = f.stable_target.alpha *
                (asc ? f.stable_target.rho : 1.0 - f.stable_target.rho);
  const std::size_t G = grid.size();
  std::vector<double> sum(G, 0.0), sumsq(G, 0.0);
  std::vector<double> counts(G);
  const double xmax = grid.back();
  std::size_t zeta_hits = 0, zeta_paths = 0;

  for (std::size_t path = 0; path < cfg.paths; ++path) {
    Philox rng(cfg.seed, cfg.stream_base + path);
    std::fill(counts.begin(), counts.end(), 1.0);  // k = 0 ladder at height 0
    if (strict_cmp)
      for (std::size_t g = 0; g < G; ++g) counts[g] = grid[g] > 0.0 ? 1.0 : 0.0;
    double s = 0.0;
    double ladder = 0.0;       // current weak ladder value (signed)
    double ladder_strict = 0.0;
    bool first_ladder_seen = false;
    for (std::size_t k = 0; k < cfg.horizon; ++k) {
      s += f.sample_step(rng);
      const double v = asc ? s : -s;
      if (v >= ladder) {
        if (!first_ladder_seen) {
          first_ladder_seen = true;
          ++zeta_paths;
          if (v == 0.0) ++zeta_hits;
        }
        if (!strict_ladder) {
          for (std::size_t g = 0; g < G; ++g)
            if (strict_cmp ? v < grid[g] : v <= grid[g]) counts[g] += 1.0;
        }
        ladder = v;
      }
      if (v > ladder_strict) {
        if (strict_ladder) {
          for (std::size_t g = 0; g < G; ++g)
            if (strict_cmp ? v < grid[g] : v <= grid[g]) counts[g] += 1.0;
        }
        ladder_strict = v;
      }
      if (ladder_strict > xmax && ladder > xmax) break;  // no further hits
    }
    for (std::size_t g = 0; g < G; ++g) {
      sum[g] += counts[g];
      sumsq[g] += counts[g] * counts[g];
    }
  }

  const double n = static_cast<double>(cfg.paths);
  t.values.resize(G);
  t.stderrs.resize(G);
  for (std::size_t g = 0; g < G; ++g) {
    t.values[g] = sum[g] / n;
    const double var = (sumsq[g] / n - t.values[g] * t.values[g]) / n;
    t.stderrs[g] = var > 0.0 ? std::sqrt(var) : 0.0;
    if (t.values[g] > 0.0 && t.stderrs[g] / t.values[g] > cfg.max_rel_error)
      throw BudgetTooSmall("renewal estimate above 10% relative error");
  }
  t.zeta = zeta_paths ? static_cast<double>(zeta_hits) / zeta_paths : 0.0;
  return t;
}

RenewalTable exact_renewal_lazy(const IncrementFamily& f, RenewalKind kind,
                                const std::vector<double>& grid) {
  require_lazy(f, "exact_renewal_lazy");
  RenewalTable t;
  t.kind = kind;
  t.grid = grid;
  t.exact = true;
  t.zeta = 1.0 - f.p;
  t.alpha_rho = 1.0;  // alpha=2, rho=1/2
  const bool strict_cmp = strict_inequality(kind);
  const bool strict_ladder = hat_kind(kind);
  t.values.reserve(grid.size());
  t.stderrs.assign(grid.size(), 0.0);
  for (double x : grid) {
    if (x < 0.0) throw InvalidConfig("renewal grid must be nonnegative");
    // number of heights counted: <= x uses floor(x)+1, < x uses ceil(x).
    const double levels = strict_cmp ? std::ceil(x) : std::floor(x) + 1.0;
    t.values.push_back(strict_ladder ? levels : levels / f.p);
  }
  return t;
}

}  // namespace walklab
