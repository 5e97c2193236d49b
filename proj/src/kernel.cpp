#include "walklab/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "walklab/errors.hpp"

namespace walklab {

namespace {

void rebuild_minima(WalkPath& path) {
  const std::size_t n = path.steps.size();
  path.min_from1.assign(n + 1, std::numeric_limits<double>::infinity());
  path.min_from0.assign(n + 1, path.positions[0]);
  for (std::size_t k = 1; k <= n; ++k) {
    path.min_from1[k] = std::min(path.min_from1[k - 1], path.positions[k]);
    path.min_from0[k] = std::min(path.min_from0[k - 1], path.positions[k]);
  }
}

}  // namespace

ConditionKernel::ConditionKernel(const IncrementFamily& f, std::size_t horizon,
                                 std::int64_t start, std::size_t max_cells)
    : family_(f), horizon_(horizon), start_(start) {
  if (f.kind != FamilyKind::LazyLattice)
    throw BadFamilyParams("ConditionKernel needs the lazy lattice family");
  if (start < 0) throw InvalidConfig("start height must be nonnegative");
  if (horizon < 1) throw InvalidConfig("horizon must be >= 1");
  height_cap_ = start + static_cast<std::int64_t>(horizon);
  const std::size_t cells =
      (horizon + 1) * static_cast<std::size_t>(height_cap_ + 1);
  if (cells > max_cells)
    throw HorizonTooLarge("kernel would need " + std::to_string(cells) +
                          " cells");
  const double p = f.p, r = 1.0 - 2.0 * p;
  rows_.resize(horizon + 1);
  rows_[0].assign(height_cap_ + 1, 0.0);
  rows_[0][start] = 1.0;
  for (std::size_t n = 1; n <= horizon; ++n) {
    const auto& prev = rows_[n - 1];
    auto& cur = rows_[n];
    cur.assign(height_cap_ + 1, 0.0);
    const std::int64_t hi = std::min<std::int64_t>(
        height_cap_, start + static_cast<std::int64_t>(n));
    for (std::int64_t h = 0; h <= hi; ++h) {
      double acc = r * prev[h];
      if (h > 0) acc += p * prev[h - 1];
      if (h + 1 <= height_cap_) acc += p * prev[h + 1];
      cur[h] = acc;
    }
  }
}

double ConditionKernel::q(std::size_t n, std::int64_t y) const {
  if (n > horizon_) throw InvalidConfig("n beyond kernel horizon");
  if (y < 0 || y > height_cap_) return 0.0;
  return rows_[n][y];
}

double ConditionKernel::survival(std::size_t n) const {
  if (n > horizon_) throw InvalidConfig("n beyond kernel horizon");
  double s = 0.0;
  for (double v : rows_[n]) s += v;
  return s;
}

double ConditionKernel::mass_at_most(std::size_t n, std::int64_t y) const {
  if (n > horizon_) throw InvalidConfig("n beyond kernel horizon");
  double s = 0.0;
  const std::int64_t hi = std::min(y, height_cap_);
  for (std::int64_t h = 0; h <= hi; ++h) s += rows_[n][h];
  return s;
}

std::int64_t ConditionKernel::sample_endpoint_at_most(std::int64_t cap,
                                                      Philox& rng) const {
  const double total = mass_at_most(horizon_, cap);
  if (total <= 0.0) throw ImpossibleEvent("no kernel mass at or below cap");
  double u = rng.uniform() * total;
  const std::int64_t hi = std::min(cap, height_cap_);
  for (std::int64_t h = 0; h <= hi; ++h) {
    u -= rows_[horizon_][h];
    if (u <= 0.0) return h;
  }
  return hi;
}

WalkPath ConditionKernel::sample_bridge(std::int64_t y_end, Philox& rng) const {
  if (y_end < 0 || y_end > height_cap_ || rows_[horizon_][y_end] <= 0.0)
    throw ImpossibleEvent("terminal height unreachable");
  const double p = family_.p, r = 1.0 - 2.0 * p;
  WalkPath path;
  path.x0 = static_cast<double>(start_);
  path.positions.assign(horizon_ + 1, 0.0);
  path.positions[horizon_] = static_cast<double>(y_end);
  std::int64_t y = y_end;
  for (std::size_t n = horizon_; n-- > 1;) {
    // P(S_n = h | S_{n+1} = y, alive) oc q_n(x,h) p(y - h)
    double w[3] = {0.0, 0.0, 0.0};  // h = y-1, y, y+1
    if (y - 1 >= 0) w[0] = q(n, y - 1) * p;
    w[1] = q(n, y) * r;
    w[2] = q(n, y + 1) * p;
    const double total = w[0] + w[1] + w[2];
    double u = rng.uniform() * total;
    std::int64_t h = y + 1;
    if (u < w[0]) {
      h = y - 1;
    } else if (u < w[0] + w[1]) {
      h = y;
    }
    path.positions[n] = static_cast<double>(h);
    y = h;
  }
  path.positions[0] = static_cast<double>(start_);
  path.steps.resize(horizon_);
  for (std::size_t k = 1; k <= horizon_; ++k)
    path.steps[k - 1] = path.positions[k] - path.positions[k - 1];
  rebuild_minima(path);
  return path;
}

WalkPath sample_conditioned(const IncrementFamily& f, std::size_t N, double x,
                            const EndSpec& end, ConditionedMode mode,
                            Philox& rng, std::size_t attempt_budget,
                            const ConditionKernel* kernel) {
  if (x < 0.0) throw InvalidConfig("start must be nonnegative");
  if (mode == ConditionedMode::DpBackward) {
    if (f.kind != FamilyKind::LazyLattice)
      throw BadFamilyParams("dp_backward needs the lattice family");
    std::optional<ConditionKernel> local;
    if (!kernel) local.emplace(f, N, static_cast<std::int64_t>(x));
    const ConditionKernel& k = kernel ? *kernel : *local;
    if (k.horizon() != N || k.start() != static_cast<std::int64_t>(x))
      throw InvalidConfig("kernel does not match requested (N, x)");
    std::int64_t y_end;
    if (end.type == EndSpec::Exact) {
      y_end = static_cast<std::int64_t>(std::llround(end.y));
      if (k.q(N, y_end) <= 0.0)
        throw ImpossibleEvent("q = 0 for requested endpoint");
    } else {
      y_end = k.sample_endpoint_at_most(
          static_cast<std::int64_t>(std::floor(end.y)), rng);
    }
    return k.sample_bridge(y_end, rng);
  }

  // Rejection: resimulate until {L_N >= 0} and the endpoint condition hold.
  const bool exact_end = end.type == EndSpec::Exact;
  if (exact_end && !f.lattice)
    throw InvalidConfig("exact endpoint conditioning needs a lattice family");
  for (std::size_t attempt = 0; attempt < attempt_budget; ++attempt) {
    WalkPath path;
    path.x0 = x;
    path.positions.assign(N + 1, 0.0);
    path.steps.assign(N, 0.0);
    path.positions[0] = x;
    double s = x;
    bool alive = true;
    for (std::size_t k = 1; k <= N; ++k) {
      const double step = f.sample_step(rng);
      s += step;
      if (s < 0.0) {
        alive = false;
        break;
      }
      path.steps[k - 1] = step;
      path.positions[k] = s;
    }
    if (!alive) continue;
    if (exact_end) {
      if (std::llround(s) != std::llround(end.y)) continue;
    } else if (s > end.y) {
      continue;
    }
    rebuild_minima(path);
    return path;
  }
  throw RejectionBudgetExceeded("no accepted path within attempt budget");
}

std::vector<double> kernel_final_row(const IncrementFamily& lazy,
                                     std::size_t n, std::int64_t x) {
  if (lazy.kind != FamilyKind::LazyLattice)
    throw BadFamilyParams("kernel_final_row needs the lazy lattice");
  const double p = lazy.p, r = 1.0 - 2.0 * p;
  const std::int64_t cap = x + static_cast<std::int64_t>(n);
  std::vector<double> cur(cap + 1, 0.0), next(cap + 1, 0.0);
  cur[x] = 1.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const std::int64_t hi =
        std::min<std::int64_t>(cap, x + static_cast<std::int64_t>(k));
    for (std::int64_t h = 0; h <= hi; ++h) {
      double acc = r * cur[h];
      if (h > 0) acc += p * cur[h - 1];
      if (h < cap) acc += p * cur[h + 1];
      next[h] = acc;
    }
    std::fill(next.begin() + hi + 1, next.end(), 0.0);
    cur.swap(next);
  }
  return cur;
}

std::vector<double> lattice_pmf(const IncrementFamily& lazy, std::size_t n) {
  if (lazy.kind != FamilyKind::LazyLattice)
    throw BadFamilyParams("lattice_pmf needs the lazy lattice");
  const double p = lazy.p, r = 1.0 - 2.0 * p;
  const std::size_t width = 2 * n + 1;
  std::vector<double> cur(width, 0.0), next(width, 0.0);
  cur[n] = 1.0;  // offset: index d + n
  for (std::size_t k = 1; k <= n; ++k) {
    for (std::size_t i = 0; i < width; ++i) {
      double acc = r * cur[i];
      if (i > 0) acc += p * cur[i - 1];
      if (i + 1 < width) acc += p * cur[i + 1];
      next[i] = acc;
    }
    cur.swap(next);
  }
  return cur;
}

double conditional_cdf_left_vicinity(const IncrementFamily& lazy,
                                     std::size_t N, std::size_t m,
                                     std::int64_t y, double threshold) {
  if (m == 0 || m >= N) throw InvalidConfig("need 0 < m < N");
  const std::vector<double> row = kernel_final_row(lazy, N - m, 0);
  // u_i(h) = P_h(next i steps stay >= 0, endpoint <= y)
  const double p = lazy.p, r = 1.0 - 2.0 * p;
  const std::size_t width = row.size() + m + 1;
  std::vector<double> u(width, 0.0), next(width, 0.0);
  for (std::size_t h = 0; h < width; ++h)
    u[h] = (static_cast<std::int64_t>(h) <= y) ? 1.0 : 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t h = 0; h < width; ++h) {
      double acc = r * u[h];
      if (h + 1 < width) acc += p * u[h + 1];
      if (h > 0) acc += p * u[h - 1];
      next[h] = acc;
    }
    u.swap(next);
  }
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < row.size(); ++k) {
    const double mass = row[k] * u[k];
    den += mass;
    if (static_cast<double>(k) <= threshold) num += mass;
  }
  if (den <= 0.0) throw ImpossibleEvent("conditioning event has zero mass");
  return num / den;
}

double conditional_cdf_decrement(const IncrementFamily& lazy, std::size_t N,
                                 std::size_t m, std::int64_t y,
                                 double threshold) {
  if (m == 0 || m >= N) throw InvalidConfig("need 0 < m < N");
  const std::vector<double> row = kernel_final_row(lazy, N - m, 0);
  double max_mass = 0.0;
  for (double v : row) max_mass = std::max(max_mass, v);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (row[k] < 1e-16 * max_mass) continue;
    const std::vector<double> tail =
        kernel_final_row(lazy, m, static_cast<std::int64_t>(k));
    const std::int64_t hi =
        std::min<std::int64_t>(y, static_cast<std::int64_t>(tail.size()) - 1);
    for (std::int64_t j = 0; j <= hi; ++j) {
      const double mass = row[k] * tail[j];
      den += mass;
      // S_{N-m} - S_N = k - j
      if (static_cast<double>(k) - static_cast<double>(j) <= threshold)
        num += mass;
    }
  }
  if (den <= 0.0) throw ImpossibleEvent("conditioning event has zero mass");
  return num / den;
}

double conditional_cdf_decrement_pinned(const IncrementFamily& lazy,
                                        std::size_t N, std::size_t m,
                                        std::int64_t y, double threshold) {
  if (m == 0 || m >= N) throw InvalidConfig("need 0 < m < N");
  const std::vector<double> row = kernel_final_row(lazy, N - m, 0);
  double max_mass = 0.0;
  for (double v : row) max_mass = std::max(max_mass, v);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (row[k] < 1e-16 * max_mass) continue;
    const std::vector<double> tail =
        kernel_final_row(lazy, m, static_cast<std::int64_t>(k));
    if (y < 0 || y >= static_cast<std::int64_t>(tail.size())) continue;
    const double mass = row[k] * tail[y];
    den += mass;
    if (static_cast<double>(k) - static_cast<double>(y) <= threshold)
      num += mass;
  }
  if (den <= 0.0) throw ImpossibleEvent("conditioning event has zero mass");
  return num / den;
}

WeightedPath sample_h_transform(const IncrementFamily& f, std::size_t N,
                                double x, const RenewalTable& vminus,
                                Philox& rng, std::size_t attempt_budget) {
  if (x < 0.0) throw InvalidConfig("start must be nonnegative");
  const double vx = vminus.eval(x);
  for (std::size_t attempt = 0; attempt < attempt_budget; ++attempt) {
    WalkPath path;
    path.x0 = x;
    path.positions.assign(N + 1, 0.0);
    path.steps.assign(N, 0.0);
    path.positions[0] = x;
    double s = x;
    bool alive = true;
    for (std::size_t k = 1; k <= N; ++k) {
      const double step = f.sample_step(rng);
      s += step;
      if (s < 0.0) {
        alive = false;
        break;
      }
      path.steps[k - 1] = step;
      path.positions[k] = s;
    }
    if (!alive) continue;
    rebuild_minima(path);
    return {std::move(path), vminus.eval(s) / vx};
  }
  throw RejectionBudgetExceeded("no surviving path within attempt budget");
}

}  // namespace walklab
