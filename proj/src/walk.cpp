#include "walklab/walk.hpp"

#include <algorithm>
#include <complex>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "walklab/errors.hpp"

namespace walklab {

namespace {

// Empirical modulus of E exp(i u S_n / n^{1/alpha}) from R replicas split
// over fixed substreams; deterministic by construction.
double pareto_cf_pin(double alpha, double balance) {
  const std::size_t n_steps = 10'000;
  const std::size_t replicas = 24'576;
  const std::size_t streams = 8;
  const double target_c = 1.0;

  IncrementFamily f;
  f.kind = FamilyKind::TwoSidedPareto;
  f.tail_alpha = alpha;
  f.balance = balance;
  f.centering = (alpha > 1.0)
                    ? (2.0 * balance - 1.0) * alpha / (alpha - 1.0)
                    : 0.0;

  std::vector<double> sums(replicas);
  std::vector<std::thread> pool;
  const std::size_t per = replicas / streams;
  for (std::size_t s = 0; s < streams; ++s) {
    pool.emplace_back([&, s] {
      Philox rng(0x9A7e70u, 1000 + s);
      for (std::size_t r = 0; r < per; ++r) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n_steps; ++k) acc += f.sample_step(rng);
        sums[s * per + r] = acc;
      }
    });
  }
  for (auto& t : pool) t.join();

  const double n_pow = std::pow(static_cast<double>(n_steps), 1.0 / alpha);
  // Solve |ecf(u)|: with a_n = a n^{1/alpha}, matching e^{-c w^alpha} at the
  // modulus level gives a = (-log|ecf(w/a)| / (c w^alpha))^{1/alpha};
  // iterate so the matching point sits near modulus e^{-1}.
  double a = 1.0;
  for (int it = 0; it < 4; ++it) {
    const double w = std::pow(1.0 / target_c, 1.0 / alpha);  // G(w) = e^{-1}
    const double u = w / (a * n_pow);
    std::complex<double> ecf(0.0, 0.0);
    for (double s : sums) ecf += std::polar(1.0, u * s);
    const double mod = std::abs(ecf) / static_cast<double>(replicas);
    if (mod <= 0.0 || mod >= 1.0) throw BadFamilyParams("CF pin degenerate");
    a *= std::pow(-std::log(mod) / (target_c * std::pow(w, alpha)),
                  1.0 / alpha);
  }
  return a;
}

std::mutex g_pin_mutex;
std::map<std::pair<double, double>, double>& pin_cache() {
  static std::map<std::pair<double, double>, double> cache;
  return cache;
}

}  // namespace

double IncrementFamily::a_coeff() const {
  switch (kind) {
    case FamilyKind::LazyLattice:
      return std::sqrt(2.0 * p);
    case FamilyKind::Gaussian:
      return sigma;
    case FamilyKind::TwoSidedPareto: {
      std::lock_guard<std::mutex> lock(g_pin_mutex);
      auto key = std::make_pair(tail_alpha, balance);
      auto it = pin_cache().find(key);
      if (it != pin_cache().end()) return it->second;
      const double a = pareto_cf_pin(tail_alpha, balance);
      pin_cache()[key] = a;
      return a;
    }
  }
  return 1.0;
}

std::string IncrementFamily::describe() const {
  std::ostringstream os;
  switch (kind) {
    case FamilyKind::LazyLattice:
      os << "lazy_lattice(p=" << p << ")";
      break;
    case FamilyKind::Gaussian:
      os << "gaussian(sigma=" << sigma << ")";
      break;
    case FamilyKind::TwoSidedPareto:
      os << "two_sided_pareto(alpha=" << tail_alpha << ",balance=" << balance
         << ")";
      break;
  }
  return os.str();
}

IncrementFamily make_lazy_lattice(double p) {
  if (!(p > 0.0 && p < 0.5))
    throw BadFamilyParams("lazy lattice needs p in (0, 1/2)");
  IncrementFamily f;
  f.kind = FamilyKind::LazyLattice;
  f.p = p;
  f.lattice = true;
  // Var = 2p and a_n = sqrt(2p n), so S_n/a_n has unit variance and the
  // target is the standard normal, CF exp(-w^2/2).
  f.stable_target = make_params(2.0, 0.0, 0.5);
  return f;
}

IncrementFamily make_gaussian(double sigma) {
  if (!(sigma > 0.0)) throw BadFamilyParams("gaussian needs sigma > 0");
  IncrementFamily f;
  f.kind = FamilyKind::Gaussian;
  f.sigma = sigma;
  f.lattice = false;
  f.stable_target = make_params(2.0, 0.0, 0.5);
  return f;
}

IncrementFamily make_two_sided_pareto(double alpha, double balance) {
  if (!(alpha > 0.0 && alpha < 2.0))
    throw BadFamilyParams("pareto needs alpha in (0,2)");
  if (!(balance > 0.0 && balance < 1.0))
    throw BadFamilyParams("balance must lie strictly inside (0,1)");
  if (alpha == 1.0 && balance != 0.5)
    throw BadFamilyParams("pareto alpha=1 admits only balance 1/2");
  IncrementFamily f;
  f.kind = FamilyKind::TwoSidedPareto;
  f.tail_alpha = alpha;
  f.balance = balance;
  f.centering =
      (alpha > 1.0) ? (2.0 * balance - 1.0) * alpha / (alpha - 1.0) : 0.0;
  f.lattice = false;
  f.stable_target = make_params(alpha, 2.0 * balance - 1.0, 1.0);
  return f;
}

ScalingLaw scaling_law(const IncrementFamily& f) {
  return ScalingLaw{f.stable_target.alpha, f.a_coeff()};
}

std::pair<double, double> scaling_constants(const IncrementFamily& f,
                                            std::int64_t n) {
  if (n < 1) throw BadFamilyParams("n must be >= 1");
  const ScalingLaw s = scaling_law(f);
  const double nn = static_cast<double>(n);
  return {s.a(nn), s.b(nn)};
}

WalkPath simulate_path(const IncrementFamily& f, std::size_t n, double x0,
                       Philox& rng) {
  WalkPath path;
  path.x0 = x0;
  path.steps.resize(n);
  path.positions.resize(n + 1);
  path.min_from1.resize(n + 1);
  path.min_from0.resize(n + 1);
  path.positions[0] = x0;
  path.min_from1[0] = std::numeric_limits<double>::infinity();
  path.min_from0[0] = x0;
  for (std::size_t k = 1; k <= n; ++k) {
    path.steps[k - 1] = f.sample_step(rng);
    path.positions[k] = path.positions[k - 1] + path.steps[k - 1];
    path.min_from1[k] = std::min(path.min_from1[k - 1], path.positions[k]);
    path.min_from0[k] = std::min(path.min_from0[k - 1], path.positions[k]);
  }
  return path;
}

LadderStats ladder_stats(const WalkPath& path) {
  if (path.positions.empty()) throw EmptySample("ladder_stats of empty path");
  LadderStats out;
  const double base = path.positions[0];
  double weak_hi = 0.0, weak_lo = 0.0, strict_hi = 0.0, strict_lo = 0.0;
  for (std::size_t k = 1; k < path.positions.size(); ++k) {
    const double s = path.positions[k] - base;
    if (s >= weak_hi) {
      out.weak_asc.epochs.push_back(k);
      out.weak_asc.heights.push_back(s);
      weak_hi = s;
    }
    if (s <= weak_lo) {
      out.weak_desc.epochs.push_back(k);
      out.weak_desc.heights.push_back(-s);
      weak_lo = s;
    }
    if (s > strict_hi) {
      out.strict_asc.epochs.push_back(k);
      out.strict_asc.heights.push_back(s);
      strict_hi = s;
    }
    if (s < strict_lo) {
      out.strict_desc.epochs.push_back(k);
      out.strict_desc.heights.push_back(-s);
      strict_lo = s;
    }
  }
  return out;
}

}  // namespace walklab
