#include "walklab/limit_laws.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "walklab/errors.hpp"
#include "walklab/quadrature.hpp"

namespace walklab {

namespace {

ValueWithError ladder_product(const std::vector<double>& tail,
                              const RenewalTable& renewal, double a_lo,
                              double a_hi, std::size_t n_lo, std::size_t n_hi) {
  const double v_hi = tail[n_hi] * renewal.eval(a_hi);
  const double v_lo = tail[n_lo] * renewal.eval(a_lo);
  // finite-n drift between the two anchors doubles as the error bar
  return {v_hi, std::fabs(v_hi - v_lo)};
}

ValueWithError moment_route(const MeanderTable& m, double power) {
  const double i = m.moment(power);
  const double ie = m.moment_stderr(power);
  if (i <= 0.0) throw InconsistentEstimates("meander moment not positive");
  return {1.0 / i, ie / (i * i)};
}

void check_pair(const char* name, const ValueWithError& a,
                const ValueWithError& b) {
  const double err = std::sqrt(a.stderr_ * a.stderr_ + b.stderr_ * b.stderr_);
  if (std::fabs(a.value - b.value) > 3.0 * std::max(err, 1e-12)) {
    std::ostringstream os;
    os << name << " routes disagree: " << a.value << " vs " << b.value
       << " (combined error " << err << ")";
    throw InconsistentEstimates(os.str());
  }
}

}  // namespace

LimitConstants estimate_constants(const IncrementFamily& f,
                                  const MeanderTable& meander_minus,
                                  const MeanderTable& meander_plus,
                                  const ConstantsConfig& cfg) {
  LimitConstants c;
  c.family = f.describe();
  const ScalingLaw sc = scaling_law(f);
  const double ar = f.stable_target.alpha * f.stable_target.rho;
  const double ar_neg = f.stable_target.alpha * (1.0 - f.stable_target.rho);
  const double a_lo = sc.a(static_cast<double>(cfg.n_lo));
  const double a_hi = sc.a(static_cast<double>(cfg.n_hi));

  std::vector<double> tail_plus, tail_minus;
  RenewalTable vplus, vminus;
  if (f.kind == FamilyKind::LazyLattice) {
    tail_plus = stay_strictly_negative_exact(f, cfg.n_hi);
    tail_minus = stay_strictly_positive_exact(f, cfg.n_hi);
    const std::vector<double> grid = {0.0, a_lo, a_hi, 2.0 * a_hi};
    vplus = exact_renewal_lazy(f, RenewalKind::Vplus, grid);
    vminus = exact_renewal_lazy(f, RenewalKind::Vminus, grid);
    c.zeta = 1.0 - f.p;
  } else {
    // Monte Carlo tails; renewal from the generic estimator.
    Philox rng(cfg.seed, 7001);
    tail_plus.assign(cfg.n_hi + 1, 0.0);
    tail_minus.assign(cfg.n_hi + 1, 0.0);
    tail_plus[cfg.n_lo] =
        stay_strictly_negative_mc(f, cfg.n_lo, cfg.mc_budget, rng);
    tail_plus[cfg.n_hi] =
        stay_strictly_negative_mc(f, cfg.n_hi, cfg.mc_budget, rng);
    tail_minus[cfg.n_lo] =
        stay_strictly_positive_mc(f, cfg.n_lo, cfg.mc_budget, rng);
    tail_minus[cfg.n_hi] =
        stay_strictly_positive_mc(f, cfg.n_hi, cfg.mc_budget, rng);
    std::vector<double> grid;
    for (double x = 0.0; x <= 2.0 * a_hi; x += a_hi / 16.0) grid.push_back(x);
    RenewalConfig rc;
    rc.seed = cfg.seed;
    vplus = estimate_renewal(f, RenewalKind::Vplus, grid, rc);
    rc.stream_base = 1u << 20;
    vminus = estimate_renewal(f, RenewalKind::Vminus, grid, rc);
    c.zeta = 0.0;
  }

  c.c_star_ladder =
      ladder_product(tail_plus, vplus, a_lo, a_hi, cfg.n_lo, cfg.n_hi);
  c.c_star2_ladder =
      ladder_product(tail_minus, vminus, a_lo, a_hi, cfg.n_lo, cfg.n_hi);
  c.c_star_meander = moment_route(meander_minus, ar);
  c.c_star2_meander = moment_route(meander_plus, ar_neg);

  const double prod_hi = vplus.eval(a_hi) * vminus.eval(a_hi) /
                         static_cast<double>(cfg.n_hi);
  const double prod_lo = vplus.eval(a_lo) * vminus.eval(a_lo) /
                         static_cast<double>(cfg.n_lo);
  c.c_star3_product = {prod_hi, std::fabs(prod_hi - prod_lo)};

  const double chat_hi = static_cast<double>(cfg.n_hi) * tail_plus[cfg.n_hi] *
                         tail_minus[cfg.n_hi];
  const double chat_lo = static_cast<double>(cfg.n_lo) * tail_plus[cfg.n_lo] *
                         tail_minus[cfg.n_lo];
  c.c_hat_dp = {chat_hi, std::fabs(chat_hi - chat_lo)};
  {
    Philox rng(cfg.seed, 7002);
    const double tp = stay_strictly_negative_mc(f, cfg.n_lo, cfg.mc_budget, rng);
    const double tm = stay_strictly_positive_mc(f, cfg.n_lo, cfg.mc_budget, rng);
    const double v = static_cast<double>(cfg.n_lo) * tp * tm;
    const double rel = 2.0 / std::sqrt(static_cast<double>(cfg.mc_budget) *
                                       std::max(tp, 1e-12));
    c.c_hat_mc = {v, v * rel + std::fabs(chat_hi - chat_lo)};
  }
  c.c_star3_composite = {
      c.c_star_ladder.value * c.c_star2_ladder.value / c.c_hat_dp.value,
      c.c_star3_product.stderr_ + c.c_star_ladder.stderr_ +
          c.c_star2_ladder.stderr_};

  if (cfg.check_consistency) {
    check_pair("C*", c.c_star_ladder, c.c_star_meander);
    check_pair("C**", c.c_star2_ladder, c.c_star2_meander);
    check_pair("C***", c.c_star3_product, c.c_star3_composite);
    check_pair("Chat", c.c_hat_dp, c.c_hat_mc);
  }
  return c;
}

LimitLawEval::LimitLawEval(StableParams params, double c_star,
                           std::shared_ptr<const MeanderTable> meander_minus,
                           std::shared_ptr<const BridgePositivityTable> bridge,
                           std::shared_ptr<const DensityEvaluator> density,
                           double quad_tol)
    : params_(params),
      alpha_rho_(params.alpha * params.rho),
      c_star_(c_star),
      meander_minus_(std::move(meander_minus)),
      bridge_(std::move(bridge)),
      density_(std::move(density)),
      quad_tol_(quad_tol) {}

double LimitLawEval::A1(double z) const {
  if (z <= 0.0) return 0.0;
  if (!meander_minus_) throw DependencyMissing("A1 needs the meander table");
  const double ar = alpha_rho_;
  const auto& m = *meander_minus_;
  QuadratureOptions opt;
  opt.abs_tol = quad_tol_;
  opt.initial_panels = 64;
  const double zc = std::min(z, m.grid.back());
  const double v = c_star_ * integrate([&](double w) {
                     return std::pow(w, ar) * m.eval(w);
                   }, 0.0, zc, opt);
  return std::min(v, 1.0 + quad_tol_);
}

double LimitLawEval::A2(double z, double t) const {
  if (t <= 0.0) throw InvalidConfig("A2 needs t > 0");
  if (z <= 0.0) return 0.0;
  if (!bridge_ || !density_)
    throw DependencyMissing("A2 needs bridge and density backings");
  const double ar = alpha_rho_;
  QuadratureOptions opt;
  opt.abs_tol = quad_tol_;
  opt.initial_panels = 64;
  const double v = std::pow(t, -ar) * integrate([&](double w) {
                     return std::pow(w, ar) * (*density_)(t - w) *
                            bridge_->eval(w, t);
                   }, 0.0, z, opt);
  return std::max(v, 0.0);
}

double LimitLawEval::B(double z, double T) const {
  if (T <= 0.0) throw InvalidConfig("B needs T > 0");
  if (z <= 0.0) return 0.0;
  if (!bridge_ || !density_)
    throw DependencyMissing("B needs bridge and density backings");
  const double ar = alpha_rho_;
  QuadratureOptions inner;
  inner.abs_tol = quad_tol_ * 0.05;
  inner.initial_panels = 32;
  QuadratureOptions outer;
  outer.abs_tol = quad_tol_;
  outer.initial_panels = 64;
  const double v = integrate(
      [&](double w) {
        const double wpow = std::pow(w, ar);
        if (wpow == 0.0) return 0.0;
        const double inner_val = integrate(
            [&](double t) { return (*density_)(t - w) * bridge_->eval(w, t); },
            0.0, T, inner);
        return wpow * inner_val;
      },
      0.0, z, outer);
  return (ar + 1.0) / std::pow(T, ar + 1.0) * v;
}

double LimitLawEval::B_via_A2(double z, double T) const {
  if (T <= 0.0) throw InvalidConfig("B needs T > 0");
  if (z <= 0.0) return 0.0;
  const double ar = alpha_rho_;
  QuadratureOptions outer;
  outer.abs_tol = quad_tol_;
  outer.initial_panels = 64;
  const double v = integrate(
      [&](double t) {
        return t <= 0.0 ? 0.0 : std::pow(t, ar) * A2(z, t);
      },
      0.0, T, outer);
  return (ar + 1.0) / std::pow(T, ar + 1.0) * v;
}

double brownian_meander_density(double w) {
  return w <= 0.0 ? 0.0 : w * std::exp(-0.5 * w * w);
}

double brownian_bridge_positivity(double a, double b) {
  if (a < 0.0 || b < 0.0) return 0.0;
  return 1.0 - std::exp(-2.0 * a * b);
}

double brownian_A1(double z) {
  if (z <= 0.0) return 0.0;
  return std::erf(z / std::sqrt(2.0)) -
         std::sqrt(2.0 / M_PI) * z * std::exp(-0.5 * z * z);
}

double LocalLimitModel::predict(LocalCase c, std::size_t n, double x,
                                double y) const {
  const ScalingLaw sc = scaling_law(family);
  const double a_n = sc.a(static_cast<double>(n));
  const double b_n = sc.b(static_cast<double>(n));
  const double small = uniformity_window * a_n;
  auto need = [&](bool ok, const char* what) {
    if (!ok) throw RegimeMismatch(what);
  };
  // Only the span-1 shift-0 lattice is implemented, so the lattice span
  // factor is 1 and lattice/continuous predictions differ in the
  // (1 - zeta) factor alone (zeta = 0 for atomless steps).
  switch (c) {
    case LocalCase::Xsmall:
      need(x <= small, "Xsmall needs x = o(a_n)");
      need(n < tau_minus_tail.size(), "tau tail table too short");
      return tau_minus_tail[n] / a_n * vminus->eval(x) *
             meander_plus->eval(y / a_n);
    case LocalCase::Ysmall:
      need(y <= small, "Ysmall needs y = o(a_n)");
      need(n < tau_plus_tail.size(), "tau tail table too short");
      return tau_plus_tail[n] / a_n * vplus->eval(y) *
             meander_minus->eval(x / a_n);
    case LocalCase::XYsmall:
      need(x <= small && y <= small, "XYsmall needs x, y = o(a_n)");
      return (1.0 - zeta) * (*density)(0.0) * b_n * vminus->eval(x) *
             vplus->eval(y);
    case LocalCase::XYbig: {
      const double lo = a_n / big_window, hi = a_n * big_window;
      need(x >= lo && x <= hi && y >= lo && y <= hi,
           "XYbig needs x, y comparable to a_n");
      return 1.0 / a_n * (*density)((y - x) / a_n) *
             bridge->eval(x / a_n, y / a_n);
    }
  }
  throw InvalidConfig("unknown local case");
}

}  // namespace walklab
