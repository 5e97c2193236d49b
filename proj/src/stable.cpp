#include "walklab/stable.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "walklab/errors.hpp"
#include "walklab/quadrature.hpp"

namespace walklab {

namespace {

bool admissible(double alpha, double beta) {
  if (alpha > 0.0 && alpha < 1.0) return std::fabs(beta) < 1.0;
  if (alpha > 1.0 && alpha < 2.0) return std::fabs(beta) < 1.0;
  if (alpha == 1.0) return beta == 0.0;
  if (alpha == 2.0) return beta == 0.0;
  return false;
}

// Upper limit W with  exp(-c W^alpha) * max(W,1) below eps.
double cutoff(double c, double alpha, double eps) {
  double w = std::pow(std::log(1.0 / eps) / c, 1.0 / alpha);
  for (int i = 0; i < 40; ++i) {
    const double lhs = -c * std::pow(w, alpha) + std::log(std::max(w, 1.0));
    if (lhs < std::log(eps)) break;
    w *= 1.25;
  }
  return w;
}

}  // namespace

double StableParams::phase_coeff() const {
  if (alpha == 2.0 || alpha == 1.0 || beta == 0.0) return 0.0;
  return scale * beta * std::tan(M_PI * alpha / 2.0);
}

std::complex<double> StableParams::cf(double w) const {
  const double aw = std::fabs(w);
  const double mod = std::exp(-scale * std::pow(aw, alpha));
  const double phase = (w >= 0.0 ? 1.0 : -1.0) * phase_coeff() *
                       std::pow(aw, alpha);
  return std::polar(mod, phase);
}

std::string StableParams::describe() const {
  std::ostringstream os;
  os << "stable(alpha=" << alpha << ",beta=" << beta << ",c=" << scale << ")";
  return os.str();
}

StableParams make_params(double alpha, double beta, double scale) {
  if (scale <= 0.0) throw NonpositiveScale("scale must be positive");
  if (!admissible(alpha, beta)) {
    std::ostringstream os;
    os << "(" << alpha << ", " << beta << ") outside the admissible set";
    throw InadmissiblePair(os.str());
  }
  StableParams p;
  p.alpha = alpha;
  p.beta = beta;
  p.scale = scale;
  p.rho = positivity_parameter_closed_form(alpha, beta);
  return p;
}

double positivity_parameter_closed_form(double alpha, double beta) {
  if (beta == 0.0) return 0.5;
  return 0.5 + std::atan(beta * std::tan(M_PI * alpha / 2.0)) / (M_PI * alpha);
}

RhoEstimate positivity_parameter(const StableParams& p, std::size_t budget,
                                 Philox& rng) {
  RhoEstimate e;
  if (p.beta == 0.0) {
    e.value = 0.5;
    return e;
  }
  std::size_t pos = 0;
  for (std::size_t i = 0; i < budget; ++i)
    if (sample_stable(p, rng) > 0.0) ++pos;
  e.sampled = true;
  e.value = static_cast<double>(pos) / static_cast<double>(budget);
  e.stderr_ = std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(budget));
  return e;
}

double stable_density(const StableParams& p, double x, double quad_tol) {
  const double c = p.scale, alpha = p.alpha, eta = p.phase_coeff();
  const double wmax = cutoff(c, alpha, quad_tol * 0.02);
  // Highest local frequency of cos(xw - eta w^alpha) over (0, wmax].
  const double freq =
      std::fabs(x) + std::fabs(eta) * alpha * std::pow(wmax, alpha - 1.0) +
      (alpha < 1.0 ? std::fabs(eta) * alpha : 0.0);
  QuadratureOptions opt;
  opt.abs_tol = quad_tol * M_PI * 0.5;
  opt.max_evals = 40'000'000;
  opt.initial_panels = static_cast<std::size_t>(
      std::min(4e5, std::max(16.0, 2.0 * freq * wmax / M_PI)));
  auto f = [&](double w) {
    return std::exp(-c * std::pow(w, alpha)) *
           std::cos(x * w - eta * std::pow(w, alpha));
  };
  const double val = integrate(f, 0.0, wmax, opt) / M_PI;
  return std::max(val, 0.0);
}

double stable_cdf(const StableParams& p, double z, double quad_tol) {
  const double c = p.scale, alpha = p.alpha, eta = p.phase_coeff();
  const double wmax = cutoff(c, alpha, quad_tol * 0.02);
  auto integrand = [&](double w) {
    const double ph = z * w - eta * std::pow(w, alpha);
    return std::exp(-c * std::pow(w, alpha)) * std::sin(ph) / w;
  };
  QuadratureOptions opt;
  opt.abs_tol = quad_tol * M_PI * 0.25;
  opt.max_evals = 40'000'000;
  const double freq = std::fabs(z) + std::fabs(eta) * alpha *
                                         std::pow(wmax, std::fabs(alpha - 1.0));
  opt.initial_panels = static_cast<std::size_t>(
      std::min(4e5, std::max(16.0, 2.0 * freq * wmax / M_PI)));

  double head = 0.0;
  double w1 = std::min(1.0, wmax);
  if (alpha < 1.0 && eta != 0.0) {
    // Integrable w^{alpha-1} singularity at 0: substitute u = w^alpha.
    auto g = [&](double u) {
      if (u <= 0.0) return -eta / alpha;
      const double w = std::pow(u, 1.0 / alpha);
      return std::exp(-c * u) * std::sin(z * w - eta * u) / (alpha * u);
    };
    QuadratureOptions ho = opt;
    ho.initial_panels = 64;
    head = integrate(g, 0.0, std::pow(w1, alpha), ho);
  } else {
    auto g = [&](double w) {
      if (w < 1e-12) return z;  // limit of sin(zw)/w
      return integrand(w);
    };
    QuadratureOptions ho = opt;
    ho.initial_panels = 64;
    head = integrate(g, 0.0, w1, ho);
  }
  double tail = 0.0;
  if (wmax > w1) tail = integrate(integrand, w1, wmax, opt);
  const double v = 0.5 + (head + tail) / M_PI;
  return std::clamp(v, 0.0, 1.0);
}

double sample_stable(const StableParams& p, Philox& rng) {
  const double alpha = p.alpha;
  if (alpha == 1.0) {
    // Cauchy with CF exp(-c|w|).
    return p.scale * std::tan(M_PI * (rng.uniform() - 0.5));
  }
  const double u = M_PI * (rng.uniform() - 0.5);
  const double w = rng.exponential();
  const double tb = p.beta * std::tan(M_PI * alpha / 2.0);
  const double b = std::atan(tb) / alpha;
  const double s = std::pow(1.0 + tb * tb, 0.5 / alpha);
  const double x = s * std::sin(alpha * (u + b)) /
                   std::pow(std::cos(u), 1.0 / alpha) *
                   std::pow(std::cos(u - alpha * (u + b)) / w,
                            (1.0 - alpha) / alpha);
  return std::pow(p.scale, 1.0 / alpha) * x;
}

DensityTable tabulate_density(const StableParams& p,
                              const std::vector<double>& grid,
                              double quad_tol) {
  DensityTable t;
  t.grid = grid;
  t.params = p;
  t.quad_tol = quad_tol;
  t.values.reserve(grid.size());
  for (double x : grid) t.values.push_back(stable_density(p, x, quad_tol));
  return t;
}

DensityEvaluator::DensityEvaluator(const StableParams& p, double half_width,
                                   std::size_t cells, double quad_tol)
    : params_(p), lo_(-half_width), hi_(half_width), quad_tol_(quad_tol) {
  cells = std::max<std::size_t>(cells, 8);
  step_ = (hi_ - lo_) / static_cast<double>(cells);
  table_.resize(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i)
    table_[i] = stable_density(p, lo_ + step_ * static_cast<double>(i),
                               quad_tol);
}

double DensityEvaluator::operator()(double x) const {
  if (x < lo_ || x > hi_) return stable_density(params_, x, quad_tol_);
  const double u = (x - lo_) / step_;
  const std::size_t i =
      std::min(static_cast<std::size_t>(u), table_.size() - 2);
  const double frac = u - static_cast<double>(i);
  return table_[i] * (1.0 - frac) + table_[i + 1] * frac;
}

}  // namespace walklab
