#include "walklab/rng.hpp"

#include <algorithm>

namespace walklab {

namespace {

double log_factorial(double k) { return std::lgamma(k + 1.0); }

}  // namespace

std::int64_t poisson_draw(Philox& rng, double mean) {
  if (mean <= 0.0) return 0;
  if (mean < 30.0) {
    // Inversion by sequential search.
    const double l = std::exp(-mean);
    double p = 1.0;
    std::int64_t k = 0;
    do {
      ++k;
      p *= rng.uniform();
    } while (p > l);
    return k - 1;
  }
  // Hörmann's PTRS transformed rejection.
  const double b = 0.931 + 2.53 * std::sqrt(mean);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<std::int64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        k * std::log(mean) - mean - log_factorial(k)) {
      return static_cast<std::int64_t>(k);
    }
  }
}

std::int64_t binomial_draw(Philox& rng, std::int64_t n, double p) {
  if (n <= 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  if (p > 0.5) return n - binomial_draw(rng, n, 1.0 - p);
  const double np = static_cast<double>(n) * p;
  if (np < 30.0) {
    // Skip over failure runs with geometric gaps.
    const double log_q = std::log1p(-p);
    std::int64_t x = 0;
    double trials = 0.0;
    for (;;) {
      trials += std::floor(std::log(rng.uniform()) / log_q) + 1.0;
      if (trials > static_cast<double>(n)) return x;
      ++x;
      if (x >= n) return n;
    }
  }
  // BTRS rejection (Hörmann 1993).
  const double q = 1.0 - p;
  const double spq = std::sqrt(np * q);
  const double b = 1.15 + 2.53 * spq;
  const double a = -0.0873 + 0.0248 * b + 0.01 * p;
  const double c = np + 0.5;
  const double v_r = 0.92 - 4.2 / b;
  const double alpha = (2.83 + 5.1 / b) * spq;
  const double lpq = std::log(p / q);
  const double m = std::floor((static_cast<double>(n) + 1.0) * p);
  const double h = log_factorial(m) + log_factorial(static_cast<double>(n) - m);
  for (;;) {
    const double u = rng.uniform() - 0.5;
    const double v = rng.uniform();
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + c);
    if (k < 0.0 || k > static_cast<double>(n)) continue;
    if (us >= 0.07 && v <= v_r) return static_cast<std::int64_t>(k);
    if (std::log(v * alpha / (a / (us * us) + b)) <=
        h - log_factorial(k) - log_factorial(static_cast<double>(n) - k) +
            (k - m) * lpq) {
      return static_cast<std::int64_t>(k);
    }
  }
}

double gamma_draw(Philox& rng, double shape) {
  if (shape < 1.0) {
    const double u = rng.uniform();
    return gamma_draw(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

std::int64_t negative_binomial_draw(Philox& rng, std::int64_t n, double q) {
  if (n <= 0) return 0;
  if (q >= 1.0) return 0;
  if (n < 16) {
    std::int64_t total = 0;
    const double log_q = std::log1p(-q);
    for (std::int64_t i = 0; i < n; ++i) {
      total += static_cast<std::int64_t>(
          std::floor(std::log(rng.uniform()) / log_q));
    }
    return total;
  }
  const double scale = (1.0 - q) / q;
  const double g = gamma_draw(rng, static_cast<double>(n)) * scale;
  return poisson_draw(rng, g);
}

}  // namespace walklab
