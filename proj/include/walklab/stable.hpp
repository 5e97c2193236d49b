#pragma once

#include <complex>
#include <string>
#include <vector>

#include "walklab/rng.hpp"
#include "walklab/stats.hpp"

namespace walklab {

// Strictly stable law with characteristic function
//   G(w) = exp(-c |w|^alpha (1 - i beta sgn(w) tan(pi alpha / 2))).
// Admissible (alpha, beta):
//   {0<a<1, |b|<1} u {1<a<2, |b|<1} u {a=1, b=0} u {a=2, b=0}.
struct StableParams {
  double alpha = 2.0;
  double beta = 0.0;
  double scale = 0.5;  // the constant c
  double rho = 0.5;    // positivity parameter P(Y_1 > 0)

  // c beta tan(pi alpha/2): the phase coefficient of log G on w > 0.
  double phase_coeff() const;
  std::complex<double> cf(double w) const;
  std::string describe() const;
};

StableParams make_params(double alpha, double beta, double scale);

struct RhoEstimate {
  double value = 0.5;
  double stderr_ = 0.0;
  bool sampled = false;  // false when the beta=0 shortcut applied
};

// Monte Carlo estimate of P(Y_1 > 0); exact 1/2 without sampling for
// beta = 0. The closed-form value below is the cross-check oracle.
RhoEstimate positivity_parameter(const StableParams& p, std::size_t budget,
                                 Philox& rng);
double positivity_parameter_closed_form(double alpha, double beta);

// Density by real-form inversion of the characteristic function, with
// panels sized to the oscillation of cos(xw - phase(w)).
double stable_density(const StableParams& p, double x, double quad_tol = 1e-8);

// CDF by the Gil-Pelaez inversion; independent of stable_density.
double stable_cdf(const StableParams& p, double z, double quad_tol = 1e-8);

// Exact draw (Chambers-Mallows-Stuck construction).
double sample_stable(const StableParams& p, Philox& rng);

struct DensityTable {
  std::vector<double> grid;
  std::vector<double> values;
  StableParams params;
  double quad_tol = 1e-8;
};

DensityTable tabulate_density(const StableParams& p,
                              const std::vector<double>& grid,
                              double quad_tol = 1e-8);

// Cached evaluator: dense table + linear interpolation, exact quadrature
// outside the covered range. Pure and safe to share once built.
class DensityEvaluator {
 public:
  DensityEvaluator(const StableParams& p, double half_width, std::size_t cells,
                   double quad_tol = 1e-8);
  double operator()(double x) const;
  const StableParams& params() const { return params_; }

 private:
  StableParams params_;
  double lo_, hi_, step_;
  double quad_tol_;
  std::vector<double> table_;
};

}  // namespace walklab
