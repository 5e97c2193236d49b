#pragma once

#include <cstddef>
#include <functional>

namespace walklab {

struct QuadratureOptions {
  double abs_tol = 1e-10;
  std::size_t max_evals = 2'000'000;
  // Initial uniform panels; the oscillatory inverters raise this so each
  // panel covers at most half an oscillation period.
  std::size_t initial_panels = 16;
};

// Adaptive Simpson over [a, b]. Throws QuadratureFailure if the evaluation
// budget runs out before the tolerance is met.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opt = {});

// Gauss-Legendre 32-point fixed rule; enough for smooth integrands on a
// known interval and cheap inside nested integrals.
double gauss32(const std::function<double(double)>& f, double a, double b);

}  // namespace walklab
