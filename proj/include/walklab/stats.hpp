#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace walklab {

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t count = 0;
};

MeanStderr mean_stderr(const std::vector<double>& xs);

// Ratio-of-weighted-sums estimate with a delta-method standard error;
// used by all self-normalized importance estimators.
MeanStderr weighted_mean_stderr(const std::vector<double>& xs,
                                const std::vector<double>& ws);

// Right-continuous weighted empirical CDF on the sorted sample grid.
struct EmpiricalCdf {
  std::vector<double> points;   // strictly increasing atoms
  std::vector<double> cdf;      // value at and right of points[i]
  double total_weight = 0.0;

  double operator()(double x) const;  // right-continuous evaluation
};

EmpiricalCdf empirical_cdf(std::vector<double> samples,
                           std::vector<double> weights = {});

// sup_x |F_n(x) - R(x)| evaluated from both sides of every atom.
double ks_statistic(const EmpiricalCdf& ecdf,
                    const std::function<double(double)>& reference);

double ks_between(const EmpiricalCdf& a, const EmpiricalCdf& b);

// Regularized incomplete gamma functions (series + continued fraction).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

double chi_square_sf(double stat, double dof);  // upper tail probability

struct ChiSquareResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
  std::size_t bins = 0;
};

// Two-sample chi-square on pooled equal-count bins; bins are merged until
// every expected count is at least `min_expected`.
ChiSquareResult chi_square_two_sample(const std::vector<double>& a,
                                      const std::vector<double>& b,
                                      std::size_t target_bins = 20,
                                      double min_expected = 5.0);

// Gaussian-kernel density estimate on [0, inf) with reflection at 0.
struct KdeTable {
  std::vector<double> grid;
  std::vector<double> value;
  std::vector<double> stderr_;
  double bandwidth = 0.0;
};

double silverman_bandwidth(const std::vector<double>& xs);
KdeTable kde_positive(const std::vector<double>& xs,
                      const std::vector<double>& grid, double bandwidth);

double trapezoid_mass(const std::vector<double>& grid,
                      const std::vector<double>& value);

}  // namespace walklab
