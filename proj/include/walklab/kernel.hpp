#pragma once

#include <cstdint>
#include <vector>

#include "walklab/renewal.hpp"
#include "walklab/walk.hpp"

namespace walklab {

// Exact law of the lazy-lattice walk killed at negativity:
//   q_n(x, y) = P_x(S_1 >= 0, ..., S_n >= 0, S_n = y),  0 <= n <= N.
// Rows are exact up to floating rounding; row n sums to P_x(L_n >= 0).
class ConditionKernel {
 public:
  ConditionKernel(const IncrementFamily& f, std::size_t horizon,
                  std::int64_t start, std::size_t max_cells = 120'000'000);

  std::size_t horizon() const { return horizon_; }
  std::int64_t start() const { return start_; }
  const IncrementFamily& family() const { return family_; }

  double q(std::size_t n, std::int64_t y) const;
  double survival(std::size_t n) const;  // P_x(L_n >= 0)
  double mass_at_most(std::size_t n, std::int64_t y) const;
  std::int64_t max_height() const { return height_cap_; }

  // Terminal height drawn from q_N(x, .) restricted to y <= cap.
  std::int64_t sample_endpoint_at_most(std::int64_t cap, Philox& rng) const;
  // Backward bridge through the DP rows, conditioned on S_N = y_end.
  WalkPath sample_bridge(std::int64_t y_end, Philox& rng) const;

 private:
  IncrementFamily family_;
  std::size_t horizon_;
  std::int64_t start_;
  std::int64_t height_cap_;  // heights stored 0..height_cap_
  std::vector<std::vector<double>> rows_;
};

struct EndSpec {
  enum Type { Exact, AtMost } type = AtMost;
  double y = 0.0;
  static EndSpec exact(double y) { return {Exact, y}; }
  static EndSpec at_most(double y) { return {AtMost, y}; }
};

enum class ConditionedMode { DpBackward, Rejection };

// Path distributed per P_x( . | L_N >= 0, end_spec). DpBackward needs the
// lattice family (supply a prebuilt kernel to amortize the DP); Rejection
// works for every family and resimulates until the event holds.
WalkPath sample_conditioned(const IncrementFamily& f, std::size_t N, double x,
                            const EndSpec& end, ConditionedMode mode,
                            Philox& rng, std::size_t attempt_budget = 10'000'000,
                            const ConditionKernel* kernel = nullptr);

struct WeightedPath {
  WalkPath path;
  double weight = 1.0;  // V^-(S_N) / V^-(x)
};

// One surviving path (L_N >= 0) with its harmonic reweighting factor, so
// self-normalized weighted averages estimate expectations under the walk
// conditioned to stay nonnegative forever.
WeightedPath sample_h_transform(const IncrementFamily& f, std::size_t N,
                                double x, const RenewalTable& vminus,
                                Philox& rng,
                                std::size_t attempt_budget = 10'000'000);

// Final kernel row q_n(x, .) without storing intermediate rows.
std::vector<double> kernel_final_row(const IncrementFamily& lazy,
                                     std::size_t n, std::int64_t x);
// Unconstrained lattice pmf P(S_n = d), d = -n..n (index d + n).
std::vector<double> lattice_pmf(const IncrementFamily& lazy, std::size_t n);

// Exact conditional CDFs at the excursion's left vicinity, start x = 0:
//   P(S_{N-m} <= threshold | L_N >= 0, S_N <= y)
double conditional_cdf_left_vicinity(const IncrementFamily& lazy,
                                     std::size_t N, std::size_t m,
                                     std::int64_t y, double threshold);
//   P(S_{N-m} - S_N <= threshold | L_N >= 0, S_N <= y)
double conditional_cdf_decrement(const IncrementFamily& lazy, std::size_t N,
                                 std::size_t m, std::int64_t y,
                                 double threshold);
//   same statistic with the endpoint pinned: ... | L_N >= 0, S_N = y
double conditional_cdf_decrement_pinned(const IncrementFamily& lazy,
                                        std::size_t N, std::size_t m,
                                        std::int64_t y, double threshold);

}  // namespace walklab
