#include "walklab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "walklab/errors.hpp"

namespace walklab {

MeanStderr mean_stderr(const std::vector<double>& xs) {
  if (xs.empty()) throw EmptySample("mean of empty sample");
  MeanStderr r;
  r.count = xs.size();
  r.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    r.stderr_ = std::sqrt(ss / (xs.size() - 1.0) / xs.size());
  }
  return r;
}

MeanStderr weighted_mean_stderr(const std::vector<double>& xs,
                                const std::vector<double>& ws) {
  if (xs.empty() || xs.size() != ws.size())
    throw EmptySample("weighted mean needs matching nonempty samples");
  double sw = 0.0, swx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sw += ws[i];
    swx += ws[i] * xs[i];
  }
  if (sw <= 0.0) throw EmptySample("weights sum to zero");
  MeanStderr r;
  r.count = xs.size();
  r.mean = swx / sw;
  // Var of ratio estimator: sum w_i^2 (x_i - mean)^2 / (sum w)^2.
  double s2 = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double d = ws[i] * (xs[i] - r.mean);
    s2 += d * d;
  }
  r.stderr_ = std::sqrt(s2) / sw;
  return r;
}

double EmpiricalCdf::operator()(double x) const {
  auto it = std::upper_bound(points.begin(), points.end(), x);
  if (it == points.begin()) return 0.0;
  return cdf[static_cast<std::size_t>(it - points.begin()) - 1];
}

EmpiricalCdf empirical_cdf(std::vector<double> samples,
                           std::vector<double> weights) {
  if (samples.empty()) throw EmptySample("empirical_cdf of empty sample");
  if (weights.empty()) weights.assign(samples.size(), 1.0);
  if (weights.size() != samples.size())
    throw EmptySample("weights do not match samples");
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw EmptySample("negative weight");
    total += w;
  }
  if (total <= 0.0) throw EmptySample("weights sum to zero");

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return samples[i] < samples[j];
  });

  EmpiricalCdf out;
  out.total_weight = total;
  double acc = 0.0;
  for (std::size_t idx : order) {
    acc += weights[idx];
    if (!out.points.empty() && out.points.back() == samples[idx]) {
      out.cdf.back() = acc / total;
    } else {
      out.points.push_back(samples[idx]);
      out.cdf.push_back(acc / total);
    }
  }
  return out;
}

double ks_statistic(const EmpiricalCdf& ecdf,
                    const std::function<double(double)>& reference) {
  double sup = 0.0;
  double prev = 0.0;
  for (std::size_t i = 0; i < ecdf.points.size(); ++i) {
    const double r = reference(ecdf.points[i]);
    sup = std::max(sup, std::fabs(ecdf.cdf[i] - r));
    sup = std::max(sup, std::fabs(prev - r));
    prev = ecdf.cdf[i];
  }
  return sup;
}

double ks_between(const EmpiricalCdf& a, const EmpiricalCdf& b) {
  double sup = 0.0;
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    sup = std::max(sup, std::fabs(a.cdf[i] - b(a.points[i])));
    sup = std::max(sup, std::fabs((i ? a.cdf[i - 1] : 0.0) - b(a.points[i])));
  }
  for (std::size_t i = 0; i < b.points.size(); ++i) {
    sup = std::max(sup, std::fabs(b.cdf[i] - a(b.points[i])));
    sup = std::max(sup, std::fabs((i ? b.cdf[i - 1] : 0.0) - a(b.points[i])));
  }
  return sup;
}

namespace {

double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_contfrac(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_p(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw Error("gamma_p domain");
  if (x == 0.0) return 0.0;
  return (x < a + 1.0) ? gamma_p_series(a, x) : 1.0 - gamma_q_contfrac(a, x);
}

double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw Error("gamma_q domain");
  if (x == 0.0) return 1.0;
  return (x < a + 1.0) ? 1.0 - gamma_p_series(a, x) : gamma_q_contfrac(a, x);
}

double chi_square_sf(double stat, double dof) {
  if (stat <= 0.0) return 1.0;
  return gamma_q(dof / 2.0, stat / 2.0);
}

ChiSquareResult chi_square_two_sample(const std::vector<double>& a,
                                      const std::vector<double>& b,
                                      std::size_t target_bins,
                                      double min_expected) {
  if (a.empty() || b.empty()) throw EmptySample("chi-square needs samples");
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::sort(pooled.begin(), pooled.end());

  // Equal-count bin edges from the pooled sample.
  std::vector<double> edges;
  target_bins = std::max<std::size_t>(2, target_bins);
  for (std::size_t k = 1; k < target_bins; ++k) {
    const std::size_t idx = k * pooled.size() / target_bins;
    const double e = pooled[idx];
    if (edges.empty() || e > edges.back()) edges.push_back(e);
  }

  auto histogram = [&](const std::vector<double>& xs) {
    std::vector<double> h(edges.size() + 1, 0.0);
    for (double x : xs) {
      const std::size_t bin = static_cast<std::size_t>(
          std::upper_bound(edges.begin(), edges.end(), x) - edges.begin());
      h[bin] += 1.0;
    }
    return h;
  };
  std::vector<double> ha = histogram(a);
  std::vector<double> hb = histogram(b);

  // Merge adjacent bins until pooled expected counts are large enough.
  std::vector<double> ca, cb;
  double accA = 0.0, accB = 0.0;
  const double scale = min_expected * (1.0 + b.size() / double(a.size()));
  for (std::size_t i = 0; i < ha.size(); ++i) {
    accA += ha[i];
    accB += hb[i];
    if (accA + accB >= scale || i + 1 == ha.size()) {
      ca.push_back(accA);
      cb.push_back(accB);
      accA = accB = 0.0;
    }
  }
  if (ca.size() >= 2 && ca.back() + cb.back() < scale) {
    ca[ca.size() - 2] += ca.back();
    cb[cb.size() - 2] += cb.back();
    ca.pop_back();
    cb.pop_back();
  }

  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double k1 = std::sqrt(nb / na), k2 = std::sqrt(na / nb);
  ChiSquareResult r;
  r.bins = ca.size();
  for (std::size_t i = 0; i < ca.size(); ++i) {
    const double tot = ca[i] + cb[i];
    if (tot <= 0.0) continue;
    const double d = k1 * ca[i] - k2 * cb[i];
    r.statistic += d * d / tot;
  }
  r.dof = static_cast<double>(r.bins > 1 ? r.bins - 1 : 1);
  r.p_value = chi_square_sf(r.statistic, r.dof);
  return r;
}

double silverman_bandwidth(const std::vector<double>& xs) {
  if (xs.size() < 2) throw EmptySample("bandwidth needs data");
  MeanStderr m = mean_stderr(xs);
  double sd = m.stderr_ * std::sqrt(static_cast<double>(xs.size()));
  std::vector<double> sorted(xs);
  std::sort(sorted.begin(), sorted.end());
  const double q1 = sorted[sorted.size() / 4];
  const double q3 = sorted[(3 * sorted.size()) / 4];
  const double iqr = (q3 - q1) / 1.34;
  double spread = sd;
  if (iqr > 0.0) spread = std::min(spread, iqr);
  return 0.9 * spread * std::pow(static_cast<double>(xs.size()), -0.2);
}

KdeTable kde_positive(const std::vector<double>& xs,
                      const std::vector<double>& grid, double bandwidth) {
  if (xs.empty()) throw EmptySample("kde of empty sample");
  KdeTable t;
  t.grid = grid;
  t.bandwidth = bandwidth;
  t.value.resize(grid.size());
  t.stderr_.resize(grid.size());
  const double inv_h = 1.0 / bandwidth;
  const double norm = 1.0 / std::sqrt(2.0 * M_PI);
  const double n = static_cast<double>(xs.size());
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    const double g = grid[gi];
    double s1 = 0.0, s2 = 0.0;
    for (double x : xs) {
      const double u1 = (g - x) * inv_h;
      const double u2 = (g + x) * inv_h;  // reflection at 0
      double k = 0.0;
      if (std::fabs(u1) < 8.0) k += norm * std::exp(-0.5 * u1 * u1);
      if (std::fabs(u2) < 8.0) k += norm * std::exp(-0.5 * u2 * u2);
      k *= inv_h;
      s1 += k;
      s2 += k * k;
    }
    t.value[gi] = s1 / n;
    const double var = (s2 / n - t.value[gi] * t.value[gi]) / n;
    t.stderr_[gi] = var > 0.0 ? std::sqrt(var) : 0.0;
  }
  return t;
}

double trapezoid_mass(const std::vector<double>& grid,
                      const std::vector<double>& value) {
  double m = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    m += 0.5 * (value[i] + value[i - 1]) * (grid[i] - grid[i - 1]);
  return m;
}

}  // namespace walklab
