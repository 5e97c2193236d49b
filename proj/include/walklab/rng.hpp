#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace walklab {

// Philox4x32-10 counter-based generator. A stream is addressed by
// (seed, stream id); draws inside a stream walk a 64-bit block counter.
// Streams never collide, so partitioned Monte Carlo runs are reproducible
// for a fixed (seed, stream assignment) regardless of thread scheduling.
class Philox {
 public:
  using result_type = std::uint64_t;

  Philox() : Philox(0, 0) {}
  Philox(std::uint64_t seed, std::uint64_t stream) { reset(seed, stream); }

  void reset(std::uint64_t seed, std::uint64_t stream) {
    key0_ = static_cast<std::uint32_t>(seed);
    key1_ = static_cast<std::uint32_t>(seed >> 32);
    stream_lo_ = static_cast<std::uint32_t>(stream);
    stream_hi_ = static_cast<std::uint32_t>(stream >> 32);
    block_ = 0;
    have_spare_ = false;
    spare_gauss_valid_ = false;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return (static_cast<std::uint64_t>(out_[2]) << 32) | out_[3];
    }
    round10(static_cast<std::uint32_t>(block_),
            static_cast<std::uint32_t>(block_ >> 32));
    ++block_;
    have_spare_ = true;
    return (static_cast<std::uint64_t>(out_[0]) << 32) | out_[1];
  }

  // Uniform on (0,1): 53-bit mantissa, never exactly 0 or 1.
  double uniform() {
    return (static_cast<double>((*this)() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  double exponential() { return -std::log(uniform()); }

  // Marsaglia polar method; kept in-house so that streams are
  // bit-reproducible independent of the standard library in use.
  double normal() {
    if (spare_gauss_valid_) {
      spare_gauss_valid_ = false;
      return spare_gauss_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_gauss_ = v * f;
    spare_gauss_valid_ = true;
    return u * f;
  }

  // Integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Lemire-style rejection keeps the draw unbiased.
    std::uint64_t x = (*this)();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      const std::uint64_t t = -n % n;
      while (lo < t) {
        x = (*this)();
        m = static_cast<__uint128_t>(x) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  static std::uint32_t mulhi(std::uint32_t a, std::uint32_t b) {
    return static_cast<std::uint32_t>(
        (static_cast<std::uint64_t>(a) * b) >> 32);
  }

  void round10(std::uint32_t c0, std::uint32_t c1) {
    std::uint32_t x0 = c0, x1 = c1, x2 = stream_lo_, x3 = stream_hi_;
    std::uint32_t k0 = key0_, k1 = key1_;
    for (int r = 0; r < 10; ++r) {
      const std::uint32_t hi0 = mulhi(0xD2511F53u, x0);
      const std::uint32_t lo0 = 0xD2511F53u * x0;
      const std::uint32_t hi1 = mulhi(0xCD9E8D57u, x2);
      const std::uint32_t lo1 = 0xCD9E8D57u * x2;
      const std::uint32_t y0 = hi1 ^ x1 ^ k0;
      const std::uint32_t y1 = lo1;
      const std::uint32_t y2 = hi0 ^ x3 ^ k1;
      const std::uint32_t y3 = lo0;
      x0 = y0; x1 = y1; x2 = y2; x3 = y3;
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    out_[0] = x0; out_[1] = x1; out_[2] = x2; out_[3] = x3;
  }

  std::uint32_t key0_ = 0, key1_ = 0;
  std::uint32_t stream_lo_ = 0, stream_hi_ = 0;
  std::uint64_t block_ = 0;
  std::uint32_t out_[4] = {0, 0, 0, 0};
  bool have_spare_ = false;
  double spare_gauss_ = 0.0;
  bool spare_gauss_valid_ = false;
};

// Poisson draw; inversion for small mean, PTRS-flavoured rejection above.
std::int64_t poisson_draw(Philox& rng, double mean);

// Binomial(n, p) draw; inversion for small n*p, otherwise BTRS rejection.
std::int64_t binomial_draw(Philox& rng, std::int64_t n, double p);

// Gamma(shape, 1) draw (Marsaglia-Tsang).
double gamma_draw(Philox& rng, double shape);

// Sum of n iid Geometric(success q, support {0,1,...}) variables, i.e. a
// negative binomial, sampled through the Poisson-gamma mixture so huge n
// stays O(1).
std::int64_t negative_binomial_draw(Philox& rng, std::int64_t n, double q);

}  // namespace walklab
