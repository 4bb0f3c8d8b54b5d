#ifndef SCALEBAYES_RNG_HPP
#define SCALEBAYES_RNG_HPP

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace scalebayes::rng {

// SplitMix64 finalizer. Statistically strong enough that hashing a key plus a
// counter gives an independent-looking stream per key.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t combine(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ (0x9e3779b97f4a7c15ULL + b + (a << 6) + (a >> 2)));
}

// Purpose tags keep unrelated random streams from colliding even when they
// are keyed by the same (seed, index) words.
namespace tag {
inline constexpr std::uint64_t noise = 0x6e6f697365ULL;
inline constexpr std::uint64_t prior = 0x7072696f72ULL;
inline constexpr std::uint64_t mcmc = 0x6d636d63ULL;
inline constexpr std::uint64_t radius = 0x726164697573ULL;
inline constexpr std::uint64_t task = 0x7461736bULL;
}  // namespace tag

// Counter-based stream: the k-th output is a pure function of (key, k), so a
// stream keyed by task indices is reproducible regardless of which thread
// runs it, and streams with different keys never share state.
class Stream {
 public:
  Stream() : key_(0) {}
  explicit Stream(std::uint64_t key) : key_(key) {}

  static Stream keyed(std::initializer_list<std::uint64_t> words) {
    std::uint64_t k = 0x5ca1ab1e0ddba11ULL;
    for (auto w : words) k = combine(k, w);
    return Stream(k);
  }

  std::uint64_t next_u64() { return mix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  // Uniform on (0,1): 53 random bits, offset by half an ulp so 0 and 1 are
  // excluded (safe under log()).
  double next_uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Laplace with unit scale, density e^{-|x|}/2.
  double next_laplace() {
    const double u = next_uniform() - 0.5;
    return (u < 0 ? 1.0 : -1.0) * std::log(1.0 - 2.0 * std::abs(u));
  }

  double next_exponential() { return -std::log(next_uniform()); }

  // Marsaglia-Tsang; the boost step handles shape < 1.
  double next_gamma(double shape, double rate) {
    if (shape < 1.0) {
      const double u = next_uniform();
      return next_gamma(shape + 1.0, rate) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = next_normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      const double u = next_uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
  }

  // Inversion by sequential search; adequate for the small means used here.
  std::uint64_t next_poisson(double mu) {
    const double u = next_uniform();
    double p = std::exp(-mu);
    double cdf = p;
    std::uint64_t k = 0;
    while (u > cdf && k < 100000) {
      ++k;
      p *= mu / static_cast<double>(k);
      cdf += p;
    }
    return k;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// One-off standard normal keyed by (seed, purpose, coordinate, replicate).
// Used for observation noise: coordinate i's draw does not depend on how many
// coordinates are generated, so widening the observation window leaves
// earlier coordinates untouched.
inline double keyed_normal(std::uint64_t seed, std::uint64_t purpose,
                           std::uint64_t index, std::uint64_t replicate) {
  Stream s = Stream::keyed({seed, purpose, index, replicate});
  return s.next_normal();
}

}  // namespace scalebayes::rng

#endif
