#pragma once

// Deterministic RNG streams.  mt19937_64 is bit-reproducible across
// platforms; distributions are mapped by hand since the standard library
// distribution objects are not.

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace semiflow {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // independent substream derived from (seed, stream id)
  static Rng substream(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s);
    s = seed ^ (0xD1B54A32D192ED03ull * (stream + 1));
    std::uint64_t b = splitmix64(s);
    return Rng(a ^ b);
  }

  std::uint64_t next_u64() { return gen_(); }

  // uniform in [0,1)
  double uniform() { return (gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Box-Muller (explicit, reproducible)
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  std::complex<double> complex_normal() {
    const double re = normal();
    const double im = normal();
    return {re, im};
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace semiflow
