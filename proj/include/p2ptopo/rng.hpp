#pragma once

#include <cstdint>
#include <random>

namespace p2ptopo {

struct RngSeed {
  std::uint64_t value = 0;
};

// splitmix64 finalizer; used to derive independent per-sample seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline RngSeed derive_seed(RngSeed base, std::uint64_t index) {
  return RngSeed{mix64(base.value ^ mix64(index + 0x632be59bd9b4e019ULL))};
}

// Stateless uniform in [0, 1) keyed by (seed, a, b). Used where draws must be
// coupled across runs that differ only in a probability threshold.
inline double keyed_uniform(RngSeed seed, std::uint64_t a, std::uint64_t b) {
  const std::uint64_t h = mix64(seed.value ^ mix64(a ^ mix64(b + 0x2545f4914f6cdd1dULL)));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// mt19937_64 plus distribution code that does not depend on the standard
// library's distribution implementations, so streams are identical across
// toolchains.
class Rng {
 public:
  explicit Rng(RngSeed seed) : engine_(mix64(seed.value)) {}

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n); n > 0. Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t n) {
    __extension__ using u128 = unsigned __int128;
    u128 m = static_cast<u128>(next()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<u128>(next()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace p2ptopo
