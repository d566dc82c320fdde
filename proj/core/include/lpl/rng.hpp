#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace lpl {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic random stream. All sampling goes through hand-rolled
/// transforms (not <random> distributions) so a given seed produces the same
/// draw sequence on every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform();

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);

  /// Uniform integer in [lo, hi], both inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  /// Gaussian via Box-Muller. sigma == 0 returns mean without consuming
  /// draws, so noise-free configs stay draw-count independent.
  double normal(double mean = 0.0, double sigma = 1.0);

  /// Poisson count (Knuth product method; intended for small lambda).
  int poisson(double lambda);

  /// Gamma(shape, 1) via Marsaglia-Tsang, boosted for shape < 1.
  double gamma(double shape);

  /// Beta(a, b) from two gamma draws.
  double beta(double a, double b);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Substream derivation: the stream for (seed, a, b) depends only on those
/// values, so per-frame streams can be consumed in any order or thread layout
/// without changing the output.
inline Rng derive_rng(std::uint64_t seed, std::uint64_t a = 0, std::uint64_t b = 0) {
  return Rng(splitmix64(seed + splitmix64(a + splitmix64(b + 0x51ed270b9f0fd1ddULL))));
}

}  // namespace lpl
