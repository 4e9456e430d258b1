#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace aimaze {

/// Deterministic random source. mt19937_64 is fully specified by the
/// standard, so streams are bit-identical across platforms; bounded draws
/// avoid std::uniform_int_distribution, whose mapping is
/// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Draw in [0, n) via the multiply-shift mapping. n must be > 0.
  std::uint32_t below(std::uint32_t n) {
    const std::uint64_t x = next_u64() >> 32;
    return static_cast<std::uint32_t>((x * n) >> 32);
  }

  /// Uniform double in [0, 1).
  double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool chance(double p) { return unit() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(static_cast<std::uint32_t>(i))]);
    }
  }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[below(static_cast<std::uint32_t>(v.size()))];
  }

  /// splitmix64-style combiner for deriving per-stream seeds.
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace aimaze
