#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace sde {

/// Stable 64-bit FNV-1a; used to derive per-task streams from a run seed.
constexpr std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Deterministic random source. std::mt19937_64 output is fixed by the
/// standard, but the std distributions are not, so every draw here is
/// derived from raw engine words.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Stream for one task: identical (task_id, seed) pairs replay exactly.
  static Rng for_task(std::string_view task_id, std::uint64_t seed) {
    return Rng(fnv1a64(task_id) ^ (seed * 0x9e3779b97f4a7c15ull));
  }

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, bound) by rejection; bound must be > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return x % bound;
  }

  /// Uniform integer in [lo, hi].
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
    if (span == UINT64_MAX) return static_cast<std::int64_t>(next());
    return static_cast<std::int64_t>(static_cast<std::uint64_t>(lo) + below(span + 1));
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  bool chance(double p) { return unit() < p; }

  template <typename Container>
  auto& pick(Container& c) {
    return c[below(c.size())];
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace sde
