#pragma once

// Deterministic random sampling. mt19937_64 is fully specified by the
// standard; the double conversions below avoid std::uniform_real_distribution,
// whose output is implementation-defined. Parallel loops must derive per-shard
// seeds with shard_seed(base, shard) and never share an engine.

#include <cstdint>
#include <random>

#include "reifsolve/geo.hpp"

namespace reif {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  static uint64_t shard_seed(uint64_t base, uint64_t shard) {
    return splitmix64(base ^ splitmix64(shard + 1));
  }

  uint64_t next() { return gen_(); }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  double log_uniform(double a, double b) {
    return a * std::exp(uniform() * std::log(b / a));
  }

  int uniform_int(int n) { return static_cast<int>(gen_() % static_cast<uint64_t>(n)); }

  // standard normal via Box-Muller (hand rolled for cross-platform determinism)
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  Vec on_sphere(int n) {
    Vec v(n);
    double norm = 0.0;
    do {
      for (int d = 0; d < n; ++d) v[d] = normal();
      norm = v.norm();
    } while (norm < 1e-12);
    return v / norm;
  }

  Vec in_box(const Box& box) {
    Vec v(box.dim());
    for (int d = 0; d < box.dim(); ++d) v[d] = uniform(box.lo[d], box.hi[d]);
    return v;
  }

  Vec in_ball(const Vec& center, double r) {
    const int n = static_cast<int>(center.size());
    while (true) {
      Vec v(n);
      for (int d = 0; d < n; ++d) v[d] = uniform(-1.0, 1.0);
      if (v.squaredNorm() <= 1.0) return center + r * v;
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace reif
