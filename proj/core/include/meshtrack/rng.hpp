#pragma once

#include <cstdint>

namespace meshtrack {

// Deterministic splitmix64 stream. Used instead of std:: distributions so
// generated data is bit-reproducible across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  // Derive an independent stream, e.g. per frame: Rng(seed).fork(frame).
  Rng fork(std::uint64_t salt) const {
    Rng r(state_);
    r.state_ ^= 0x9e3779b97f4a7c15ULL * (salt + 1);
    r.next();
    return r;
  }

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) { return next() % n; }

  // Standard normal via Box-Muller (one value per call, pair cached).
  double gaussian();

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace meshtrack
