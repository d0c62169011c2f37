#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "stba/types.hpp"

namespace stba {

// Deterministic random source. All distribution math is implemented here
// (not via std:: distributions) so identical seeds give identical byte
// streams on every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1).
  double uniform();
  // Uniform in [lo, hi).
  double uniform(double lo, double hi);
  // Uniform integer in [0, n).
  std::uint64_t index(std::uint64_t n);
  // Standard normal via Box-Muller (pairs cached).
  double normal();
  double normal(double mean, double stddev);
  // Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

  Vec3 normal_vec3(double stddev);

  // Derive an independent stream (for per-stage reproducibility).
  Rng fork(std::uint64_t salt);

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace stba
