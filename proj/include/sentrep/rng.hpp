#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "sentrep/util.hpp"

namespace sentrep {

// Deterministic random source. Every draw goes through mt19937_64, whose
// output sequence is fixed by the standard, so streams are reproducible
// across platforms and build types.
class Rng {
 public:
  explicit Rng(uint64_t seed) : seed_(seed), eng_(seed) {}

  uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1) using the top 53 bits.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double gauss() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 == 0.0) u1 = uniform01();
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Uniform integer in [0, n); rejection keeps it unbiased.
  uint64_t below(uint64_t n) {
    if (n == 0) throw ValueError("below(0) is undefined");
    uint64_t t = (UINT64_MAX % n + 1) % n;
    uint64_t r;
    do {
      r = eng_();
    } while (r < t);
    return r % n;
  }

  template <class T>
  void fill_uniform(T* p, size_t n, double lo, double hi) {
    for (size_t i = 0; i < n; ++i) p[i] = static_cast<T>(uniform(lo, hi));
  }

  template <class T>
  void fill_gauss(T* p, size_t n) {
    for (size_t i = 0; i < n; ++i) p[i] = static_cast<T>(gauss());
  }

  // Fisher-Yates.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Independent stream derived from this generator's seed and a tag.
  Rng fork(uint64_t tag) const { return Rng(mix_seed(seed_, tag)); }

  uint64_t seed() const { return seed_; }

 private:
  uint64_t seed_;
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace sentrep
