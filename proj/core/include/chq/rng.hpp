#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "chq/grid.hpp"

namespace chq {

// Deterministic random source. Distributions are hand-rolled because the
// standard library's distribution sequences are implementation-defined and
// the acceptance contract requires bitwise-identical reruns.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t raw() { return eng_(); }

  double uniform01() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Smooth random field: independent normal spectral coefficients on |k|_inf <=
// kmax, Hermitian-symmetrized, unit-normalized in L2. Fixed traversal order.
Field random_smooth_field(const TorusGrid& g, Rng& rng, int kmax);

}  // namespace chq
