#pragma once

#include <string>
#include <vector>

#include "chq/grid.hpp"

namespace chq {

enum class PotentialKind { zero, separable_cosine, tabulated };

struct PotentialSpec {
  PotentialKind kind = PotentialKind::zero;
  double c0 = 0.0;  // constant shift
  double V0 = 0.0;  // cosine amplitude
  std::vector<double> table;  // one unit cell, s^N values, row-major

  static PotentialSpec zero() { return PotentialSpec{}; }
  static PotentialSpec cosine(double c0, double V0) {
    PotentialSpec p;
    p.kind = PotentialKind::separable_cosine;
    p.c0 = c0;
    p.V0 = V0;
    return p;
  }
};

// Samples V on the grid; exactly 1-periodic by construction.
Field sample_potential(const PotentialSpec& spec, const TorusGrid& g);

}  // namespace chq
