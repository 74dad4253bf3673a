#include "chq/potential.hpp"

#include <cmath>
#include <stdexcept>

namespace chq {

Field sample_potential(const PotentialSpec& spec, const TorusGrid& g) {
  Field V(g);
  switch (spec.kind) {
    case PotentialKind::zero:
      break;
    case PotentialKind::separable_cosine: {
      // V(x) = c0 + V0 sum_d cos(2 pi x_d); sampled per direction then summed
      // so the field is exactly 1-periodic on the grid.
      const int n1 = g.n1();
      std::vector<double> c1(static_cast<std::size_t>(n1));
      for (int i = 0; i < n1; ++i) {
        c1[static_cast<std::size_t>(i)] = std::cos(2.0 * M_PI * (i % g.s) * g.h());
      }
      for (std::size_t i = 0; i < V.v.size(); ++i) {
        auto ix = unravel(i, g);
        double acc = spec.c0;
        for (int d = 0; d < g.N; ++d) acc += spec.V0 * c1[static_cast<std::size_t>(ix[d])];
        V.v[i] = acc;
      }
      break;
    }
    case PotentialKind::tabulated: {
      std::size_t cell = 1;
      for (int d = 0; d < g.N; ++d) cell *= static_cast<std::size_t>(g.s);
      if (spec.table.size() != cell)
        throw std::invalid_argument("tabulated potential must have s^N values");
      for (std::size_t i = 0; i < V.v.size(); ++i) {
        auto ix = unravel(i, g);
        std::size_t ci = 0;
        for (int d = 0; d < g.N; ++d) ci = ci * static_cast<std::size_t>(g.s) + static_cast<std::size_t>(ix[d] % g.s);
        V.v[i] = spec.table[ci];
      }
      break;
    }
  }
  return V;
}

}  // namespace chq
