#include "chq/rng.hpp"

#include <cstdlib>

namespace chq {

Field random_smooth_field(const TorusGrid& g, Rng& rng, int kmax) {
  SpectralField F(g);
  const int n1 = g.n1();
  for (std::size_t i = 0; i < F.c.size(); ++i) {
    auto ix = unravel(i, g);
    bool in_band = true;
    for (int d = 0; d < g.N; ++d) {
      if (std::abs(kfreq(ix[d], n1)) > kmax) in_band = false;
    }
    if (in_band) F.c[i] = cplx{rng.normal(), rng.normal()};
  }
  // Hermitian part so the field is real.
  SpectralField H(g);
  for (std::size_t i = 0; i < F.c.size(); ++i) {
    auto ix = unravel(i, g);
    std::array<int, 3> mi = {0, 0, 0};
    for (int d = 0; d < g.N; ++d) mi[d] = (n1 - ix[d]) % n1;
    H.c[i] = 0.5 * (F.c[i] + std::conj(F.c[ravel(mi, g)]));
  }
  Field u = inverse_transform(H);
  const double nrm = l2_norm(u);
  if (nrm > 0.0) {
    for (auto& x : u.v) x /= nrm;
  }
  return u;
}

}  // namespace chq
