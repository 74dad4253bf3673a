#include "chq/energy.hpp"

#include <cmath>
#include <stdexcept>

namespace chq {

Field s_lambda_apply(const Field& u, const EnergyParams& ep) {
  if (!(u.grid == ep.potential.grid)) throw std::invalid_argument("grid mismatch");
  Field out = apply_xi2_multiplier(u, xi2_table(u.grid));
  for (std::size_t i = 0; i < out.v.size(); ++i)
    out.v[i] += (ep.potential.v[i] - ep.lambda) * u.v[i];
  return out;
}

double phi(const Field& u, const EnergyParams& ep) {
  const double q = quadratic_form(u, ep.potential, ep.lambda);
  const double j = j_energy(u, ep.nonlocal, ep.riesz);
  return 0.5 * q - j / (2.0 * ep.nonlocal.p);
}

Field phi_residual(const Field& u, const EnergyParams& ep) {
  Field out = s_lambda_apply(u, ep);
  const Field conv = riesz_apply(abs_pow(u, ep.nonlocal.p), ep.riesz);
  const Field w = signed_pow(u, ep.nonlocal.p - 1.0);
  for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] -= conv.v[i] * w.v[i];
  return out;
}

double critical_identity_defect(const Field& u, const EnergyParams& ep) {
  const double p = ep.nonlocal.p;
  const double ph = phi(u, ep);
  const double jt = (p - 1.0) / (2.0 * p) * j_energy(u, ep.nonlocal, ep.riesz);
  const double den = std::abs(ph) + jt;
  if (den == 0.0) return 0.0;
  return std::abs(ph - jt) / den;
}

double pohozaev_defect(const Field& u, const EnergyParams& ep) {
  for (double v : ep.potential.v) {
    if (v != 0.0)
      throw std::invalid_argument("scale identity check requires identically zero potential");
  }
  const int N = u.grid.N;
  const double p = ep.nonlocal.p;
  const double alpha = ep.nonlocal.alpha;
  std::vector<double> sq(u.v.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = u.v[i] * u.v[i];
  const double mass = pairwise_sum(sq) * u.grid.cell_volume();
  const double t1 = 0.5 * (N - 2) * gradient_sq_integral(u);
  const double t2 = 0.5 * N * ep.lambda * mass;
  const double t3 = (N + alpha) / (2.0 * p) * j_energy(u, ep.nonlocal, ep.riesz);
  const double den = std::abs(t1) + std::abs(t2) + std::abs(t3);
  if (den == 0.0) return 0.0;
  return std::abs(t1 - t2 - t3) / den;
}

EnergyReport energy_report(const Field& u, const EnergyParams& ep) {
  EnergyReport r;
  r.q_value = quadratic_form(u, ep.potential, ep.lambda);
  r.j_value = j_energy(u, ep.nonlocal, ep.riesz);
  r.phi = 0.5 * r.q_value - r.j_value / (2.0 * ep.nonlocal.p);
  r.residual_l2 = l2_norm(phi_residual(u, ep));
  r.critical_identity_defect = critical_identity_defect(u, ep);
  bool vzero = true;
  for (double v : ep.potential.v) {
    if (v != 0.0) {
      vzero = false;
      break;
    }
  }
  if (vzero) r.pohozaev_defect = pohozaev_defect(u, ep);
  return r;
}

}  // namespace chq
