#pragma once

#include <optional>

#include "chq/bloch.hpp"
#include "chq/grid.hpp"
#include "chq/riesz.hpp"

namespace chq {

// Parameters of the indefinite functional Phi(u) = Q_lambda(u)/2 - J(u)/(2p).
struct EnergyParams {
  Field potential;
  double lambda = 0.0;
  NonlocalParams nonlocal;
  RieszParams riesz;
};

struct EnergyReport {
  double phi = 0.0;
  double j_value = 0.0;
  double q_value = 0.0;
  double residual_l2 = 0.0;
  double critical_identity_defect = 0.0;
  std::optional<double> pohozaev_defect;
};

// S_lambda u = (-Delta + V - lambda) u, Laplacian applied spectrally.
Field s_lambda_apply(const Field& u, const EnergyParams& ep);

double phi(const Field& u, const EnergyParams& ep);

// Strong-form residual F(u) = S_lambda u - (I_alpha * |u|^p)|u|^{p-2}u; its
// L2 pairing with v is the directional derivative of phi at u along v.
Field phi_residual(const Field& u, const EnergyParams& ep);

// |phi - ((p-1)/(2p)) J| / (|phi| + ((p-1)/(2p)) J); 0 at exact critical
// points and for u = 0.
double critical_identity_defect(const Field& u, const EnergyParams& ep);

// Scale-invariance defect of the autonomous equation; requires V identically
// zero and is meaningful for fields supported well inside the torus.
double pohozaev_defect(const Field& u, const EnergyParams& ep);

EnergyReport energy_report(const Field& u, const EnergyParams& ep);

}  // namespace chq
