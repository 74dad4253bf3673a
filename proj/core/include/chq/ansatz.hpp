#pragma once

#include <array>
#include <vector>

#include "chq/bloch.hpp"
#include "chq/grid.hpp"
#include "chq/riesz.hpp"

namespace chq {

// Radial cutoff profile: identically 1 on [0, r1], 0 beyond r2, monotone in
// between. Profiles: quintic smoothstep (C^2) or the smooth bump
// exp(1 - 1/(1 - t^2)) (C^infinity).
struct CutoffSpec {
  enum class Profile { quintic, bump };
  Profile profile = Profile::quintic;
  double r1 = 1.0;
  double r2 = 2.0;
};

double cutoff_eval(const CutoffSpec& spec, double r);

// Cutoff sampled as a radial field centered at the torus midpoint, scaled so
// eta_R(x) = eta(|x - center| / R).
Field cutoff_field(const CutoffSpec& spec, const TorusGrid& g, double R);

// Band-edge wave: supercell eigenfunction at the upper gap edge, sup-norm 1.
struct BlochEdgeWave {
  Field psi;
  double eigenvalue = 0.0;
  std::array<int, 3> kappa_m = {0, 0, 0};
  int band = 0;
  bool realified = false;
};

BlochEdgeWave bloch_edge_wave(const BlochDecomposition& d, const GapInfo& gap);

// Retiles a wave computed on one supercell onto a larger commensurate one.
// Valid when the edge quasimomentum copies exactly (kappa_m scales with the
// ratio); the wave's physical period divides the small box.
Field retile_wave(const Field& psi, const TorusGrid& target);

// Psi_R(x) = R^{-N/2} eta((x - center)/R) Psi(x); pre: R >= 1, 2R <= L/2.
Field psi_r_field(const Field& psi, const CutoffSpec& cutoff, double R);

// Cell average of an exactly 1-periodic field; errors when cells deviate by
// more than 1e-10.
double mean_value(const Field& f);

struct RiemannLebesgueRow {
  double R = 0.0;
  double scaled_j = 0.0;  // R^{Np - N - alpha} J(Psi_R)
  double target = 0.0;    // [M(|Psi|^p)]^2 J(eta)
};

std::vector<RiemannLebesgueRow> riemann_lebesgue_check(const Field& psi, const CutoffSpec& cutoff,
                                                       const NonlocalParams& np,
                                                       const RieszParams& rp,
                                                       const std::vector<double>& R_list);

// R(lambda) = 1 / sqrt(b - lambda), clamped to [1, L/4].
double ansatz_radius(double lambda, const GapInfo& gap, const TorusGrid& g);

struct EdgeScalingRow {
  double dist_b = 0.0;        // b - lambda
  double p0_h1 = 0.0;         // || P0 Psi_R ||_{H1}
  double q_zeta = 0.0;        // Q_lambda(zeta)
  double j_zeta_scaled = 0.0; // J(zeta) * (b - lambda)^{-(Np - N - alpha)/2}
  double j_p0 = 0.0;          // J(P0 Psi_R), supporting diagnostic
};

struct SlopeFit {
  double slope = 0.0;
  double stderr_est = 0.0;
};

// Ordinary least squares of log(y) against log(x); stderr of the slope.
SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

struct EdgeScalingTable {
  std::vector<EdgeScalingRow> rows;
  SlopeFit p0_h1_slope;
  SlopeFit q_zeta_slope;
  SlopeFit j_p0_slope;
};

EdgeScalingTable edge_scaling_study(const BlochDecomposition& d, const GapInfo& gap,
                                    const std::vector<double>& lambda_list,
                                    const CutoffSpec& cutoff, const NonlocalParams& np,
                                    const RieszParams& rp);

}  // namespace chq
