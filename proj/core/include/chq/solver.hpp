#pragma once

#include <functional>

#include "chq/ansatz.hpp"
#include "chq/bloch.hpp"
#include "chq/energy.hpp"
#include "chq/grid.hpp"

namespace chq {

struct SolverOptions {
  int max_newton_iters = 100;
  double residual_tol = 1e-8;     // dual-norm convergence threshold
  double krylov_tol = 1e-8;       // relative preconditioned residual
  int krylov_max_iters = 600;
  int max_backtrack = 30;
  double max_amplitude = 1e6;     // sup-norm blow-up guard
  double collapse_h1 = 1e-7;      // trivial-solution threshold
};

enum class SolveOutcome : int {
  converged = 0,
  collapsed = 2,
  max_iters = 3,
  blow_up = 4,
};

struct SolutionRecord {
  double lambda = 0.0;
  Field u;
  double phi = 0.0;
  double j_value = 0.0;
  double h1_norm = 0.0;
  double h1_norm_plus = 0.0;
  double h1_norm_minus = 0.0;
  double residual_dual_norm = 0.0;
  int newton_iters = 0;
  bool converged = false;
  SolveOutcome outcome = SolveOutcome::max_iters;
  EnergyReport energy;
};

void validate_solver_options(const SolverOptions& opts);

// zeta = (Id - P0) Psi_{R(lambda)} scaled by the ray maximizer
// s* = (Q_lambda(zeta) / J(zeta))^{1/(2p-2)}.
Field ansatz_initial(double lambda, const BlochDecomposition& d, const GapInfo& gap,
                     const CutoffSpec& cutoff, const NonlocalParams& np, const RieszParams& rp);

// || |S_lambda|^{-1/2} F ||_2 computed in the Bloch eigenbasis.
double dual_residual_norm(const Field& F, const BlochDecomposition& d, double lambda);

// Derivative of the residual map: DF(u)[v] = S_lambda v
// - p (I_alpha * (|u|^{p-2} u v)) |u|^{p-2} u - (p-1)(I_alpha * |u|^p)|u|^{p-2} v.
Field jacobian_apply(const Field& u, const Field& v, const EnergyParams& ep);

// Minimum-residual iteration for the symmetric indefinite system A x = b with
// SPD preconditioning; returns x. iters_out, relres_out optional.
Field minres_solve(const std::function<Field(const Field&)>& A, const Field& b,
                   const std::function<Field(const Field&)>& precond, double rtol, int maxiter,
                   int* iters_out = nullptr, double* relres_out = nullptr);

// Damped Newton iteration on the strong-form residual, preconditioned by
// |S_lambda|^{-1}; split_level fixes the plus/minus decomposition reported in
// the record.
SolutionRecord newton_solve(const Field& u0, const EnergyParams& ep, const BlochDecomposition& d,
                            double split_level, const SolverOptions& opts);

// Canonical lattice-orbit representative: shifts the maximizer of the per-cell
// mass to the first unit cell.
Field normalize_translation(const Field& u);

}  // namespace chq
