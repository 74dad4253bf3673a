#pragma once

#include <string>
#include <vector>

#include "chq/bloch.hpp"
#include "chq/energy.hpp"
#include "chq/solver.hpp"

namespace chq {

struct TheoreticalExponents {
  double energy_exp = 0.0;  // (2p - Np + N + alpha)/(2p - 2)
  double norm_exp = 0.0;    // (2 - Np + N + alpha)/(4p - 4)
  bool norm_exp_valid = false;  // p < (N + alpha + 2)/N
};

TheoreticalExponents theoretical_exponents(int N, double alpha, double p);

struct ContinuationRow {
  double lambda = 0.0;
  double dist_b = 0.0;  // b - lambda
  double phi = 0.0;
  double j_value = 0.0;
  double h1_norm = 0.0;
  double h1_norm_plus = 0.0;
  double h1_norm_minus = 0.0;
  double residual = 0.0;
  int iters = 0;
  bool converged = false;
};

struct ContinuationTable {
  std::vector<ContinuationRow> rows;
  std::vector<SolutionRecord> records;  // parallel to rows
  GapInfo gap;
};

struct ContinuationOptions {
  SolverOptions solver;
  CutoffSpec cutoff;
  int max_step_halvings = 3;
};

// Walks the schedule in order; first point seeded by the edge ansatz, later
// points by the previous solution rescaled by ((b - l_next)/(b - l_prev))
// ^{1/(2p-2)}. On failure the lambda step toward the target halves, at most
// max_step_halvings times per scheduled point.
ContinuationTable continue_branch(const EnergyParams& base, const BlochDecomposition& d,
                                  const GapInfo& gap, const std::vector<double>& lambda_schedule,
                                  const ContinuationOptions& opts);

// OLS slope of log(column) vs log(b - lambda) over converged rows.
enum class FitColumn { phi, h1_norm };
SlopeFit fit_exponent(const ContinuationTable& table, FitColumn column);

struct BifurcationAudit {
  bool enough_data = false;
  bool edge_decay_pass = false;     // h1_norm decreasing toward b
  bool plus_lower_bound_pass = false;  // ||u+||^{2p-2} >= c beta_lambda, c > 0
  double fitted_c = 0.0;
  std::string message;
};

BifurcationAudit bifurcation_point_audit(const ContinuationTable& table, const GapInfo& gap,
                                         const SplittingConstants& sc, double p,
                                         bool norm_exp_valid);

// Observational lambda -> a+ sweep; schedule must decrease strictly.
ContinuationTable approach_a_study(const EnergyParams& base, const BlochDecomposition& d,
                                   const GapInfo& gap, const std::vector<double>& lambda_schedule,
                                   const ContinuationOptions& opts, const Field& seed);

}  // namespace chq
