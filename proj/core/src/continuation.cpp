#include "chq/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace chq {

namespace {

ContinuationRow row_from_record(const SolutionRecord& r, const GapInfo& gap) {
  ContinuationRow row;
  row.lambda = r.lambda;
  row.dist_b = gap.b - r.lambda;
  row.phi = r.phi;
  row.j_value = r.j_value;
  row.h1_norm = r.h1_norm;
  row.h1_norm_plus = r.h1_norm_plus;
  row.h1_norm_minus = r.h1_norm_minus;
  row.residual = r.residual_dual_norm;
  row.iters = r.newton_iters;
  row.converged = r.converged;
  return row;
}

Field rescaled_seed(const Field& u, double lam_from, double lam_to, const GapInfo& gap,
                    double p) {
  const double c = std::pow((gap.b - lam_to) / (gap.b - lam_from), 1.0 / (2.0 * p - 2.0));
  Field out = u;
  for (double& v : out.v) v *= c;
  return out;
}

// Walks one schedule, warm-starting each point from the last converged
// solution (or a cold start supplied by `first_seed`).  On a failed solve the
// step from the last anchor toward the target halves; intermediate successes
// only refresh the seed and are not recorded.
ContinuationTable walk_schedule(const EnergyParams& base, const BlochDecomposition& d,
                                const GapInfo& gap, const std::vector<double>& schedule,
                                const ContinuationOptions& opts, bool rescale_seeds,
                                const Field* first_seed) {
  const double level = d.store == BlochDecomposition::Store::below_level
                           ? d.split_level
                           : 0.5 * (gap.a + gap.b);
  ContinuationTable table;
  table.gap = gap;

  bool have_prev = false;
  Field u_prev(d.grid);
  bool stopped = false;
  // The anchor is the most recent converged solution; before any exists the
  // upper edge stands in, so halved steps retreat toward easier lambdas.  It
  // must survive across targets: resetting it to the edge would rescale the
  // previous solution by a divide-by-zero factor.
  double anchor = gap.b;

  for (double target : schedule) {
    if (stopped) break;
    int fails = 0;
    double next = target;
    SolutionRecord target_rec;
    while (true) {
      EnergyParams ep = base;
      ep.lambda = next;
      Field seed(d.grid);
      if (have_prev) {
        seed = rescale_seeds ? rescaled_seed(u_prev, anchor, next, gap, base.nonlocal.p)
                             : u_prev;
      } else if (first_seed != nullptr) {
        seed = *first_seed;
      } else {
        seed = ansatz_initial(next, d, gap, opts.cutoff, base.nonlocal, base.riesz);
      }
      SolutionRecord rec = newton_solve(seed, ep, d, level, opts.solver);
      if (next == target) target_rec = rec;
      if (rec.converged) {
        have_prev = true;
        anchor = next;
        u_prev = rec.u;
        if (next == target) {
          table.rows.push_back(row_from_record(rec, gap));
          table.records.push_back(rec);
          break;
        }
        next = target;  // retry the scheduled point from the closer anchor
        continue;
      }
      ++fails;
      if (fails > opts.max_step_halvings) {
        table.rows.push_back(row_from_record(target_rec, gap));
        table.records.push_back(target_rec);
        stopped = true;  // seeds past a failed point are unreliable
        break;
      }
      next = anchor + 0.5 * (next - anchor);
    }
  }
  return table;
}

}  // namespace

TheoreticalExponents theoretical_exponents(int N, double alpha, double p) {
  if (N < 1 || N > 3) throw std::invalid_argument("dimension must be 1, 2, or 3");
  if (!(alpha > 0.0) || !(alpha < static_cast<double>(N)))
    throw std::invalid_argument("alpha out of range (0, N)");
  NonlocalParams np;
  np.p = p;
  np.alpha = alpha;
  if (!(p > np.p_low(N)) || !(p < np.p_high(N)))
    throw std::invalid_argument("p out of admissible range");
  TheoreticalExponents e;
  const double Nd = static_cast<double>(N);
  e.energy_exp = (2.0 * p - Nd * p + Nd + alpha) / (2.0 * p - 2.0);
  e.norm_exp = (2.0 - Nd * p + Nd + alpha) / (4.0 * p - 4.0);
  e.norm_exp_valid = p < (Nd + alpha + 2.0) / Nd;
  return e;
}

ContinuationTable continue_branch(const EnergyParams& base, const BlochDecomposition& d,
                                  const GapInfo& gap, const std::vector<double>& lambda_schedule,
                                  const ContinuationOptions& opts) {
  if (lambda_schedule.empty()) throw std::invalid_argument("empty lambda schedule");
  for (double l : lambda_schedule) {
    if (!(l > gap.a) || !(l < gap.b))
      throw std::invalid_argument("schedule point outside the spectral gap");
  }
  for (std::size_t i = 1; i < lambda_schedule.size(); ++i) {
    if (!(lambda_schedule[i] > lambda_schedule[i - 1]))
      throw std::invalid_argument("lambda schedule must increase strictly toward the upper edge");
  }
  return walk_schedule(base, d, gap, lambda_schedule, opts, /*rescale_seeds=*/true, nullptr);
}

SlopeFit fit_exponent(const ContinuationTable& table, FitColumn column) {
  std::vector<double> x, y;
  for (const auto& r : table.rows) {
    if (!r.converged) continue;
    x.push_back(r.dist_b);
    y.push_back(column == FitColumn::phi ? r.phi : r.h1_norm);
  }
  if (x.size() < 4)
    throw std::invalid_argument("fitting refused: fewer than 4 converged points");
  return fit_loglog(x, y);
}

BifurcationAudit bifurcation_point_audit(const ContinuationTable& table, const GapInfo& gap,
                                         const SplittingConstants& sc, double p,
                                         bool norm_exp_valid) {
  BifurcationAudit audit;
  std::vector<const ContinuationRow*> conv;
  for (const auto& r : table.rows)
    if (r.converged) conv.push_back(&r);
  if (conv.size() < 2) {
    audit.message = "insufficient data: fewer than 2 converged rows";
    return audit;
  }
  audit.enough_data = true;

  // (i) Edge decay: the full H1 norm must decrease toward the upper edge
  //     whenever the norm exponent is positive (valid regime).
  std::sort(conv.begin(), conv.end(),
            [](const ContinuationRow* a, const ContinuationRow* b) {
              return a->dist_b < b->dist_b;
            });
  if (norm_exp_valid) {
    bool mono = true;
    for (std::size_t i = 1; i < conv.size(); ++i)
      if (!(conv[i]->h1_norm > conv[i - 1]->h1_norm)) mono = false;
    audit.edge_decay_pass = mono;
  } else {
    audit.edge_decay_pass = true;  // no decay predicted in the invalid regime
  }

  // (ii) Away from the edge the plus component stays bounded below:
  //      ||u+||_{E_lambda}^{2p-2} >= c * beta_lambda with a fitted c > 0.
  double c = std::numeric_limits<double>::infinity();
  int used = 0;
  const double width = gap.b - gap.a;
  for (const ContinuationRow* r : conv) {
    if (r->dist_b < 0.1 * width) continue;
    const double beta = sc.beta_lambda(r->lambda);
    if (!(beta > 0.0)) continue;
    c = std::min(c, std::pow(r->h1_norm_plus, 2.0 * p - 2.0) / beta);
    ++used;
  }
  if (used == 0) {
    for (const ContinuationRow* r : conv) {
      const double beta = sc.beta_lambda(r->lambda);
      if (!(beta > 0.0)) continue;
      c = std::min(c, std::pow(r->h1_norm_plus, 2.0 * p - 2.0) / beta);
      ++used;
    }
  }
  audit.fitted_c = used > 0 && std::isfinite(c) ? c : 0.0;
  audit.plus_lower_bound_pass = audit.fitted_c > 0.0;
  audit.message = audit.edge_decay_pass && audit.plus_lower_bound_pass
                      ? "both lower-bound checks hold"
                      : "a lower-bound check failed";
  return audit;
}

ContinuationTable approach_a_study(const EnergyParams& base, const BlochDecomposition& d,
                                   const GapInfo& gap, const std::vector<double>& lambda_schedule,
                                   const ContinuationOptions& opts, const Field& seed) {
  if (lambda_schedule.empty()) throw std::invalid_argument("empty lambda schedule");
  for (double l : lambda_schedule) {
    if (!(l > gap.a) || !(l < gap.b))
      throw std::invalid_argument("schedule point outside the spectral gap");
  }
  for (std::size_t i = 1; i < lambda_schedule.size(); ++i) {
    if (!(lambda_schedule[i] < lambda_schedule[i - 1]))
      throw std::invalid_argument("lambda schedule must decrease strictly toward the lower edge");
  }
  return walk_schedule(base, d, gap, lambda_schedule, opts, /*rescale_seeds=*/false, &seed);
}

}  // namespace chq
