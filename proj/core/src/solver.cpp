#include "chq/solver.hpp"

#include <cmath>
#include <stdexcept>

namespace chq {

namespace {

double dot(const Field& a, const Field& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.v.size(); ++i) s += a.v[i] * b.v[i];
  return s;
}

double linf(const Field& a) {
  double m = 0.0;
  for (double v : a.v) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

void validate_solver_options(const SolverOptions& o) {
  if (o.max_newton_iters < 1) throw std::invalid_argument("max_newton_iters must be >= 1");
  if (o.krylov_max_iters < 1) throw std::invalid_argument("krylov_max_iters must be >= 1");
  if (!(o.residual_tol > 0.0)) throw std::invalid_argument("residual_tol must be positive");
  if (!(o.krylov_tol > 0.0)) throw std::invalid_argument("krylov_tol must be positive");
  if (o.max_backtrack < 0) throw std::invalid_argument("max_backtrack must be >= 0");
  if (!(o.max_amplitude > 0.0)) throw std::invalid_argument("max_amplitude must be positive");
  if (!(o.collapse_h1 > 0.0)) throw std::invalid_argument("collapse_h1 must be positive");
}

Field ansatz_initial(double lambda, const BlochDecomposition& d, const GapInfo& gap,
                     const CutoffSpec& cutoff, const NonlocalParams& np, const RieszParams& rp) {
  BlochEdgeWave wave = bloch_edge_wave(d, gap);
  const double R = ansatz_radius(lambda, gap, d.grid);
  Field pr = psi_r_field(wave.psi, cutoff, R);
  const double level = d.store == BlochDecomposition::Store::below_level
                           ? d.split_level
                           : 0.5 * (gap.a + gap.b);
  Field zeta = project(pr, d, level, Side::plus);
  const double q = quadratic_form(zeta, d.potential, lambda);
  const double j = j_energy(zeta, np, rp);
  if (!(j > 0.0)) throw std::invalid_argument("degenerate ansatz: vanishing nonlocal energy");
  if (!(q > 0.0)) throw std::invalid_argument("degenerate ansatz: nonpositive quadratic form");
  const double sstar = std::pow(q / j, 1.0 / (2.0 * np.p - 2.0));
  for (double& v : zeta.v) v *= sstar;
  return zeta;
}

double dual_residual_norm(const Field& F, const BlochDecomposition& d, double lambda) {
  Field half = apply_spectral_function(
      F, d, [lambda](double m) { return 1.0 / std::sqrt(std::abs(m - lambda)); });
  return l2_norm(half);
}

Field jacobian_apply(const Field& u, const Field& v, const EnergyParams& ep) {
  const double p = ep.nonlocal.p;
  Field w = signed_pow(u, p - 1.0);
  Field conv0 = riesz_apply(abs_pow(u, p), ep.riesz);
  Field am2 = abs_pow(u, p - 2.0);
  Field uv(u.grid);
  for (std::size_t i = 0; i < uv.v.size(); ++i) uv.v[i] = w.v[i] * v.v[i];
  Field conv1 = riesz_apply(uv, ep.riesz);
  Field out = s_lambda_apply(v, ep);
  for (std::size_t i = 0; i < out.v.size(); ++i)
    out.v[i] -= p * conv1.v[i] * w.v[i] + (p - 1.0) * conv0.v[i] * am2.v[i] * v.v[i];
  return out;
}

Field minres_solve(const std::function<Field(const Field&)>& A, const Field& b,
                   const std::function<Field(const Field&)>& precond, double rtol, int maxiter,
                   int* iters_out, double* relres_out) {
  Field x(b.grid);
  Field r1 = b;
  Field y = precond(r1);
  double beta1 = dot(r1, y);
  if (beta1 < 0.0) throw std::runtime_error("preconditioner is not positive definite");
  if (iters_out) *iters_out = 0;
  if (relres_out) *relres_out = 0.0;
  if (beta1 == 0.0) return x;
  beta1 = std::sqrt(beta1);

  double oldb = 0.0, beta = beta1, dbar = 0.0, epsln = 0.0, phibar = beta1;
  double cs = -1.0, sn = 0.0;
  Field r2 = r1;
  Field w(b.grid), w2(b.grid);
  int itn = 0;
  while (itn < maxiter) {
    ++itn;
    const double sinv = 1.0 / beta;
    Field v = y;
    for (double& e : v.v) e *= sinv;
    y = A(v);
    if (itn >= 2) {
      const double c0 = beta / oldb;
      for (std::size_t i = 0; i < y.v.size(); ++i) y.v[i] -= c0 * r1.v[i];
    }
    const double alfa = dot(v, y);
    const double c1 = alfa / beta;
    for (std::size_t i = 0; i < y.v.size(); ++i) y.v[i] -= c1 * r2.v[i];
    r1 = r2;
    r2 = y;
    y = precond(r2);
    oldb = beta;
    const double bb = dot(r2, y);
    if (bb < 0.0) throw std::runtime_error("preconditioner is not positive definite");
    beta = std::sqrt(bb);

    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    double gamma = std::sqrt(gbar * gbar + beta * beta);
    gamma = std::max(gamma, 1e-300);
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;

    const Field w1 = w2;
    w2 = w;
    for (std::size_t i = 0; i < w.v.size(); ++i)
      w.v[i] = (v.v[i] - oldeps * w1.v[i] - delta * w2.v[i]) / gamma;
    for (std::size_t i = 0; i < x.v.size(); ++i) x.v[i] += phi * w.v[i];

    if (phibar <= rtol * beta1 || beta <= 1e-300) break;
  }
  if (iters_out) *iters_out = itn;
  if (relres_out) *relres_out = phibar / beta1;
  return x;
}

SolutionRecord newton_solve(const Field& u0, const EnergyParams& ep, const BlochDecomposition& d,
                            double split_level, const SolverOptions& opts) {
  validate_solver_options(opts);
  if (!(u0.grid == d.grid) || !(u0.grid == ep.potential.grid))
    throw std::invalid_argument("grid mismatch");
  const double lambda = ep.lambda;
  const double p = ep.nonlocal.p;
  auto precond = [&](const Field& r) {
    return apply_spectral_function(r, d,
                                   [lambda](double m) { return 1.0 / std::abs(m - lambda); });
  };

  Field u = u0;
  Field F = phi_residual(u, ep);
  double rd = dual_residual_norm(F, d, lambda);
  SolveOutcome outcome = SolveOutcome::max_iters;
  int it = 0;
  while (true) {
    if (h1_norm(u) < opts.collapse_h1) {
      outcome = SolveOutcome::collapsed;
      break;
    }
    if (linf(u) > opts.max_amplitude) {
      outcome = SolveOutcome::blow_up;
      break;
    }
    if (rd <= opts.residual_tol) {
      outcome = SolveOutcome::converged;
      break;
    }
    if (it >= opts.max_newton_iters) {
      outcome = SolveOutcome::max_iters;
      break;
    }
    ++it;

    // Per-step frozen coefficients of the derivative of the residual map.
    Field w = signed_pow(u, p - 1.0);
    Field conv0 = riesz_apply(abs_pow(u, p), ep.riesz);
    Field am2 = abs_pow(u, p - 2.0);
    Field bco(u.grid);
    for (std::size_t i = 0; i < bco.v.size(); ++i)
      bco.v[i] = (p - 1.0) * conv0.v[i] * am2.v[i];
    auto Aop = [&](const Field& v) {
      Field uv(u.grid);
      for (std::size_t i = 0; i < uv.v.size(); ++i) uv.v[i] = w.v[i] * v.v[i];
      Field conv1 = riesz_apply(uv, ep.riesz);
      Field out = s_lambda_apply(v, ep);
      for (std::size_t i = 0; i < out.v.size(); ++i)
        out.v[i] -= p * conv1.v[i] * w.v[i] + bco.v[i] * v.v[i];
      return out;
    };

    Field rhs(u.grid);
    for (std::size_t i = 0; i < rhs.v.size(); ++i) rhs.v[i] = -F.v[i];
    Field delta = minres_solve(Aop, rhs, precond, opts.krylov_tol, opts.krylov_max_iters);

    // Backtracking on the dual norm; the smallest step is taken even without
    // decrease (stall phases escape via later iterations or the iteration cap).
    double t = 1.0;
    Field u_try(u.grid);
    Field F_try;
    double rd_try = 0.0;
    for (int bt = 0;; ++bt) {
      for (std::size_t i = 0; i < u_try.v.size(); ++i) u_try.v[i] = u.v[i] + t * delta.v[i];
      F_try = phi_residual(u_try, ep);
      rd_try = dual_residual_norm(F_try, d, lambda);
      if (rd_try < rd || bt >= opts.max_backtrack) break;
      t *= 0.5;
    }
    u = u_try;
    F = F_try;
    rd = rd_try;
  }

  if (outcome == SolveOutcome::converged) {
    u = normalize_translation(u);
    F = phi_residual(u, ep);
    rd = dual_residual_norm(F, d, lambda);
  }

  SolutionRecord rec;
  rec.lambda = lambda;
  rec.u = u;
  rec.residual_dual_norm = rd;
  rec.newton_iters = it;
  rec.outcome = outcome;
  rec.converged = outcome == SolveOutcome::converged;
  rec.h1_norm = h1_norm(u);
  Field up = project(u, d, split_level, Side::plus);
  Field um = project(u, d, split_level, Side::minus);
  rec.h1_norm_plus = h1_norm(up);
  rec.h1_norm_minus = h1_norm(um);
  rec.energy = energy_report(u, ep);
  rec.phi = rec.energy.phi;
  rec.j_value = rec.energy.j_value;
  return rec;
}

Field normalize_translation(const Field& u) {
  const TorusGrid& g = u.grid;
  std::size_t ncells = 1;
  for (int d = 0; d < g.N; ++d) ncells *= static_cast<std::size_t>(g.M);
  std::vector<double> mass(ncells, 0.0);
  for (std::size_t i = 0; i < u.v.size(); ++i) {
    auto ix = unravel(i, g);
    std::size_t ci = 0;
    for (int d = 0; d < g.N; ++d) ci = ci * static_cast<std::size_t>(g.M) +
                                       static_cast<std::size_t>(ix[d] / g.s);
    mass[ci] += u.v[i] * u.v[i];
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < ncells; ++c) {
    if (mass[c] > mass[best]) best = c;
  }
  std::array<int, 3> cc = {0, 0, 0};
  std::size_t t = best;
  for (int d = g.N - 1; d >= 0; --d) {
    cc[d] = static_cast<int>(t % static_cast<std::size_t>(g.M));
    t /= static_cast<std::size_t>(g.M);
  }
  std::array<int, 3> shift = {0, 0, 0};
  for (int d = 0; d < g.N; ++d) shift[d] = -cc[d];
  return lattice_shift(u, shift);
}

}  // namespace chq
