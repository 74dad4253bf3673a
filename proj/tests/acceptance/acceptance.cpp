// Acceptance gate for the spectral laboratory.  Each invocation checks one
// numbered criterion end to end and prints detail lines followed by a single
//   criterion N: PASS — ...   |   criterion N: FAIL — ...
// verdict; the process exit status mirrors the verdict.  Tolerances are fixed
// here and must not be loosened to make a run pass: a measured miss is
// reported as a FAIL with the measured number.
//
// Usage: acceptance --criterion N [--tool PATH] [--scratch DIR]
// With no --criterion all ten run in order and the exit status counts fails.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "chq/ansatz.hpp"
#include "chq/bloch.hpp"
#include "chq/continuation.hpp"
#include "chq/energy.hpp"
#include "chq/grid.hpp"
#include "chq/potential.hpp"
#include "chq/riesz.hpp"
#include "chq/rng.hpp"
#include "chq/solver.hpp"

namespace fs = std::filesystem;
using namespace chq;

namespace {

// ---------------------------------------------------------------------------
// bookkeeping

struct Verdict {
  int criterion = 0;
  bool ok = true;
  std::string summary;

  explicit Verdict(int c) : criterion(c) {}

  void note(const std::string& what, bool pass, const std::string& detail) {
    std::printf("  [c%d] %-34s %s  %s\n", criterion, what.c_str(),
                pass ? "ok  " : "MISS", detail.c_str());
    if (!pass) ok = false;
  }
  void info(const std::string& what, const std::string& detail) {
    std::printf("  [c%d] %-34s info  %s\n", criterion, what.c_str(), detail.c_str());
  }
  int finish() {
    std::printf("criterion %d: %s — %s\n", criterion, ok ? "PASS" : "FAIL",
                summary.c_str());
    std::fflush(stdout);
    return ok ? 0 : 1;
  }
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return std::string(buf);
}

double rel_gap(double x, double y) {
  return std::abs(x - y) / std::max({1.0, std::abs(x), std::abs(y)});
}

// lhs >= rhs up to a relative slack.
bool ge_slack(double lhs, double rhs, double slack) {
  return lhs >= rhs - slack * std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

Field abs_field(const Field& u) {
  Field out = u;
  for (double& v : out.v) v = std::abs(v);
  return out;
}

Field mean_free(const Field& u) {
  Field out = u;
  double vol = 1.0;
  for (int d = 0; d < u.grid.N; ++d) vol *= u.grid.L();
  const double mean = integrate(u) / vol;
  for (double& v : out.v) v -= mean;
  return out;
}

Field scaled(const Field& u, double c) {
  Field out = u;
  for (double& v : out.v) v *= c;
  return out;
}

Field sum_of(const Field& u, const Field& w) {
  Field out = u;
  for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += w.v[i];
  return out;
}

Field diff_of(const Field& u, const Field& w) {
  Field out = u;
  for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] -= w.v[i];
  return out;
}

double rel_l2(const Field& a, const Field& b) {
  return l2_norm(diff_of(a, b)) / std::max(1e-300, l2_norm(b));
}

Field standard_potential(const TorusGrid& g) {
  return sample_potential(PotentialSpec::cosine(10.0, 30.0), g);
}

RieszParams default_riesz(const TorusGrid& g) {
  RieszParams rp;
  rp.alpha = 2.0;
  rp.zero_mode = default_zero_mode(2.0, g);
  return rp;
}

RieszParams matched_riesz(const TorusGrid& g) {
  RieszParams rp;
  rp.alpha = 2.0;
  rp.zero_mode = matched_zero_mode(2.0, g);
  return rp;
}

NonlocalParams standard_nonlocal() {
  NonlocalParams np;
  np.p = 2.0;
  np.alpha = 2.0;
  return np;
}

// Gaussian seed used by the solver CLI; replicated so the criterion runs are
// self-contained.
// Narrow unit Gaussian pushed onto its natural amplitude: the factor
// (Q(g)/J(g))^{1/(2p-2)} balances the quadratic part of the energy against
// the nonlocal part along the ray t*g, which places the seed inside the
// ground-state basin independently of the box size.
Field ray_scaled_gaussian(const TorusGrid& g, const EnergyParams& ep) {
  Field u(g);
  const double s2 = 2.0 * 1.5 * 1.5;
  for (std::size_t i = 0; i < u.v.size(); ++i) {
    const auto ix = unravel(i, g);
    double r2 = 0.0;
    for (int d = 0; d < g.N; ++d) {
      const double x = ix[static_cast<std::size_t>(d)] * g.h() - g.L() / 2.0;
      r2 += x * x;
    }
    u.v[i] = std::exp(-r2 / s2);
  }
  const double q = l2_inner(s_lambda_apply(u, ep), u);
  const double j = j_energy(u, ep.nonlocal, ep.riesz);
  return scaled(u, std::pow(q / j, 1.0 / (2.0 * ep.nonlocal.p - 2.0)));
}

// ---------------------------------------------------------------------------
// criterion 1: integral-identity property suite on the 4x4x4 supercell

int crit1() {
  Verdict v(1);
  const TorusGrid g = make_grid(3, 4, 8);
  const RieszParams rp = default_riesz(g);
  const NonlocalParams np = standard_nonlocal();
  const int cases = 200;
  Rng rng(101);

  double worst_semi = 0.0, worst_pair = 0.0, worst_hls = 0.0;
  int viol_cs = 0, viol_grad = 0, viol_convex = 0;
  const double t_hls = 2.0 * g.N / (g.N + np.alpha);  // 6/5 at these parameters

  for (int c = 0; c < cases; ++c) {
    const Field f = mean_free(random_smooth_field(g, rng, 6));
    const Field w = mean_free(random_smooth_field(g, rng, 6));

    // Semigroup factorization: the half-order operator applied twice must
    // reproduce the full operator on mean-free inputs.
    const Field once = riesz_apply(f, rp);
    const Field twice = riesz_half_apply(riesz_half_apply(f, rp), rp);
    worst_semi = std::max(worst_semi, rel_l2(twice, once));

    // Pairing identity: int (K*f) w == int (K^{1/2}*f)(K^{1/2}*w).
    const double lhs0 = l2_inner(riesz_apply(f, rp), w);
    const double rhs0 = l2_inner(riesz_half_apply(f, rp), riesz_half_apply(w, rp));
    worst_pair = std::max(worst_pair, rel_gap(lhs0, rhs0));

    // Bilinear Cauchy-Schwarz on nonnegative densities.
    if (!bilinear_cs_check(abs_field(f), abs_field(w), rp)) ++viol_cs;

    // Gradient-pairing bound: |<J'(u),v>/(2p)| <= J(u)^{1-1/2p} J(v)^{1/2p}.
    const double p = np.p;
    const double lhs3 = std::abs(l2_inner(j_gradient(f, np, rp), w)) / (2.0 * p);
    const double rhs3 = std::pow(j_energy(f, np, rp), 1.0 - 1.0 / (2.0 * p)) *
                        std::pow(j_energy(w, np, rp), 1.0 / (2.0 * p));
    if (lhs3 > rhs3 * (1.0 + 1e-10) + 1e-14) ++viol_grad;

    // Convexity lower bound J(u+w) >= 2^{1-2p} J(u) - J(w).
    if (!convexity_check(f, w, np, rp)) ++viol_convex;

    // Fractional-integration ratio at the conjugate pair stays bounded.
    const auto [lh, rh] = hls_check(abs_field(f), abs_field(w), t_hls, t_hls, rp);
    worst_hls = std::max(worst_hls, lh / rh);
  }

  v.note("semigroup factorization", worst_semi < 1e-10,
         fmt("max rel err %.3e (tol 1e-10, %d mean-free cases)", worst_semi, cases));
  v.note("half-order pairing identity", worst_pair < 1e-10,
         fmt("max rel err %.3e (tol 1e-10)", worst_pair));
  v.note("bilinear Cauchy-Schwarz", viol_cs == 0, fmt("%d violations in %d", viol_cs, cases));
  v.note("gradient pairing bound", viol_grad == 0,
         fmt("%d violations in %d", viol_grad, cases));
  v.note("convexity lower bound", viol_convex == 0,
         fmt("%d violations in %d", viol_convex, cases));
  v.note("fractional-integration ratio", worst_hls < 10.0,
         fmt("max lhs/rhs %.4f (bound 10)", worst_hls));
  v.summary = fmt("integral identities on %d random cases per check", cases);
  return v.finish();
}

// ---------------------------------------------------------------------------
// criterion 2: derivatives against central finite differences

int crit2() {
  Verdict v(2);
  const TorusGrid g = make_grid(3, 2, 6);
  const RieszParams rp = default_riesz(g);
  const NonlocalParams np = standard_nonlocal();
  EnergyParams ep;
  ep.potential = standard_potential(g);
  ep.lambda = 0.3;
  ep.riesz = rp;
  ep.nonlocal = np;
  Rng rng(202);
  const double eps = 1e-5;

  double worst_phi = 0.0, worst_j = 0.0;
  for (int c = 0; c < 50; ++c) {
    const Field u = scaled(random_smooth_field(g, rng, 5), 1.2);
    const Field dir = random_smooth_field(g, rng, 5);

    const double dphi = l2_inner(phi_residual(u, ep), dir);
    const double fd_phi =
        oracle::central_diff([&](const Field& x) { return phi(x, ep); }, u, dir, eps);
    worst_phi = std::max(worst_phi, std::abs(dphi - fd_phi) / std::max(1.0, std::abs(fd_phi)));

    const double dj = l2_inner(j_gradient(u, np, rp), dir);
    const double fd_j = oracle::central_diff(
        [&](const Field& x) { return j_energy(x, np, rp); }, u, dir, eps);
    worst_j = std::max(worst_j, std::abs(dj - fd_j) / std::max(1.0, std::abs(fd_j)));
  }

  double worst_jac = 0.0;
  for (int c = 0; c < 10; ++c) {
    const Field u = scaled(random_smooth_field(g, rng, 5), 1.2);
    const Field dir = random_smooth_field(g, rng, 5);
    const Field jv = jacobian_apply(u, dir, ep);
    const Field fd = oracle::central_diff_map(
        [&](const Field& x) { return phi_residual(x, ep); }, u, dir, eps);
    worst_jac = std::max(worst_jac, l2_norm(diff_of(jv, fd)) / std::max(1.0, l2_norm(fd)));
  }

  v.note("energy gradient vs FD", worst_phi < 1e-6,
         fmt("max rel err %.3e (tol 1e-6, 50 cases)", worst_phi));
  v.note("nonlocal gradient vs FD", worst_j < 1e-6,
         fmt("max rel err %.3e (tol 1e-6, 50 cases)", worst_j));
  v.note("Jacobian vs FD", worst_jac < 1e-5,
         fmt("max rel err %.3e (tol 1e-5, 10 cases)", worst_jac));
  v.summary = "first and second derivatives match central differences";
  return v.finish();
}

// ---------------------------------------------------------------------------
// criterion 3: spectral decomposition against independent references

int crit3() {
  Verdict v(3);

  {  // projector algebra and commutation on a stored decomposition
    const TorusGrid g = make_grid(3, 2, 8);
    const Field V = standard_potential(g);
    const BlochDecomposition d = band_structure(V, g, 0, BlochDecomposition::Store::full);
    const GapInfo gap = find_gap(d, 0.0);
    const double mid = 0.5 * (gap.a + gap.b);
    EnergyParams ep0;
    ep0.potential = V;
    ep0.lambda = 0.0;
    Rng rng(303);
    double w_compl = 0.0, w_idem = 0.0, w_orth = 0.0, w_comm = 0.0;
    for (int c = 0; c < 5; ++c) {
      const Field u = random_smooth_field(g, rng, 7);
      const Field um = project(u, d, mid, Side::minus);
      const Field up = project(u, d, mid, Side::plus);
      w_compl = std::max(w_compl, rel_l2(sum_of(um, up), u));
      w_idem = std::max(w_idem, rel_l2(project(up, d, mid, Side::plus), up));
      w_orth = std::max(w_orth,
                        std::abs(l2_inner(um, up)) / std::max(1e-300, l2_norm(um) * l2_norm(up)));
      const Field hu = s_lambda_apply(u, ep0);
      w_comm = std::max(w_comm, rel_l2(project(hu, d, mid, Side::plus),
                                       s_lambda_apply(up, ep0)));
    }
    v.note("projector complementarity", w_compl < 1e-10, fmt("max rel err %.3e", w_compl));
    v.note("projector idempotence", w_idem < 1e-10, fmt("max rel err %.3e", w_idem));
    v.note("projector orthogonality", w_orth < 1e-10, fmt("max inner %.3e", w_orth));
    v.note("projector commutes with operator", w_comm < 1e-8, fmt("max rel err %.3e", w_comm));
  }

  {  // gap edges of the separable potential vs the 1D fiber oracle
    const TorusGrid g = make_grid(3, 4, 8);
    const Field V = standard_potential(g);
    const BlochDecomposition d =
        band_structure(V, g, 0, BlochDecomposition::Store::values_only);
    const GapInfo gap = find_gap(d, 0.0);
    std::vector<Eigen::VectorXd> fiber;
    for (int m = 0; m < g.M; ++m) {
      const double kappa = 2.0 * std::numbers::pi * m / g.M;
      fiber.push_back(oracle::hill_1d_eigs(0.0, 30.0, kappa, g.s));
    }
    double a_ref = -1e300, b_ref = 1e300;
    for (int m1 = 0; m1 < g.M; ++m1)
      for (int m2 = 0; m2 < g.M; ++m2)
        for (int m3 = 0; m3 < g.M; ++m3)
          for (int i1 = 0; i1 < g.s; ++i1)
            for (int i2 = 0; i2 < g.s; ++i2)
              for (int i3 = 0; i3 < g.s; ++i3) {
                const double val = 10.0 + fiber[m1][i1] + fiber[m2][i2] + fiber[m3][i3];
                if (val < 0.0)
                  a_ref = std::max(a_ref, val);
                else
                  b_ref = std::min(b_ref, val);
              }
    v.note("lower gap edge vs fiber oracle", std::abs(gap.a - a_ref) < 1e-8,
           fmt("a = %.12f, oracle %.12f, |diff| %.3e", gap.a, a_ref,
               std::abs(gap.a - a_ref)));
    v.note("upper gap edge vs fiber oracle", std::abs(gap.b - b_ref) < 1e-8,
           fmt("b = %.12f, oracle %.12f, |diff| %.3e", gap.b, b_ref,
               std::abs(gap.b - b_ref)));
  }

  {  // analytic bands: constant potential (dense path) and zero potential
    const TorusGrid g = make_grid(3, 2, 4);
    auto reference = [&](int ki, const BlochDecomposition& d, double shift) {
      std::vector<double> ref;
      const auto m = d.kappa_of(ki);
      for (int j = 0; j < d.cellsize; ++j) {
        int rem = j;
        double q2 = 0.0;
        // cell-basis index, row-major with the first direction slowest
        for (int dd = g.N - 1; dd >= 0; --dd) {
          const int jd = rem % g.s;
          rem /= g.s;
          const double q = 2.0 * std::numbers::pi *
                           (static_cast<double>(m[static_cast<std::size_t>(dd)]) / g.M +
                            kfreq(jd, g.s));
          q2 += q * q;
        }
        ref.push_back(q2 + shift);
      }
      std::sort(ref.begin(), ref.end());
      return ref;
    };
    auto check_store = [&](const Field& V, double shift, const char* label) {
      const BlochDecomposition d =
          band_structure(V, g, 0, BlochDecomposition::Store::values_only);
      double worst = 0.0;
      for (int ki = 0; ki < d.kcount; ++ki) {
        const auto ref = reference(ki, d, shift);
        for (int j = 0; j < d.cellsize; ++j)
          worst = std::max(worst, rel_gap(d.mu[ki][j], ref[j]));
      }
      v.note(label, worst < 1e-10, fmt("max rel err %.3e over all fibers", worst));
    };
    Field zero(g);
    check_store(zero, 0.0, "free bands analytic");
    Field constv(g);
    for (double& x : constv.v) x = 10.0;
    check_store(constv, 10.0, "constant-potential bands analytic");
  }

  v.summary = "decomposition agrees with projector algebra and analytic spectra";
  return v.finish();
}

// ---------------------------------------------------------------------------
// criterion 4: definiteness of the splitting at gap-interior shifts

int crit4() {
  Verdict v(4);
  const TorusGrid g = make_grid(3, 4, 8);
  const Field V = standard_potential(g);
  const BlochDecomposition d = band_structure(V, g, 0, BlochDecomposition::Store::full);
  const GapInfo gap = find_gap(d, 0.0);
  const double mid = 0.5 * (gap.a + gap.b);
  const SplittingConstants sc = splitting_constants(d, gap);
  const double w = gap.b - gap.a;
  Rng rng(404);

  for (double frac : {0.25, 0.5, 0.75}) {
    const double lambda = gap.a + frac * w;
    double worst_minus = 1e300, worst_plus = 1e300;
    for (int c = 0; c < 50; ++c) {
      const Field u = random_smooth_field(g, rng, 7);
      const Field um = project(u, d, mid, Side::minus);
      const Field up = project(u, d, mid, Side::plus);
      const double hm = h1_norm(um), hp = h1_norm(up);
      if (hm > 1e-12) {
        const double slack =
            (-quadratic_form(um, V, lambda) - sc.alpha_lambda(lambda) * hm * hm) / (hm * hm);
        worst_minus = std::min(worst_minus, slack);
      }
      if (hp > 1e-12) {
        const double slack =
            (quadratic_form(up, V, lambda) - sc.beta_lambda(lambda) * hp * hp) / (hp * hp);
        worst_plus = std::min(worst_plus, slack);
      }
    }
    v.note(fmt("negativity below gap, frac %.2f", frac), worst_minus >= -1e-8,
           fmt("min slack %.3e (>= -1e-8), alpha_l %.4f", worst_minus,
               sc.alpha_lambda(lambda)));
    v.note(fmt("positivity above gap, frac %.2f", frac), worst_plus >= -1e-8,
           fmt("min slack %.3e (>= -1e-8), beta_l %.4f", worst_plus,
               sc.beta_lambda(lambda)));
  }
  v.summary = "quadratic form definite on both splitting components at three shifts";
  return v.finish();
}

// ---------------------------------------------------------------------------
// criterion 5: translation-invariant model on large boxes

int crit5() {
  Verdict v(5);
  const NonlocalParams np = standard_nonlocal();

  {  // ground-state run on the side-32 box
    const TorusGrid g = make_grid(3, 32, 4);
    Field V(g);
    const BlochDecomposition d =
        band_structure(V, g, 0, BlochDecomposition::Store::values_only);
    EnergyParams ep;
    ep.potential = V;
    ep.lambda = -1.0;
    ep.nonlocal = np;
    ep.riesz = matched_riesz(g);
    SolverOptions opts;
    const SolutionRecord rec =
        newton_solve(ray_scaled_gaussian(g, ep), ep, d, ep.lambda, opts);
    v.note("side-32 box solve converged", rec.outcome == SolveOutcome::converged,
           fmt("outcome %d, %d iterations", static_cast<int>(rec.outcome), rec.newton_iters));
    v.note("dual residual", rec.residual_dual_norm < 1e-8,
           fmt("%.3e (tol 1e-8)", rec.residual_dual_norm));
    const bool have_poho = rec.energy.pohozaev_defect.has_value();
    const double poho = have_poho ? *rec.energy.pohozaev_defect : 1e300;
    v.note("scaling-identity defect", have_poho && poho < 1e-3,
           fmt("%.3e (tol 1e-3)", poho));

    // Profile diagnostics, informational: references from an earlier run of
    // the same configuration at this resolution.
    double umax = 0.0, mass = 0.0, r2m = 0.0;
    for (std::size_t i = 0; i < rec.u.v.size(); ++i) {
      const double ui = rec.u.v[i];
      umax = std::max(umax, std::abs(ui));
      const auto ix = unravel(i, g);
      double r2 = 0.0;
      for (int dd = 0; dd < g.N; ++dd) {
        const double x = ix[static_cast<std::size_t>(dd)] * g.h() - g.L() / 2.0;
        r2 += x * x;
      }
      mass += ui * ui;
      r2m += r2 * ui * ui;
    }
    mass *= g.cell_volume();
    r2m = r2m * g.cell_volume() / mass;
    v.info("profile peak",
           fmt("max u %.6f (ref 1.018358), mass %.6f (ref 43.735230)", umax, mass));
    v.info("profile spread",
           fmt("<r^2> %.4f (ref 6.9008), kinetic %.6f (ref 14.778248), J %.6f (ref 58.513478)",
               r2m, gradient_sq_integral(rec.u), rec.j_value));
  }

  {  // same model on the side-16 box: resolution-limited defect, informational
    const TorusGrid g = make_grid(3, 16, 4);
    Field V(g);
    const BlochDecomposition d =
        band_structure(V, g, 0, BlochDecomposition::Store::values_only);
    EnergyParams ep;
    ep.potential = V;
    ep.lambda = -1.0;
    ep.nonlocal = np;
    ep.riesz = matched_riesz(g);
    SolverOptions opts;
    const SolutionRecord rec =
        newton_solve(ray_scaled_gaussian(g, ep), ep, d, ep.lambda, opts);
    const double poho = rec.energy.pohozaev_defect.value_or(1e300);
    v.info("side-16 box defect",
           fmt("outcome %d, scaling defect %.3e (finite-box bias, expected ~7e-3)",
               static_cast<int>(rec.outcome), poho));
  }

  {  // positive shift inside the essential spectrum: no nontrivial states
    const TorusGrid g = make_grid(3, 16, 4);
    Field V(g);
    const BlochDecomposition d =
        band_structure(V, g, 0, BlochDecomposition::Store::values_only);
    EnergyParams ep;
    ep.potential = V;
    ep.lambda = 0.5;
    ep.nonlocal = np;
    ep.riesz = matched_riesz(g);
    SolverOptions opts;
    opts.max_newton_iters = 200;
    opts.krylov_max_iters = 120;
    int reject = 0;
    std::string outcomes;
    for (int i = 0; i < 10; ++i) {
      Rng rng(900 + static_cast<std::uint64_t>(i));
      const Field u0 = scaled(random_smooth_field(g, rng, 4), 3.0);
      const SolutionRecord rec = newton_solve(u0, ep, d, ep.lambda, opts);
      const bool rejected = rec.outcome == SolveOutcome::collapsed ||
                            rec.outcome == SolveOutcome::blow_up;
      if (rejected) ++reject;
      outcomes += fmt("%d", static_cast<int>(rec.outcome));
    }
    v.note("positive shift rejects all seeds", reject == 10,
           fmt("%d/10 collapse-or-blow-up, outcomes [%s]", reject, outcomes.c_str()));
  }

  v.summary = "free-model ground state reproduced; no states inside the essential spectrum";
  return v.finish();
}

// ---------------------------------------------------------------------------
// criterion 6: gap solution with the energy chain

int crit6() {
  Verdict v(6);
  const TorusGrid g = make_grid(3, 4, 8);
  const Field V = standard_potential(g);
  const BlochDecomposition d = band_structure(V, g, 0, BlochDecomposition::Store::full);
  const GapInfo gap = find_gap(d, 0.0);
  const double mid = 0.5 * (gap.a + gap.b);
  const SplittingConstants sc = splitting_constants(d, gap);
  const NonlocalParams np = standard_nonlocal();
  const RieszParams rp = default_riesz(g);

  EnergyParams ep;
  ep.potential = V;
  ep.lambda = mid;
  ep.nonlocal = np;
  ep.riesz = rp;
  CutoffSpec cutoff;
  const Field seed = ansatz_initial(mid, d, gap, cutoff, np, rp);
  SolverOptions opts;
  const SolutionRecord rec = newton_solve(seed, ep, d, mid, opts);

  v.note("mid-gap solve converged", rec.outcome == SolveOutcome::converged,
         fmt("outcome %d, %d iterations, residual %.3e", static_cast<int>(rec.outcome),
             rec.newton_iters, rec.residual_dual_norm));
  v.note("positive energy", rec.phi > 0.0, fmt("phi = %.8f", rec.phi));
  v.note("critical identity defect", rec.energy.critical_identity_defect < 1e-6,
         fmt("%.3e (tol 1e-6)", rec.energy.critical_identity_defect));

  const Field up = project(rec.u, d, mid, Side::plus);
  const Field um = project(rec.u, d, mid, Side::minus);
  const double hp = h1_norm(up);
  const double qdiff = quadratic_form(up, V, mid) - quadratic_form(um, V, mid);
  const double lower = sc.beta_lambda(mid) * hp * hp;
  const double upper = (std::pow(2.0, 2.0 * np.p) * j_energy(up, np, rp) -
                        j_energy(rec.u, np, rp)) /
                       (2.0 * np.p);
  v.note("chain lower bound", ge_slack(qdiff, lower, 1e-8),
         fmt("beta ||u+||^2 = %.8f <= Q(u+)-Q(u-) = %.8f", lower, qdiff));
  v.note("chain upper bound", ge_slack(upper, qdiff, 1e-8),
         fmt("Q(u+)-Q(u-) = %.8f <= (2^{2p} J(u+) - J(u))/(2p) = %.8f", qdiff, upper));
  v.summary = "mid-gap critical point with the two-sided energy chain";
  return v.finish();
}

// ---------------------------------------------------------------------------
// criterion 7: branch continuation toward the upper edge

int crit7() {
  Verdict v(7);
  const TorusGrid g = make_grid(3, 4, 8);
  const Field V = standard_potential(g);
  const BlochDecomposition d = band_structure(V, g, 0, BlochDecomposition::Store::full);
  const GapInfo gap = find_gap(d, 0.0);
  const double w = gap.b - gap.a;
  EnergyParams ep;
  ep.potential = V;
  ep.nonlocal = standard_nonlocal();
  ep.riesz = default_riesz(g);
  ContinuationOptions opts;
  std::vector<double> schedule;
  for (double f : {0.4, 0.2, 0.1, 0.05}) schedule.push_back(gap.b - f * w);

  const ContinuationTable table = continue_branch(ep, d, gap, schedule, opts);
  int conv = 0;
  for (const auto& r : table.rows)
    if (r.converged) ++conv;
  v.note("all points converged", conv == 4, fmt("%d/4 converged", conv));
  for (const auto& r : table.rows)
    v.info("branch point", fmt("dist %.4f  phi %.6f  h1 %.6f  iters %d  conv %d", r.dist_b,
                               r.phi, r.h1_norm, r.iters, r.converged ? 1 : 0));
  if (conv == 4) {
    const SlopeFit fphi = fit_exponent(table, FitColumn::phi);
    const SlopeFit fh1 = fit_exponent(table, FitColumn::h1_norm);
    const double ratio = table.rows.front().phi / table.rows.back().phi;
    v.note("energy slope", fphi.slope >= 1.4,
           fmt("%.4f (gate >= 1.4, se %.3f)", fphi.slope, fphi.stderr_est));
    v.note("norm slope", fh1.slope >= 0.20,
           fmt("%.4f (gate >= 0.20, se %.3f)", fh1.slope, fh1.stderr_est));
    v.note("energy decrease", ratio >= 10.0, fmt("phi ratio %.2f (gate >= 10)", ratio));
  }
  v.summary = "branch follows the edge with vanishing energy and norm";
  return v.finish();
}

// ---------------------------------------------------------------------------
// criterion 8: edge asymptotics of the concentration ansatz

int crit8() {
  Verdict v(8);
  const NonlocalParams np = standard_nonlocal();
  CutoffSpec cutoff;

  {  // scaling exponents on the 8x8x8 supercell
    const TorusGrid g4 = make_grid(3, 4, 8);
    const Field V4 = standard_potential(g4);
    const GapInfo gap4 =
        find_gap(band_structure(V4, g4, 0, BlochDecomposition::Store::values_only), 0.0);
    const double mid = 0.5 * (gap4.a + gap4.b);

    const TorusGrid g = make_grid(3, 8, 8);
    const Field V = standard_potential(g);
    const BlochDecomposition d =
        band_structure(V, g, 0, BlochDecomposition::Store::below_level, mid);
    const GapInfo gap = find_gap(d, 0.0);
    const RieszParams rp = matched_riesz(g);

    std::vector<double> lambdas;
    for (double dist : {0.9, 0.6, 0.4, 0.26}) lambdas.push_back(gap.b - dist);
    const EdgeScalingTable table = edge_scaling_study(d, gap, lambdas, cutoff, np, rp);
    for (const auto& r : table.rows)
      v.info("edge row", fmt("dist %.2f  p0_h1 %.6e  q_zeta %.6e  j_scaled %.6e  j_p0 %.6e",
                             r.dist_b, r.p0_h1, r.q_zeta, r.j_zeta_scaled, r.j_p0));

    v.note("quadratic-form slope", table.q_zeta_slope.slope >= 0.85,
           fmt("%.4f (gate >= 0.85, se %.3f)", table.q_zeta_slope.slope,
               table.q_zeta_slope.stderr_est));
    // The projected-component norm decays much slower on this lattice than the
    // gate asks; the projected energy J(P0 Psi_R) does scale (slope ~2), so the
    // miss is in the norm route, not in the projection itself.  Reported as
    // measured.
    v.note("projected-component slope", table.p0_h1_slope.slope >= 0.85,
           fmt("%.4f (gate >= 0.85, se %.3f); supporting J(P0 Psi_R) slope %.4f",
               table.p0_h1_slope.slope, table.p0_h1_slope.stderr_est,
               table.j_p0_slope.slope));

    // Lower bound for the scaled nonlocal energy, both against the limiting
    // profile constant and through the constant-free convexity chain.
    const BlochEdgeWave wave = bloch_edge_wave(d, gap);
    const double mval = mean_value(abs_pow(wave.psi, np.p));
    const double j_eta = j_energy(cutoff_field(cutoff, g, 1.0), np, rp);
    const double floor0 =
        0.5 * std::pow(2.0, 1.0 - 2.0 * np.p) * mval * mval * j_eta;
    bool floor_ok = true, chain_ok = true;
    double min_scaled = 1e300;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      const auto& r = table.rows[i];
      min_scaled = std::min(min_scaled, r.j_zeta_scaled);
      if (r.j_zeta_scaled < floor0) floor_ok = false;
      const double theta = (g.N * np.p - g.N - np.alpha) / 2.0;
      const double j_zeta = r.j_zeta_scaled * std::pow(r.dist_b, theta);
      const double R = ansatz_radius(lambdas[i], gap, g);
      const Field psir = psi_r_field(wave.psi, cutoff, R);
      const double j_psir = j_energy(psir, np, rp);
      const double rhs = std::pow(2.0, 1.0 - 2.0 * np.p) * j_psir - r.j_p0;
      if (!ge_slack(j_zeta, rhs, 1e-10)) chain_ok = false;
    }
    v.note("scaled energy bounded below", floor_ok,
           fmt("min %.6e vs floor %.6e (half the limiting constant)", min_scaled, floor0));
    v.note("convexity chain per row", chain_ok,
           fmt("J(zeta) >= 2^{1-2p} J(Psi_R) - J(P0 Psi_R) on all %zu rows",
               table.rows.size()));
  }

  {  // concentration limit on the side-32 box via the retiled edge wave
    const TorusGrid g4 = make_grid(3, 4, 8);
    const Field V4 = standard_potential(g4);
    const BlochDecomposition d4 =
        band_structure(V4, g4, 0, BlochDecomposition::Store::values_only);
    const GapInfo gap4 = find_gap(d4, 0.0);
    const BlochEdgeWave wave = bloch_edge_wave(d4, gap4);
    const TorusGrid gbig = make_grid(3, 32, 8);
    const Field psi = retile_wave(wave.psi, gbig);
    const RieszParams rp = matched_riesz(gbig);
    const auto rows = riemann_lebesgue_check(psi, cutoff, np, rp, {2.0, 3.0, 4.0});
    for (const auto& r : rows)
      v.info("tail comparison",
             fmt("R %.1f  scaled J %.8f  target %.8f  ratio %.4f", r.R, r.scaled_j,
                 r.target, r.scaled_j / r.target));
    const auto& last = rows.back();
    const double dev = std::abs(last.scaled_j / last.target - 1.0);
    v.note("limit matched at largest radius", dev <= 0.05,
           fmt("|ratio - 1| = %.4f at R = %.1f (tol 0.05); cutoff support diameter 2*2R "
               "= %.0f of box 32",
               dev, last.R, 4.0 * last.R));
  }

  v.summary = "edge scaling laws measured; one slope gate missed as reported above";
  return v.finish();
}

// ---------------------------------------------------------------------------
// criterion 9: auxiliary operator identities

int crit9() {
  Verdict v(9);
  const TorusGrid g = make_grid(3, 4, 8);
  const Field V = standard_potential(g);
  const BlochDecomposition d = band_structure(V, g, 0, BlochDecomposition::Store::full);
  const GapInfo gap = find_gap(d, 0.0);
  const double mid = 0.5 * (gap.a + gap.b);
  const NonlocalParams np = standard_nonlocal();
  const RieszParams rp = default_riesz(g);
  Rng rng(909);

  {  // truncated spectral projections: idempotent and nested
    double w_idem = 0.0, w_nest = 0.0;
    bool mono = true;
    for (int c = 0; c < 5; ++c) {
      const Field u = random_smooth_field(g, rng, 7);
      for (int j : {0, 1, 2, 5}) {
        const Field q1 = qj_projection(u, d, gap, j);
        const Field q2 = qj_projection(q1, d, gap, j);
        w_idem = std::max(w_idem, rel_l2(q2, q1));
      }
      const Field q2 = qj_projection(u, d, gap, 2);
      const Field q5 = qj_projection(u, d, gap, 5);
      w_nest = std::max(w_nest, rel_l2(qj_projection(q2, d, gap, 5), q2));
      if (l2_norm(q2) > l2_norm(q5) + 1e-12) mono = false;
    }
    v.note("truncated projections idempotent", w_idem < 1e-10,
           fmt("max rel err %.3e", w_idem));
    v.note("truncated projections nested", w_nest < 1e-10 && mono,
           fmt("max rel err %.3e, norms monotone %s", w_nest, mono ? "yes" : "no"));
  }

  {  // triangle inequality of the interaction seminorm
    int viol = 0;
    double worst = 0.0;
    for (int c = 0; c < 200; ++c) {
      const Field u = random_smooth_field(g, rng, 6);
      const Field w = random_smooth_field(g, rng, 6);
      const double lhs = coulomb_norm(sum_of(u, w), np, rp);
      const double rhs = coulomb_norm(u, np, rp) + coulomb_norm(w, np, rp);
      if (!ge_slack(rhs, lhs, 1e-10)) ++viol;
      worst = std::max(worst, lhs - rhs);
    }
    v.note("interaction-norm triangle", viol == 0,
           fmt("%d violations in 200, worst excess %.3e", viol, worst));
  }

  {  // norm equivalence constants on the upper component
    const auto [cmin, cmax] = eplus_equivalence_constants(d, mid);
    v.info("equivalence constants", fmt("min %.8f max %.8f", cmin, cmax));
    double lo = 1e300, hi = -1e300;
    int outside = 0;
    for (int c = 0; c < 50; ++c) {
      const Field u = random_smooth_field(g, rng, 7);
      const Field up = project(u, d, mid, Side::plus);
      const double h = h1_norm(up);
      if (h < 1e-12) continue;
      const double q = quadratic_form(up, V, mid) / (h * h);
      lo = std::min(lo, q);
      hi = std::max(hi, q);
      const double tol = 1e-10 * std::max(1.0, std::max(std::abs(cmin), std::abs(cmax)));
      if (q < cmin - tol || q > cmax + tol) ++outside;
    }
    v.note("upper-component equivalence", outside == 0,
           fmt("ratios in [%.6f, %.6f] within [min, max], %d outside", lo, hi, outside));
  }

  v.summary = "projection lattice, seminorm triangle, and norm equivalence verified";
  return v.finish();
}

// ---------------------------------------------------------------------------
// criterion 10: bitwise determinism of the command-line artifacts

int run_tool(const std::string& tool, const std::string& cfg, const std::string& out,
             const std::string& args, const std::string& log) {
  const std::string cmd = tool + " --config " + cfg + " --out " + out + " --seed 7 " + args +
                          " >> " + log + " 2>&1";
  const int rc = std::system(cmd.c_str());
  return rc == -1 ? -1 : WEXITSTATUS(rc);
}

int crit10(const std::string& tool, const fs::path& scratch) {
  Verdict v(10);
  if (tool.empty()) {
    v.note("tool path provided", false, "pass --tool PATH to run the determinism check");
    v.summary = "cannot run without the command-line tool";
    return v.finish();
  }
  fs::create_directories(scratch);
  const std::string cfg_small = (scratch / "small.ini").string();
  const std::string cfg_cont = (scratch / "cont.ini").string();
  {
    std::ofstream f(cfg_small, std::ios::binary);
    f << "[model]\nN = 3\nalpha = 2.0\np = 2.0\npotential = \"cosine\"\n"
         "c0 = 10.0\nV0 = 30.0\n\n[grid]\nM = 2\ns = 8\n";
  }
  {
    std::ofstream f(cfg_cont, std::ios::binary);
    f << "[model]\nN = 3\nalpha = 2.0\np = 2.0\npotential = \"cosine\"\n"
         "c0 = 10.0\nV0 = 30.0\n\n[grid]\nM = 4\ns = 6\n";
  }

  struct Step {
    const char* cfg;
    std::string args;
    std::vector<std::string> artifacts;
  };
  const std::vector<Step> steps = {
      {"small", "gap", {"gap.json"}},
      {"small", "bands", {"bands.csv"}},
      {"small", "verify", {"verify.txt"}},
      {"small", "solve --lambda mid", {"solution.chqf", "solution.json"}},
      {"cont", "continue --schedule 0.4,0.2", {"continuation.csv"}},
  };

  std::vector<std::vector<int>> codes(2);
  for (int run = 0; run < 2; ++run) {
    const fs::path out = scratch / fmt("run%d", run + 1);
    fs::remove_all(out);
    for (const auto& st : steps) {
      const std::string cfg = std::string(st.cfg) == "small" ? cfg_small : cfg_cont;
      const fs::path dir = out / st.cfg;
      codes[static_cast<std::size_t>(run)].push_back(
          run_tool(tool, cfg, dir.string(), st.args,
                   (scratch / fmt("run%d.log", run + 1)).string()));
    }
  }
  v.note("exit codes repeat", codes[0] == codes[1],
         fmt("run1 vs run2 command exit codes %s",
             codes[0] == codes[1] ? "identical" : "DIFFER"));

  auto slurp = [](const fs::path& p) -> std::string {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
  };
  int files = 0, mismatches = 0;
  for (const auto& st : steps) {
    for (const auto& name : st.artifacts) {
      const fs::path p1 = scratch / "run1" / st.cfg / name;
      const fs::path p2 = scratch / "run2" / st.cfg / name;
      const bool exist = fs::exists(p1) && fs::exists(p2);
      const std::string b1 = exist ? slurp(p1) : "<missing1>";
      const std::string b2 = exist ? slurp(p2) : "<missing2>";
      ++files;
      const bool same = exist && b1 == b2;
      if (!same) ++mismatches;
      v.note(fmt("artifact %s/%s", st.cfg, name.c_str()), same,
             exist ? fmt("%zu bytes, %s", b1.size(), same ? "identical" : "DIFFER")
                   : "missing output file");
    }
  }
  v.summary = fmt("%d artifacts compared byte-for-byte across two runs, %d mismatches",
                  files, mismatches);
  return v.finish();
}

}  // namespace

int main(int argc, char** argv) {
  int criterion = 0;
  std::string tool;
  std::string scratch = "acceptance-scratch";
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    auto next = [&]() -> std::string { return i + 1 < argc ? argv[++i] : ""; };
    if (a == "--criterion")
      criterion = std::atoi(next().c_str());
    else if (a == "--tool")
      tool = next();
    else if (a == "--scratch")
      scratch = next();
    else {
      std::fprintf(stderr, "unknown argument: %s\n", a.c_str());
      return 64;
    }
  }

  auto run_one = [&](int c) -> int {
    switch (c) {
      case 1: return crit1();
      case 2: return crit2();
      case 3: return crit3();
      case 4: return crit4();
      case 5: return crit5();
      case 6: return crit6();
      case 7: return crit7();
      case 8: return crit8();
      case 9: return crit9();
      case 10: return crit10(tool, fs::path(scratch));
      default:
        std::fprintf(stderr, "criterion out of range: %d\n", c);
        return 64;
    }
  };

  if (criterion != 0) return run_one(criterion);
  int fails = 0;
  for (int c = 1; c <= 10; ++c) fails += run_one(c) == 0 ? 0 : 1;
  return fails;
}
