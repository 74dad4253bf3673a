// chqlab: command-line driver for the spectral Choquard laboratory.
//
// Subcommands: bands, gap, verify, solve, continue, ansatz, approach-a.
// Every artifact embeds the config hash, the tool version, and the seed, and
// is bitwise reproducible for identical config + seed.

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "chq/ansatz.hpp"
#include "chq/bloch.hpp"
#include "chq/config.hpp"
#include "chq/continuation.hpp"
#include "chq/energy.hpp"
#include "chq/grid.hpp"
#include "chq/io.hpp"
#include "chq/potential.hpp"
#include "chq/riesz.hpp"
#include "chq/rng.hpp"
#include "chq/solver.hpp"

using json = nlohmann::json;

namespace {

constexpr const char* kToolVersion = "1.0.0";

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct Session {
  chq::RunConfig cfg;
  std::string out_dir;
  std::uint64_t seed = 1;
};

json meta_json(const Session& s, const std::string& command) {
  json m;
  m["tool"] = "chqlab";
  m["version"] = kToolVersion;
  m["command"] = command;
  m["config_hash"] = s.cfg.hash;
  m["seed"] = s.seed;
  m["grid"] = {{"N", s.cfg.N}, {"M", s.cfg.M}, {"s", s.cfg.s}};
  m["model"] = {{"alpha", s.cfg.alpha},
                {"p", s.cfg.p},
                {"potential", s.cfg.potential.kind == chq::PotentialKind::zero
                                  ? "zero"
                                  : "cosine"},
                {"c0", s.cfg.potential.c0},
                {"V0", s.cfg.potential.V0},
                {"zero_mode", s.cfg.zero_mode}};
  return m;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

json gap_json(const chq::GapInfo& gap, int N) {
  json j;
  j["a"] = gap.a;
  j["b"] = gap.b;
  j["edge_band_a"] = gap.band_a;
  j["edge_band_b"] = gap.band_b;
  j["kappa_a"] = std::vector<int>(gap.kappa_a.begin(), gap.kappa_a.begin() + N);
  j["kappa_b"] = std::vector<int>(gap.kappa_b.begin(), gap.kappa_b.begin() + N);
  return j;
}

chq::EnergyParams base_params(const Session& s) {
  chq::EnergyParams ep;
  ep.potential = chq::config_potential(s.cfg);
  ep.lambda = 0.0;
  ep.nonlocal = chq::config_nonlocal(s.cfg);
  ep.riesz = chq::config_riesz(s.cfg);
  return ep;
}

std::vector<double> parse_fraction_list(const std::string& text) {
  std::string norm = text;
  for (char& c : norm)
    if (c == ',') c = ' ';
  std::istringstream in(norm);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    const char* c = tok.c_str();
    char* end = nullptr;
    const double f = std::strtod(c, &end);
    if (end == c || *end != '\0')
      throw std::invalid_argument("schedule: expected numbers, got '" + tok + "'");
    out.push_back(f);
  }
  if (out.empty()) throw std::invalid_argument("schedule: empty list");
  for (double f : out)
    if (!(f > 0.0) || !(f < 1.0))
      throw std::invalid_argument("schedule: gap fractions must lie strictly inside (0, 1)");
  for (std::size_t i = 1; i < out.size(); ++i)
    if (!(out[i] < out[i - 1]))
      throw std::invalid_argument("schedule: gap fractions must decrease strictly");
  return out;
}

void warn_if_clamped(double lambda, const chq::GapInfo& gap, const chq::TorusGrid& g) {
  const double raw = 1.0 / std::sqrt(gap.b - lambda);
  const double lo = 1.0, hi = g.L() / 4.0;
  if (raw < lo || raw > hi) {
    std::fprintf(stderr,
                 "note: ansatz radius 1/sqrt(b - lambda) = %.6g clamped to [%g, %g] "
                 "at lambda = %.6g\n",
                 raw, lo, hi, lambda);
  }
}

// ---------------------------------------------------------------------------
// bands

int cmd_bands(const Session& s) {
  const chq::TorusGrid g = chq::config_grid(s.cfg);
  const chq::Field V = chq::config_potential(s.cfg);
  const auto d = chq::band_structure(V, g, 0, chq::BlochDecomposition::Store::values_only);

  std::ostringstream csv;
  csv << "# " << meta_json(s, "bands").dump() << "\n";
  for (int dd = 0; dd < g.N; ++dd) csv << "kappa_index_" << (dd + 1) << ",";
  csv << "band_index,eigenvalue\n";
  for (int ki = 0; ki < d.kcount; ++ki) {
    const auto m = d.kappa_of(ki);
    for (int b = 0; b < d.nbands; ++b) {
      for (int dd = 0; dd < g.N; ++dd) csv << m[static_cast<std::size_t>(dd)] << ",";
      csv << b << "," << fmt17(d.mu[static_cast<std::size_t>(ki)](b)) << "\n";
    }
  }
  const std::string path = s.out_dir + "/bands.csv";
  write_text(path, csv.str());
  std::cout << "wrote " << path << " (" << d.kcount << " quasimomenta x " << d.nbands
            << " bands)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// gap

int cmd_gap(const Session& s) {
  const chq::TorusGrid g = chq::config_grid(s.cfg);
  const chq::Field V = chq::config_potential(s.cfg);
  const auto d = chq::band_structure(V, g, 0, chq::BlochDecomposition::Store::values_only);
  const chq::GapInfo gap = chq::find_gap(d, 0.0);

  json j = gap_json(gap, g.N);
  j["meta"] = meta_json(s, "gap");
  const std::string path = s.out_dir + "/gap.json";
  write_text(path, j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// verify

struct CheckRow {
  std::string name;
  int cases = 0;
  double worst = 0.0;
  double threshold = 0.0;
  bool pass = false;
  std::string note;
};

chq::Field mean_free(const chq::Field& u) {
  chq::Field out = u;
  const double m = chq::integrate(u) / std::pow(u.grid.L(), u.grid.N);
  for (double& x : out.v) x -= m;
  return out;
}

double sup_abs(const chq::Field& u) {
  double m = 0.0;
  for (double x : u.v) m = std::max(m, std::abs(x));
  return m;
}

int cmd_verify(const Session& s) {
  const chq::TorusGrid g = chq::config_grid(s.cfg);
  const chq::Field V = chq::config_potential(s.cfg);
  const chq::RieszParams rp = chq::config_riesz(s.cfg);
  const chq::NonlocalParams np = chq::config_nonlocal(s.cfg);
  chq::Rng rng(s.seed);
  std::vector<CheckRow> rows;

  const int kmax = std::max(2, g.n1() / 8);

  {  // Transform round trip.
    CheckRow r{"fft_roundtrip", 20, 0.0, 1e-12, false, ""};
    for (int c = 0; c < r.cases; ++c) {
      chq::Field u = chq::random_smooth_field(g, rng, kmax);
      chq::Field v = chq::inverse_transform(chq::transform(u));
      for (std::size_t i = 0; i < u.v.size(); ++i)
        r.worst = std::max(r.worst, std::abs(u.v[i] - v.v[i]));
    }
    r.pass = r.worst < r.threshold;
    rows.push_back(r);
  }

  {  // Semigroup factorization of the nonlocal kernel on mean-zero fields.
    CheckRow r{"semigroup_identity", 200, 0.0, 1e-10, false, ""};
    for (int c = 0; c < r.cases; ++c) {
      chq::Field f = mean_free(chq::random_smooth_field(g, rng, kmax));
      chq::Field full = chq::riesz_apply(f, rp);
      chq::Field twice = chq::riesz_half_apply(chq::riesz_half_apply(f, rp), rp);
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < f.v.size(); ++i) {
        num = std::max(num, std::abs(full.v[i] - twice.v[i]));
        den = std::max(den, std::abs(full.v[i]));
      }
      r.worst = std::max(r.worst, num / (den + 1e-300));
    }
    r.pass = r.worst < r.threshold;
    rows.push_back(r);
  }

  {  // <J'(u), u> = 2p J(u).
    CheckRow r{"gradient_pairing", 200, 0.0, 1e-10, false, ""};
    for (int c = 0; c < r.cases; ++c) {
      chq::Field u = chq::random_smooth_field(g, rng, kmax);
      const double j = chq::j_energy(u, np, rp);
      const double pair = chq::l2_inner(chq::j_gradient(u, np, rp), u);
      r.worst = std::max(r.worst, std::abs(pair - 2.0 * np.p * j) /
                                      (std::abs(pair) + 2.0 * np.p * std::abs(j) + 1e-300));
    }
    r.pass = r.worst < r.threshold;
    rows.push_back(r);
  }

  {  // Semigroup route vs direct pairing route for J.
    CheckRow r{"j_route_agreement", 200, 0.0, 1e-10, false, ""};
    for (int c = 0; c < r.cases; ++c) {
      chq::Field u = chq::random_smooth_field(g, rng, kmax);
      const double j1 = chq::j_energy(u, np, rp);
      const double j2 = chq::j_energy_direct(u, np, rp);
      r.worst = std::max(r.worst, std::abs(j1 - j2) / (std::abs(j1) + std::abs(j2) + 1e-300));
    }
    r.pass = r.worst < r.threshold;
    rows.push_back(r);
  }

  {  // Cauchy-Schwarz for the bilinear kernel form on densities.
    CheckRow r{"bilinear_cauchy_schwarz", 200, 0.0, 0.5, false, "violations"};
    for (int c = 0; c < r.cases; ++c) {
      chq::Field f = chq::random_smooth_field(g, rng, kmax);
      chq::Field h = chq::random_smooth_field(g, rng, kmax);
      for (double& x : f.v) x = std::abs(x);
      for (double& x : h.v) x = std::abs(x);
      if (!chq::bilinear_cs_check(f, h, rp)) r.worst += 1.0;
    }
    r.pass = r.worst == 0.0;
    rows.push_back(r);
  }

  {  // Convexity lower bound for J(u + w).
    CheckRow r{"convexity_bound", 200, 0.0, 0.5, false, "violations"};
    for (int c = 0; c < r.cases; ++c) {
      chq::Field u = chq::random_smooth_field(g, rng, kmax);
      chq::Field w = chq::random_smooth_field(g, rng, kmax);
      if (!chq::convexity_check(u, w, np, rp)) r.worst += 1.0;
    }
    r.pass = r.worst == 0.0;
    rows.push_back(r);
  }

  {  // Hardy-Littlewood-Sobolev ratio stays bounded at conjugate exponents.
    CheckRow r{"hls_ratio_bounded", 200, 0.0, 10.0, false, "max ratio"};
    const double t = 2.0 * static_cast<double>(g.N) / (g.N + rp.alpha);
    for (int c = 0; c < r.cases; ++c) {
      chq::Field f = chq::random_smooth_field(g, rng, kmax);
      chq::Field h = chq::random_smooth_field(g, rng, kmax);
      auto [lhs, rhs] = chq::hls_check(f, h, t, t, rp);
      if (rhs > 0.0) r.worst = std::max(r.worst, std::abs(lhs) / rhs);
    }
    r.pass = r.worst < r.threshold;
    rows.push_back(r);
  }

  chq::EnergyParams ep = base_params(s);
  ep.lambda = 0.25;

  {  // Directional derivative of Phi vs central differences.
    CheckRow r{"phi_gradient_fd", 10, 0.0, 1e-6, false, ""};
    for (int c = 0; c < r.cases; ++c) {
      chq::Field u = chq::random_smooth_field(g, rng, kmax);
      chq::Field dir = chq::random_smooth_field(g, rng, kmax);
      const double h = 1e-5;
      chq::Field up = u, um = u;
      for (std::size_t i = 0; i < u.v.size(); ++i) {
        up.v[i] += h * dir.v[i];
        um.v[i] -= h * dir.v[i];
      }
      const double fd = (chq::phi(up, ep) - chq::phi(um, ep)) / (2.0 * h);
      const double an = chq::l2_inner(chq::phi_residual(u, ep), dir);
      r.worst = std::max(r.worst, std::abs(an - fd) / (std::abs(fd) + 1e-12));
    }
    r.pass = r.worst < r.threshold;
    rows.push_back(r);
  }

  {  // Jacobian action vs central differences of the residual map.
    CheckRow r{"jacobian_fd", 5, 0.0, 1e-5, false, ""};
    for (int c = 0; c < r.cases; ++c) {
      chq::Field u = chq::random_smooth_field(g, rng, kmax);
      chq::Field dir = chq::random_smooth_field(g, rng, kmax);
      for (double& x : u.v) x += 0.3;  // keep |u|^{p-2} smooth at p = 2
      const double h = 1e-5;
      chq::Field up = u, um = u;
      for (std::size_t i = 0; i < u.v.size(); ++i) {
        up.v[i] += h * dir.v[i];
        um.v[i] -= h * dir.v[i];
      }
      chq::Field fp = chq::phi_residual(up, ep), fm = chq::phi_residual(um, ep);
      chq::Field an = chq::jacobian_apply(u, dir, ep);
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < u.v.size(); ++i) {
        const double fd = (fp.v[i] - fm.v[i]) / (2.0 * h);
        num = std::max(num, std::abs(an.v[i] - fd));
        den = std::max(den, std::abs(fd));
      }
      r.worst = std::max(r.worst, num / (1.0 + den));
    }
    r.pass = r.worst < r.threshold;
    rows.push_back(r);
  }

  // Spectral block: needs eigenvectors; skipped when no gap brackets level 0.
  bool have_gap = false;
  chq::GapInfo gap;
  try {
    const auto dv = chq::band_structure(V, g, 0, chq::BlochDecomposition::Store::values_only);
    gap = chq::find_gap(dv, 0.0);
    have_gap = true;
  } catch (const std::exception& e) {
    CheckRow r{"spectral_block", 0, 0.0, 0.0, true, std::string("skipped: ") + e.what()};
    rows.push_back(r);
  }
  if (have_gap) {
    const auto d = chq::band_structure(V, g, 0, chq::BlochDecomposition::Store::full);
    const double level = 0.5 * (gap.a + gap.b);
    const auto& x2 = chq::xi2_table(g);
    {
      CheckRow r{"projector_algebra", 5, 0.0, 1e-10, false, ""};
      for (int c = 0; c < r.cases; ++c) {
        chq::Field u = chq::random_smooth_field(g, rng, kmax);
        chq::Field up = chq::project(u, d, level, chq::Side::plus);
        chq::Field um = chq::project(u, d, level, chq::Side::minus);
        double sup_c = 0.0;
        for (std::size_t i = 0; i < u.v.size(); ++i)
          sup_c = std::max(sup_c, std::abs(up.v[i] + um.v[i] - u.v[i]));
        chq::Field upp = chq::project(up, d, level, chq::Side::plus);
        double sup_i = 0.0;
        for (std::size_t i = 0; i < u.v.size(); ++i)
          sup_i = std::max(sup_i, std::abs(upp.v[i] - up.v[i]));
        const double ortho = std::abs(chq::l2_inner(up, um)) /
                             (chq::l2_norm(up) * chq::l2_norm(um) + 1e-300);
        r.worst = std::max({r.worst, sup_c / (1.0 + sup_abs(u)), sup_i, ortho});
      }
      r.pass = r.worst < r.threshold;
      rows.push_back(r);
    }
    {
      CheckRow r{"projector_commutes_with_operator", 5, 0.0, 1e-8, false, ""};
      for (int c = 0; c < r.cases; ++c) {
        chq::Field u = chq::random_smooth_field(g, rng, kmax);
        chq::Field hu = chq::apply_xi2_multiplier(u, x2);
        for (std::size_t i = 0; i < u.v.size(); ++i) hu.v[i] += V.v[i] * u.v[i];
        chq::Field phu = chq::project(hu, d, level, chq::Side::plus);
        chq::Field pu = chq::project(u, d, level, chq::Side::plus);
        chq::Field hpu = chq::apply_xi2_multiplier(pu, x2);
        for (std::size_t i = 0; i < u.v.size(); ++i) hpu.v[i] += V.v[i] * pu.v[i];
        double num = 0.0;
        for (std::size_t i = 0; i < u.v.size(); ++i)
          num = std::max(num, std::abs(phu.v[i] - hpu.v[i]));
        r.worst = std::max(r.worst, num / (1.0 + sup_abs(hu)));
      }
      r.pass = r.worst < r.threshold;
      rows.push_back(r);
    }
    {
      CheckRow r{"splitting_constants_positive", 1, 0.0, 0.0, false, ""};
      const auto sc = chq::splitting_constants(d, gap);
      r.worst = std::min(sc.alpha0, sc.beta0);
      r.pass = sc.alpha0 > 0.0 && sc.beta0 > 0.0;
      r.note = "min(alpha0, beta0)";
      rows.push_back(r);
    }
  }

  std::ostringstream rep;
  rep << "# " << meta_json(s, "verify").dump() << "\n";
  char line[160];
  std::snprintf(line, sizeof line, "%-34s %6s %14s %12s %s\n", "check", "cases", "worst",
                "threshold", "status");
  rep << line;
  bool all_pass = true;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-34s %6d %14.3e %12.1e %s%s%s\n", r.name.c_str(), r.cases,
                  r.worst, r.threshold, r.pass ? "PASS" : "FAIL",
                  r.note.empty() ? "" : "  # ", r.note.c_str());
    rep << line;
    all_pass = all_pass && r.pass;
  }
  rep << (all_pass ? "all checks passed\n" : "CHECK FAILURES PRESENT\n");
  std::cout << rep.str();
  write_text(s.out_dir + "/verify.txt", rep.str());
  return all_pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// solve

chq::Field bump_seed(const chq::TorusGrid& g) {
  chq::Field u(g);
  const double L = g.L();
  const double sigma = L / 8.0;
  for (std::size_t i = 0; i < u.v.size(); ++i) {
    const auto ix = chq::unravel(i, g);
    double r2 = 0.0;
    for (int d = 0; d < g.N; ++d) {
      const double x = ix[static_cast<std::size_t>(d)] * g.h() - L / 2.0;
      r2 += x * x;
    }
    u.v[i] = 1.5 * std::exp(-r2 / (2.0 * sigma * sigma));
  }
  return u;
}

int cmd_solve(const Session& s, const std::string& lambda_text) {
  const chq::TorusGrid g = chq::config_grid(s.cfg);
  chq::EnergyParams ep = base_params(s);
  const auto d =
      chq::band_structure(ep.potential, g, 0, chq::BlochDecomposition::Store::full);

  bool have_gap = false;
  chq::GapInfo gap;
  try {
    gap = chq::find_gap(d, 0.0);
    have_gap = true;
  } catch (const std::exception&) {
  }

  double lambda = 0.0;
  if (lambda_text == "mid") {
    if (!have_gap) {
      std::cerr << "error: --lambda mid requires a spectral gap at level 0\n";
      return 1;
    }
    lambda = 0.5 * (gap.a + gap.b);
  } else {
    const char* c = lambda_text.c_str();
    char* end = nullptr;
    lambda = std::strtod(c, &end);
    if (end == c || *end != '\0') {
      std::cerr << "error: --lambda expects a number or 'mid'\n";
      return 1;
    }
  }
  ep.lambda = lambda;

  chq::Field u0;
  double split_level = lambda;
  if (have_gap && lambda > gap.a && lambda < gap.b) {
    split_level = 0.5 * (gap.a + gap.b);
    warn_if_clamped(lambda, gap, g);
    try {
      u0 = chq::ansatz_initial(lambda, d, gap, s.cfg.cutoff, ep.nonlocal, ep.riesz);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "note: edge ansatz unavailable (%s); using the bump seed\n", e.what());
      u0 = bump_seed(g);
    }
  } else {
    u0 = bump_seed(g);
  }

  const chq::SolutionRecord rec = chq::newton_solve(u0, ep, d, split_level, s.cfg.solver);

  const std::string snap = s.out_dir + "/solution.chqf";
  chq::write_snapshot(snap, rec.u);

  json j;
  j["lambda"] = rec.lambda;
  j["phi"] = rec.phi;
  j["j_value"] = rec.j_value;
  j["q_value"] = rec.energy.q_value;
  j["h1_norm"] = rec.h1_norm;
  j["h1_norm_plus"] = rec.h1_norm_plus;
  j["h1_norm_minus"] = rec.h1_norm_minus;
  j["residual_dual_norm"] = rec.residual_dual_norm;
  j["residual_l2"] = rec.energy.residual_l2;
  j["critical_identity_defect"] = rec.energy.critical_identity_defect;
  if (rec.energy.pohozaev_defect)
    j["pohozaev_defect"] = *rec.energy.pohozaev_defect;
  else
    j["pohozaev_defect"] = nullptr;
  j["newton_iters"] = rec.newton_iters;
  j["converged"] = rec.converged;
  j["outcome"] = static_cast<int>(rec.outcome);
  j["split_level"] = split_level;
  if (have_gap) j["gap"] = gap_json(gap, g.N);
  j["snapshot"] = "solution.chqf";
  j["meta"] = meta_json(s, "solve");
  write_text(s.out_dir + "/solution.json", j.dump(2) + "\n");

  std::cout << "outcome " << static_cast<int>(rec.outcome)
            << (rec.converged ? " (converged)" : " (not converged)") << ", phi " << fmt17(rec.phi)
            << ", residual " << fmt17(rec.residual_dual_norm) << ", iters " << rec.newton_iters
            << "\n";
  return static_cast<int>(rec.outcome);
}

// ---------------------------------------------------------------------------
// continue / approach-a shared table writer

std::string table_csv(const Session& s, const std::string& command,
                      const chq::ContinuationTable& table, const json& extra) {
  std::ostringstream csv;
  csv << "# " << meta_json(s, command).dump() << "\n";
  csv << "# " << extra.dump() << "\n";
  csv << "lambda,dist_b,phi,j_value,h1_norm,h1_norm_plus,h1_norm_minus,residual,iters,"
         "converged\n";
  for (const auto& r : table.rows) {
    csv << fmt17(r.lambda) << "," << fmt17(r.dist_b) << "," << fmt17(r.phi) << ","
        << fmt17(r.j_value) << "," << fmt17(r.h1_norm) << "," << fmt17(r.h1_norm_plus) << ","
        << fmt17(r.h1_norm_minus) << "," << fmt17(r.residual) << "," << r.iters << ","
        << (r.converged ? 1 : 0) << "\n";
  }
  return csv.str();
}

int table_exit_code(const chq::ContinuationTable& table) {
  for (const auto& rec : table.records)
    if (!rec.converged) return static_cast<int>(rec.outcome);
  return 0;
}

int cmd_continue(const Session& s, const std::string& schedule_text) {
  const chq::TorusGrid g = chq::config_grid(s.cfg);
  chq::EnergyParams ep = base_params(s);
  const auto d =
      chq::band_structure(ep.potential, g, 0, chq::BlochDecomposition::Store::full);
  const chq::GapInfo gap = chq::find_gap(d, 0.0);

  const std::vector<double> fractions =
      schedule_text.empty() ? s.cfg.schedule_fractions : parse_fraction_list(schedule_text);
  const double width = gap.b - gap.a;
  std::vector<double> schedule;
  for (double f : fractions) schedule.push_back(gap.b - f * width);
  for (double l : schedule) warn_if_clamped(l, gap, g);

  chq::ContinuationOptions opts;
  opts.solver = s.cfg.solver;
  opts.cutoff = s.cfg.cutoff;
  const chq::ContinuationTable table = chq::continue_branch(ep, d, gap, schedule, opts);

  json extra;
  extra["gap"] = gap_json(gap, g.N);
  const auto te = chq::theoretical_exponents(g.N, ep.nonlocal.alpha, ep.nonlocal.p);
  extra["theory"] = {{"energy_exp", te.energy_exp},
                     {"norm_exp", te.norm_exp},
                     {"norm_exp_valid", te.norm_exp_valid}};
  try {
    const auto fp = chq::fit_exponent(table, chq::FitColumn::phi);
    const auto fh = chq::fit_exponent(table, chq::FitColumn::h1_norm);
    extra["fit"] = {{"phi_slope", fp.slope},
                    {"phi_stderr", fp.stderr_est},
                    {"h1_slope", fh.slope},
                    {"h1_stderr", fh.stderr_est}};
  } catch (const std::exception& e) {
    extra["fit_error"] = e.what();
  }
  try {
    const auto sc = chq::splitting_constants(d, gap);
    const auto audit =
        chq::bifurcation_point_audit(table, gap, sc, ep.nonlocal.p, te.norm_exp_valid);
    extra["audit"] = {{"enough_data", audit.enough_data},
                      {"edge_decay_pass", audit.edge_decay_pass},
                      {"plus_lower_bound_pass", audit.plus_lower_bound_pass},
                      {"fitted_c", audit.fitted_c},
                      {"message", audit.message}};
  } catch (const std::exception& e) {
    extra["audit_error"] = e.what();
  }

  const std::string path = s.out_dir + "/continuation.csv";
  write_text(path, table_csv(s, "continue", table, extra));
  std::cout << "wrote " << path << " (" << table.rows.size() << " points)\n";
  if (extra.contains("fit"))
    std::cout << "phi slope " << fmt17(extra["fit"]["phi_slope"].get<double>()) << ", h1 slope "
              << fmt17(extra["fit"]["h1_slope"].get<double>()) << "\n";
  return table_exit_code(table);
}

int cmd_approach_a(const Session& s, const std::string& schedule_text) {
  const chq::TorusGrid g = chq::config_grid(s.cfg);
  chq::EnergyParams ep = base_params(s);
  const auto d =
      chq::band_structure(ep.potential, g, 0, chq::BlochDecomposition::Store::full);
  const chq::GapInfo gap = chq::find_gap(d, 0.0);

  const std::vector<double> fractions =
      schedule_text.empty() ? s.cfg.schedule_fractions : parse_fraction_list(schedule_text);
  const double width = gap.b - gap.a;
  std::vector<double> schedule;
  for (double f : fractions) schedule.push_back(gap.a + f * width);
  for (double l : schedule) warn_if_clamped(l, gap, g);

  chq::ContinuationOptions opts;
  opts.solver = s.cfg.solver;
  opts.cutoff = s.cfg.cutoff;
  const chq::Field seed =
      chq::ansatz_initial(schedule.front(), d, gap, s.cfg.cutoff, ep.nonlocal, ep.riesz);
  const chq::ContinuationTable table = chq::approach_a_study(ep, d, gap, schedule, opts, seed);

  json extra;
  extra["gap"] = gap_json(gap, g.N);
  extra["note"] = "observational sweep toward the lower gap edge";

  const std::string path = s.out_dir + "/approach_a.csv";
  write_text(path, table_csv(s, "approach-a", table, extra));
  std::cout << "wrote " << path << " (" << table.rows.size() << " points)\n";
  return table_exit_code(table);
}

// ---------------------------------------------------------------------------
// ansatz

int cmd_ansatz(const Session& s, const std::string& schedule_text) {
  const chq::TorusGrid g = chq::config_grid(s.cfg);
  const chq::Field V = chq::config_potential(s.cfg);
  const chq::RieszParams rp = chq::config_riesz(s.cfg);
  const chq::NonlocalParams np = chq::config_nonlocal(s.cfg);
  const auto d = chq::band_structure(V, g, 0, chq::BlochDecomposition::Store::full);
  const chq::GapInfo gap = chq::find_gap(d, 0.0);

  const std::vector<double> fractions =
      schedule_text.empty() ? s.cfg.schedule_fractions : parse_fraction_list(schedule_text);
  const double width = gap.b - gap.a;
  std::vector<double> lambdas;
  for (double f : fractions) lambdas.push_back(gap.b - f * width);
  for (double l : lambdas) warn_if_clamped(l, gap, g);

  const chq::EdgeScalingTable table =
      chq::edge_scaling_study(d, gap, lambdas, s.cfg.cutoff, np, rp);

  json extra;
  extra["gap"] = gap_json(gap, g.N);
  extra["fit"] = {{"p0_h1_slope", table.p0_h1_slope.slope},
                  {"p0_h1_stderr", table.p0_h1_slope.stderr_est},
                  {"q_zeta_slope", table.q_zeta_slope.slope},
                  {"q_zeta_stderr", table.q_zeta_slope.stderr_est},
                  {"j_p0_slope", table.j_p0_slope.slope},
                  {"j_p0_stderr", table.j_p0_slope.stderr_est}};

  std::ostringstream csv;
  csv << "# " << meta_json(s, "ansatz").dump() << "\n";
  csv << "# " << extra.dump() << "\n";
  csv << "dist_b,p0_h1,q_zeta,j_zeta_scaled,j_p0\n";
  for (const auto& r : table.rows) {
    csv << fmt17(r.dist_b) << "," << fmt17(r.p0_h1) << "," << fmt17(r.q_zeta) << ","
        << fmt17(r.j_zeta_scaled) << "," << fmt17(r.j_p0) << "\n";
  }
  const std::string path = s.out_dir + "/ansatz.csv";
  write_text(path, csv.str());
  std::cout << "wrote " << path << " (" << table.rows.size() << " points)\n";
  std::cout << "p0_h1 slope " << fmt17(table.p0_h1_slope.slope) << ", q_zeta slope "
            << fmt17(table.q_zeta_slope.slope) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chqlab: spectral laboratory for a periodic nonlocal field equation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string lambda_text = "mid";
  std::string schedule_text;
  int threads = 1;
  std::uint64_t seed_flag = 0;
  bool seed_given = false;

  app.add_option("--config", config_path, "path to the run configuration")->required();
  app.add_option("--out", out_dir, "output directory (default: from config)");
  app.add_option("--threads", threads, "worker thread budget (outputs are independent of it)");
  auto* seed_opt = app.add_option("--seed", seed_flag, "override the config seed");

  CLI::App* c_bands = app.add_subcommand("bands", "write the band-structure table");
  CLI::App* c_gap = app.add_subcommand("gap", "locate the spectral gap at level 0");
  CLI::App* c_verify = app.add_subcommand("verify", "run the property suite");
  CLI::App* c_solve = app.add_subcommand("solve", "Newton solve at a fixed lambda");
  c_solve->add_option("--lambda", lambda_text, "gap point: a number or 'mid'");
  CLI::App* c_cont = app.add_subcommand("continue", "continuation toward the upper gap edge");
  c_cont->add_option("--schedule", schedule_text,
                     "gap fractions b - f (b - a), strictly decreasing");
  CLI::App* c_ansatz = app.add_subcommand("ansatz", "edge-wave scaling study");
  c_ansatz->add_option("--schedule", schedule_text,
                       "gap fractions b - f (b - a), strictly decreasing");
  CLI::App* c_appa = app.add_subcommand("approach-a", "observational sweep toward the lower edge");
  c_appa->add_option("--schedule", schedule_text,
                     "gap fractions a + f (b - a), strictly decreasing");

  CLI11_PARSE(app, argc, argv);

  Eigen::setNbThreads(threads);
  seed_given = seed_opt->count() > 0;

  Session s;
  try {
    s.cfg = chq::parse_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  s.seed = seed_given ? seed_flag : s.cfg.seed;
  s.out_dir = out_dir.empty() ? s.cfg.out_dir : out_dir;
  try {
    std::filesystem::create_directories(s.out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: cannot create output directory: " << e.what() << "\n";
    return 1;
  }

  try {
    if (c_bands->parsed()) return cmd_bands(s);
    if (c_gap->parsed()) return cmd_gap(s);
    if (c_verify->parsed()) return cmd_verify(s);
    if (c_solve->parsed()) return cmd_solve(s, lambda_text);
    if (c_cont->parsed()) return cmd_continue(s, schedule_text);
    if (c_ansatz->parsed()) return cmd_ansatz(s, schedule_text);
    if (c_appa->parsed()) return cmd_approach_a(s, schedule_text);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
