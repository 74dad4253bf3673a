#include "chq/ansatz.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace chq {

double cutoff_eval(const CutoffSpec& spec, double r) {
  if (!(spec.r1 >= 0.0) || !(spec.r2 > spec.r1))
    throw std::invalid_argument("cutoff radii must satisfy 0 <= r1 < r2");
  if (r <= spec.r1) return 1.0;
  if (r >= spec.r2) return 0.0;
  const double t = (r - spec.r1) / (spec.r2 - spec.r1);
  if (spec.profile == CutoffSpec::Profile::quintic) {
    const double s = 1.0 - t;
    return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
  }
  return std::exp(1.0 - 1.0 / (1.0 - t * t));
}

Field cutoff_field(const CutoffSpec& spec, const TorusGrid& g, double R) {
  if (!(R > 0.0)) throw std::invalid_argument("cutoff radius scale must be positive");
  if (spec.r2 * R > 0.5 * g.L() + 1e-12)
    throw std::invalid_argument("cutoff support exceeds half the torus");
  const int n1 = g.n1();
  std::vector<double> dsq(static_cast<std::size_t>(n1));
  for (int i = 0; i < n1; ++i) {
    const double dx = i * g.h() - 0.5 * g.L();
    dsq[static_cast<std::size_t>(i)] = dx * dx;
  }
  Field out(g);
  std::size_t idx = 0;
  if (g.N == 1) {
    for (int i1 = 0; i1 < n1; ++i1)
      out.v[idx++] = cutoff_eval(spec, std::sqrt(dsq[i1]) / R);
  } else if (g.N == 2) {
    for (int i1 = 0; i1 < n1; ++i1)
      for (int i2 = 0; i2 < n1; ++i2)
        out.v[idx++] = cutoff_eval(spec, std::sqrt(dsq[i1] + dsq[i2]) / R);
  } else {
    for (int i1 = 0; i1 < n1; ++i1)
      for (int i2 = 0; i2 < n1; ++i2) {
        const double d12 = dsq[i1] + dsq[i2];
        for (int i3 = 0; i3 < n1; ++i3)
          out.v[idx++] = cutoff_eval(spec, std::sqrt(d12 + dsq[i3]) / R);
      }
  }
  return out;
}

BlochEdgeWave bloch_edge_wave(const BlochDecomposition& d, const GapInfo& gap) {
  if (gap.band_b < 0) throw std::invalid_argument("gap info has no upper edge");
  const int ki = kappa_linear_index(d, gap.kappa_b);
  Eigen::VectorXcd w;
  if (d.store == BlochDecomposition::Store::full) {
    w = d.vecs[ki].col(gap.band_b);
  } else {
    auto pair = cell_eigensolve(d.potential, d.grid, gap.kappa_b);
    if (std::abs(pair.first(gap.band_b) - gap.b) > 1e-8 * (1.0 + std::abs(gap.b)))
      throw std::runtime_error("edge eigenvalue mismatch in recomputed cell solve");
    w = pair.second.col(gap.band_b);
  }
  auto parts = field_from_cell_vector(d, ki, w);
  const Field& re = parts.first;
  const Field& im = parts.second;

  // Global phase from the unconjugated square sum; a real-representable wave
  // satisfies w = e^{i theta} (real field).
  std::vector<double> tr(re.v.size()), ti(re.v.size());
  for (std::size_t i = 0; i < re.v.size(); ++i) {
    tr[i] = re.v[i] * re.v[i] - im.v[i] * im.v[i];
    ti[i] = 2.0 * re.v[i] * im.v[i];
  }
  const double theta = 0.5 * std::atan2(pairwise_sum(ti), pairwise_sum(tr));
  const double ct = std::cos(theta), st = std::sin(theta);
  Field wr(d.grid), wi(d.grid);
  for (std::size_t i = 0; i < re.v.size(); ++i) {
    wr.v[i] = ct * re.v[i] + st * im.v[i];
    wi.v[i] = ct * im.v[i] - st * re.v[i];
  }
  const double norm_all = std::sqrt(l2_norm(re) * l2_norm(re) + l2_norm(im) * l2_norm(im));
  if (l2_norm(wi) > 1e-8 * norm_all)
    throw std::invalid_argument("edge wave is not real-representable at this quasimomentum");

  double amax = 0.0;
  for (double v : wr.v) amax = std::max(amax, std::abs(v));
  if (amax == 0.0) throw std::runtime_error("edge wave vanished");
  BlochEdgeWave out;
  out.psi = wr;
  for (double& v : out.psi.v) v /= amax;
  out.eigenvalue = gap.b;
  out.kappa_m = gap.kappa_b;
  out.band = gap.band_b;
  out.realified = true;

  // Eigen-residual invariant on the normalized field.
  Field r = apply_xi2_multiplier(out.psi, xi2_table(d.grid));
  for (std::size_t i = 0; i < r.v.size(); ++i)
    r.v[i] += (d.potential.v[i] - gap.b) * out.psi.v[i];
  if (l2_norm(r) > 1e-8)
    throw std::runtime_error("edge wave eigen-residual exceeds tolerance");
  return out;
}

Field retile_wave(const Field& psi, const TorusGrid& target) {
  const TorusGrid& src = psi.grid;
  if (target.N != src.N || target.s != src.s || target.M < src.M || target.M % src.M != 0)
    throw std::invalid_argument("target grid incommensurate with the wave");
  const int ns = src.n1();
  Field out(target);
  for (std::size_t i = 0; i < out.v.size(); ++i) {
    auto ix = unravel(i, target);
    std::array<int, 3> sx = {0, 0, 0};
    for (int d = 0; d < target.N; ++d) sx[d] = ix[d] % ns;
    out.v[i] = psi.v[ravel(sx, src)];
  }
  return out;
}

Field psi_r_field(const Field& psi, const CutoffSpec& cutoff, double R) {
  if (!(R >= 1.0)) throw std::invalid_argument("R must be >= 1");
  Field out = cutoff_field(cutoff, psi.grid, R);
  const double scale = std::pow(R, -0.5 * psi.grid.N);
  for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] = scale * out.v[i] * psi.v[i];
  return out;
}

double mean_value(const Field& f) {
  const TorusGrid& g = f.grid;
  const int s = g.s;
  std::size_t cell = 1;
  for (int d = 0; d < g.N; ++d) cell *= static_cast<std::size_t>(s);
  std::vector<double> vc(cell);
  for (std::size_t ci = 0; ci < cell; ++ci) {
    std::array<int, 3> ix = {0, 0, 0};
    std::size_t t = ci;
    for (int d = g.N - 1; d >= 0; --d) {
      ix[d] = static_cast<int>(t % static_cast<std::size_t>(s));
      t /= static_cast<std::size_t>(s);
    }
    vc[ci] = f.v[ravel(ix, g)];
  }
  for (std::size_t i = 0; i < f.v.size(); ++i) {
    auto ix = unravel(i, g);
    std::size_t ci = 0;
    for (int d = 0; d < g.N; ++d) ci = ci * static_cast<std::size_t>(s) +
                                       static_cast<std::size_t>(ix[d] % s);
    if (std::abs(f.v[i] - vc[ci]) > 1e-10 * (1.0 + std::abs(vc[ci])))
      throw std::invalid_argument("field is not 1-periodic on the grid");
  }
  return pairwise_sum(vc) / static_cast<double>(cell);
}

std::vector<RiemannLebesgueRow> riemann_lebesgue_check(const Field& psi, const CutoffSpec& cutoff,
                                                       const NonlocalParams& np,
                                                       const RieszParams& rp,
                                                       const std::vector<double>& R_list) {
  const int N = psi.grid.N;
  const double mp = mean_value(abs_pow(psi, np.p));
  Field eta = cutoff_field(cutoff, psi.grid, 1.0);
  const double target = mp * mp * j_energy(eta, np, rp);
  std::vector<RiemannLebesgueRow> rows;
  rows.reserve(R_list.size());
  for (double R : R_list) {
    Field pr = psi_r_field(psi, cutoff, R);
    RiemannLebesgueRow row;
    row.R = R;
    row.scaled_j = std::pow(R, np.p * N - N - np.alpha) * j_energy(pr, np, rp);
    row.target = target;
    rows.push_back(row);
  }
  return rows;
}

double ansatz_radius(double lambda, const GapInfo& gap, const TorusGrid& g) {
  if (!(lambda > gap.a && lambda < gap.b)) throw std::invalid_argument("lambda outside the gap");
  const double R = 1.0 / std::sqrt(gap.b - lambda);
  return std::clamp(R, 1.0, 0.25 * g.L());
}

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("log-log fit needs at least two matched points");
  const std::size_t n = x.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw std::invalid_argument("nonpositive values in log fit");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("degenerate abscissae in log fit");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  if (n > 2) {
    const double b0 = my - fit.slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = ly[i] - (b0 + fit.slope * lx[i]);
      ssr += e * e;
    }
    fit.stderr_est = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
  }
  return fit;
}

EdgeScalingTable edge_scaling_study(const BlochDecomposition& d, const GapInfo& gap,
                                    const std::vector<double>& lambda_list,
                                    const CutoffSpec& cutoff, const NonlocalParams& np,
                                    const RieszParams& rp) {
  BlochEdgeWave wave = bloch_edge_wave(d, gap);
  const double level = d.store == BlochDecomposition::Store::below_level
                           ? d.split_level
                           : 0.5 * (gap.a + gap.b);
  const int N = d.grid.N;
  const double scale_exp = -0.5 * (np.p * N - N - np.alpha);
  EdgeScalingTable table;
  std::vector<double> xs, p0s, qs, jp0s;
  for (double lambda : lambda_list) {
    const double R = ansatz_radius(lambda, gap, d.grid);
    Field pr = psi_r_field(wave.psi, cutoff, R);
    Field p0 = project(pr, d, level, Side::minus);
    Field zeta(d.grid);
    for (std::size_t i = 0; i < zeta.v.size(); ++i) zeta.v[i] = pr.v[i] - p0.v[i];
    EdgeScalingRow row;
    row.dist_b = gap.b - lambda;
    row.p0_h1 = h1_norm(p0);
    row.q_zeta = quadratic_form(zeta, d.potential, lambda);
    row.j_p0 = j_energy(p0, np, rp);
    row.j_zeta_scaled = j_energy(zeta, np, rp) * std::pow(row.dist_b, scale_exp);
    table.rows.push_back(row);
    xs.push_back(row.dist_b);
    p0s.push_back(row.p0_h1);
    qs.push_back(row.q_zeta);
    jp0s.push_back(row.j_p0);
  }
  if (xs.size() >= 2) {
    table.p0_h1_slope = fit_loglog(xs, p0s);
    table.q_zeta_slope = fit_loglog(xs, qs);
    table.j_p0_slope = fit_loglog(xs, jp0s);
  }
  return table;
}

}  // namespace chq
