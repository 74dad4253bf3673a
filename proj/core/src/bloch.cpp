#include "chq/bloch.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <string>

namespace chq {

namespace {

// Cell-basis frequency of slot index c in one direction: j in [-s/2, s/2).
inline int cell_freq(int c, int s) { return c - s / 2; }

std::array<int, 3> cell_coords(int c, int s, int N) {
  std::array<int, 3> out = {0, 0, 0};
  for (int d = N - 1; d >= 0; --d) {
    out[d] = c % s;
    c /= s;
  }
  return out;
}

bool all_zero(const Field& V) {
  for (double v : V.v) {
    if (v != 0.0) return false;
  }
  return true;
}

// DFT of one unit cell of V, indexed by frequency differences in [0,s)^N.
// Also verifies exact 1-periodicity of V across the supercell.
std::vector<cplx> cell_potential_dft(const Field& V, const TorusGrid& g) {
  const int s = g.s;
  std::size_t cell = 1;
  for (int d = 0; d < g.N; ++d) cell *= static_cast<std::size_t>(s);
  std::vector<double> vc(cell);
  for (std::size_t ci = 0; ci < cell; ++ci) {
    auto ix = cell_coords(static_cast<int>(ci), s, g.N);
    vc[ci] = V.v[ravel(ix, g)];
  }
  for (std::size_t i = 0; i < V.v.size(); ++i) {
    auto ix = unravel(i, g);
    std::size_t ci = 0;
    for (int d = 0; d < g.N; ++d) ci = ci * s + static_cast<std::size_t>(ix[d] % s);
    if (std::abs(V.v[i] - vc[ci]) > 1e-12 * (1.0 + std::abs(vc[ci])))
      throw std::invalid_argument("potential is not 1-periodic on the grid");
  }
  std::vector<cplx> vhat(cell, cplx{0.0, 0.0});
  const double inv = 1.0 / static_cast<double>(cell);
  for (std::size_t q = 0; q < cell; ++q) {
    auto qi = cell_coords(static_cast<int>(q), s, g.N);
    cplx acc{0.0, 0.0};
    for (std::size_t x = 0; x < cell; ++x) {
      auto xi = cell_coords(static_cast<int>(x), s, g.N);
      double phase = 0.0;
      for (int d = 0; d < g.N; ++d)
        phase += static_cast<double>(qi[d] * xi[d]) / static_cast<double>(s);
      acc += vc[x] * std::exp(cplx{0.0, -2.0 * M_PI * phase});
    }
    vhat[q] = acc * inv;
  }
  return vhat;
}

// Kinetic diagonal, gather map and |xi|^2 per slot for quasimomentum m.
// k_global = m + M j lands in the canonical signed window by construction; the
// arithmetic mirrors xi2_table exactly.
void cell_geometry(const TorusGrid& g, const std::array<int, 3>& m, int cellsize,
                   std::vector<std::size_t>& gather, Eigen::VectorXd& xi2cell) {
  const int s = g.s, n1 = g.n1();
  const double fac = 2.0 * M_PI / g.L();
  gather.resize(static_cast<std::size_t>(cellsize));
  xi2cell.resize(cellsize);
  for (int c = 0; c < cellsize; ++c) {
    auto cj = cell_coords(c, s, g.N);
    double xi2 = 0.0;
    std::array<int, 3> gidx = {0, 0, 0};
    for (int d = 0; d < g.N; ++d) {
      const int kg = m[d] + g.M * cell_freq(cj[d], s);
      const double x = fac * kg;
      xi2 += x * x;
      gidx[d] = (kg % n1 + n1) % n1;
    }
    xi2cell(c) = xi2;
    gather[static_cast<std::size_t>(c)] = ravel(gidx, g);
  }
}

void assemble_cell_matrix(const std::vector<cplx>& vhat, const TorusGrid& g,
                          const Eigen::VectorXd& xi2cell, Eigen::MatrixXcd& H) {
  const int s = g.s;
  const int cellsize = static_cast<int>(xi2cell.size());
  H.setZero(cellsize, cellsize);
  for (int r = 0; r < cellsize; ++r) {
    auto rj = cell_coords(r, s, g.N);
    for (int c = 0; c < cellsize; ++c) {
      auto cj = cell_coords(c, s, g.N);
      std::size_t q = 0;
      for (int d = 0; d < g.N; ++d) {
        const int diff = ((rj[d] - cj[d]) % s + s) % s;
        q = q * s + static_cast<std::size_t>(diff);
      }
      H(r, c) = vhat[q];
    }
    H(r, r) += xi2cell(r);
  }
}

}  // namespace

std::array<int, 3> BlochDecomposition::kappa_of(int ki) const {
  std::array<int, 3> m = {0, 0, 0};
  int t = ki;
  for (int d = grid.N - 1; d >= 0; --d) {
    m[d] = t % grid.M;
    t /= grid.M;
  }
  return m;
}

int kappa_linear_index(const BlochDecomposition& d, const std::array<int, 3>& m) {
  int ki = 0;
  for (int dd = 0; dd < d.grid.N; ++dd) {
    int md = ((m[dd] % d.grid.M) + d.grid.M) % d.grid.M;
    ki = ki * d.grid.M + md;
  }
  return ki;
}

std::pair<Eigen::VectorXd, Eigen::MatrixXcd> cell_eigensolve(const Field& potential,
                                                             const TorusGrid& g,
                                                             const std::array<int, 3>& m) {
  int cellsize = 1;
  for (int d = 0; d < g.N; ++d) cellsize *= g.s;
  std::vector<std::size_t> gather;
  Eigen::VectorXd xi2cell;
  cell_geometry(g, m, cellsize, gather, xi2cell);
  const auto vhat = cell_potential_dft(potential, g);
  Eigen::MatrixXcd H;
  assemble_cell_matrix(vhat, g, xi2cell, H);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("cell eigensolve failed at the requested quasimomentum");
  return {es.eigenvalues(), es.eigenvectors()};
}

BlochDecomposition band_structure(const Field& potential, const TorusGrid& g, int nbands,
                                  BlochDecomposition::Store store, double split_level) {
  if (!(potential.grid == g)) throw std::invalid_argument("grid mismatch");
  BlochDecomposition d;
  d.grid = g;
  d.potential = potential;
  d.store = store;
  d.split_level = split_level;
  d.vzero = all_zero(potential);
  d.cellsize = 1;
  for (int dd = 0; dd < g.N; ++dd) d.cellsize *= g.s;
  d.kcount = 1;
  for (int dd = 0; dd < g.N; ++dd) d.kcount *= g.M;
  if (nbands <= 0 || nbands > d.cellsize) nbands = d.cellsize;
  d.nbands = nbands;

  d.mu.resize(d.kcount);
  d.gather.resize(d.kcount);
  d.xi2_cell.resize(d.kcount);
  if (store == BlochDecomposition::Store::full) d.vecs.resize(d.kcount);
  if (store == BlochDecomposition::Store::below_level) d.below.resize(d.kcount);

  std::vector<cplx> vhat;
  if (!d.vzero) vhat = cell_potential_dft(potential, g);

  Eigen::MatrixXcd H;
  for (int ki = 0; ki < d.kcount; ++ki) {
    const auto m = d.kappa_of(ki);
    cell_geometry(g, m, d.cellsize, d.gather[ki], d.xi2_cell[ki]);

    if (d.vzero) {
      // Free operator: eigenpairs are the plane waves themselves; order by
      // |xi|^2 with index tie-break.
      std::vector<int> ord(static_cast<std::size_t>(d.cellsize));
      std::iota(ord.begin(), ord.end(), 0);
      const auto& x2 = d.xi2_cell[ki];
      std::stable_sort(ord.begin(), ord.end(),
                       [&](int a, int b) { return x2(a) < x2(b); });
      Eigen::VectorXd mu(d.cellsize);
      for (int j = 0; j < d.cellsize; ++j) mu(j) = x2(ord[static_cast<std::size_t>(j)]);
      d.mu[ki] = mu;
      if (store == BlochDecomposition::Store::full) {
        d.vecs[ki] = Eigen::MatrixXcd::Zero(d.cellsize, d.cellsize);
        for (int j = 0; j < d.cellsize; ++j)
          d.vecs[ki](ord[static_cast<std::size_t>(j)], j) = 1.0;
      } else if (store == BlochDecomposition::Store::below_level) {
        int nb = 0;
        while (nb < d.cellsize && mu(nb) < split_level) ++nb;
        d.below[ki] = Eigen::MatrixXcd::Zero(d.cellsize, nb);
        for (int j = 0; j < nb; ++j) d.below[ki](ord[static_cast<std::size_t>(j)], j) = 1.0;
      }
      continue;
    }

    assemble_cell_matrix(vhat, g, d.xi2_cell[ki], H);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("cell eigensolve failed at kappa index " + std::to_string(ki));
    d.mu[ki] = es.eigenvalues();
    if (store == BlochDecomposition::Store::full) {
      d.vecs[ki] = es.eigenvectors();
    } else if (store == BlochDecomposition::Store::below_level) {
      int nb = 0;
      while (nb < d.cellsize && d.mu[ki](nb) < split_level) ++nb;
      d.below[ki] = es.eigenvectors().leftCols(nb);
    }
  }
  return d;
}

GapInfo find_gap(const BlochDecomposition& d, double level) {
  GapInfo gap;
  gap.a = -1e300;
  gap.b = 1e300;
  for (int ki = 0; ki < d.kcount; ++ki) {
    for (int j = 0; j < d.cellsize; ++j) {
      const double m = d.mu[ki](j);
      if (std::abs(m - level) < 1e-10)
        throw std::invalid_argument("level inside spectrum (sampled eigenvalue at the level)");
      if (m < level && m > gap.a) {
        gap.a = m;
        gap.band_a = j;
        gap.kappa_a = d.kappa_of(ki);
      }
      if (m > level && m < gap.b) {
        gap.b = m;
        gap.band_b = j;
        gap.kappa_b = d.kappa_of(ki);
      }
    }
  }
  if (gap.band_a < 0 || gap.band_b < 0)
    throw std::invalid_argument("level inside spectrum (spectrum lies on one side only)");
  return gap;
}

namespace {

// Shared per-class pipeline: gather the class coefficients, act, scatter back.
// The gather maps partition the index set, so every coefficient is written
// exactly once.
template <typename Act>
Field apply_classwise(const Field& u, const BlochDecomposition& d, Act&& act) {
  SpectralField F = transform(u);
  SpectralField out(u.grid);
  Eigen::VectorXcd t(d.cellsize);
  for (int ki = 0; ki < d.kcount; ++ki) {
    const auto& gi = d.gather[ki];
    for (int c = 0; c < d.cellsize; ++c) t(c) = F.c[gi[static_cast<std::size_t>(c)]];
    act(ki, t);
    for (int c = 0; c < d.cellsize; ++c) out.c[gi[static_cast<std::size_t>(c)]] = t(c);
  }
  return inverse_transform(out);
}

}  // namespace

Field apply_spectral_function(const Field& u, const BlochDecomposition& d,
                              const std::function<double(double)>& g) {
  if (!(u.grid == d.grid)) throw std::invalid_argument("grid mismatch");
  if (d.vzero) {
    // Free operator: the spectral function is a Fourier multiplier in |xi|^2.
    const auto& x2 = xi2_table(u.grid);
    SpectralField F = transform(u);
    for (std::size_t i = 0; i < F.c.size(); ++i) F.c[i] *= g(x2[i]);
    return inverse_transform(F);
  }
  if (d.store != BlochDecomposition::Store::full)
    throw std::invalid_argument("spectral function requires full eigenvector storage");
  return apply_classwise(u, d, [&](int ki, Eigen::VectorXcd& t) {
    Eigen::VectorXcd coef = d.vecs[ki].adjoint() * t;
    for (int j = 0; j < d.cellsize; ++j) coef(j) *= g(d.mu[ki](j));
    t.noalias() = d.vecs[ki] * coef;
  });
}

Field project(const Field& u, const BlochDecomposition& d, double level, Side side) {
  if (!(u.grid == d.grid)) throw std::invalid_argument("grid mismatch");
  if (d.vzero) {
    const auto& x2 = xi2_table(u.grid);
    for (double m : x2) {
      if (std::abs(m - level) < 1e-12)
        throw std::invalid_argument("projection level inside spectrum");
    }
    const bool minus = side == Side::minus;
    return apply_spectral_function(
        u, d, [&](double m) { return (m < level) == minus ? 1.0 : 0.0; });
  }
  for (int ki = 0; ki < d.kcount; ++ki) {
    for (int j = 0; j < d.cellsize; ++j) {
      if (std::abs(d.mu[ki](j) - level) < 1e-12)
        throw std::invalid_argument("projection level inside spectrum");
    }
  }
  if (d.store == BlochDecomposition::Store::full) {
    if (side == Side::minus)
      return apply_spectral_function(u, d, [&](double m) { return m < level ? 1.0 : 0.0; });
    return apply_spectral_function(u, d, [&](double m) { return m > level ? 1.0 : 0.0; });
  }
  if (d.store == BlochDecomposition::Store::below_level && level == d.split_level) {
    Field pm = apply_classwise(u, d, [&](int ki, Eigen::VectorXcd& t) {
      if (d.below[ki].cols() == 0) {
        t.setZero();
        return;
      }
      t = d.below[ki] * (d.below[ki].adjoint() * t).eval();
    });
    if (side == Side::minus) return pm;
    Field fp(u.grid);
    for (std::size_t i = 0; i < fp.v.size(); ++i) fp.v[i] = u.v[i] - pm.v[i];
    return fp;
  }
  throw std::invalid_argument("decomposition storage does not support this projection");
}

double quadratic_form(const Field& u, const Field& potential, double lambda) {
  if (!(u.grid == potential.grid)) throw std::invalid_argument("grid mismatch");
  std::vector<double> terms(u.v.size());
  for (std::size_t i = 0; i < terms.size(); ++i)
    terms[i] = (potential.v[i] - lambda) * u.v[i] * u.v[i];
  return gradient_sq_integral(u) + pairwise_sum(terms) * u.grid.cell_volume();
}

double e_lambda_norm(const Field& u, const BlochDecomposition& d, double level, double lambda) {
  Field up = project(u, d, level, Side::plus);
  Field um = project(u, d, level, Side::minus);
  const double q =
      quadratic_form(up, d.potential, lambda) - quadratic_form(um, d.potential, lambda);
  return std::sqrt(std::max(q, 0.0));
}

namespace {

// Extremal generalized eigenvalues of sign*(mu - shift) against the H1 Gram on
// the modes strictly on one side of the selection level.
std::pair<double, double> side_extremes(const BlochDecomposition& d, double level, double shift,
                                        bool minus_side, double sign) {
  if (d.store != BlochDecomposition::Store::full)
    throw std::invalid_argument("splitting constants require full eigenvector storage");
  double lo = 1e300, hi = -1e300;
  bool any = false;
  for (int ki = 0; ki < d.kcount; ++ki) {
    std::vector<int> sel;
    for (int j = 0; j < d.cellsize; ++j) {
      if (minus_side ? d.mu[ki](j) < level : d.mu[ki](j) > level) sel.push_back(j);
    }
    if (sel.empty()) continue;
    any = true;
    const int ns = static_cast<int>(sel.size());
    Eigen::MatrixXcd U(d.cellsize, ns);
    Eigen::VectorXd mus(ns);
    for (int c = 0; c < ns; ++c) {
      U.col(c) = d.vecs[ki].col(sel[static_cast<std::size_t>(c)]);
      mus(c) = d.mu[ki](sel[static_cast<std::size_t>(c)]);
    }
    Eigen::MatrixXcd DU = U;
    for (int r = 0; r < d.cellsize; ++r) DU.row(r) *= (1.0 + d.xi2_cell[ki](r));
    Eigen::MatrixXcd G = U.adjoint() * DU;  // H1 Gram in the selected basis
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(ns, ns);
    for (int c = 0; c < ns; ++c) A(c, c) = sign * (mus(c) - shift);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXcd> ges(A, G);
    if (ges.info() != Eigen::Success) throw std::runtime_error("generalized eigensolve failed");
    lo = std::min(lo, ges.eigenvalues()(0));
    hi = std::max(hi, ges.eigenvalues()(ns - 1));
  }
  if (!any) throw std::invalid_argument("empty spectral subspace on the requested side");
  return {lo, hi};
}

}  // namespace

SplittingConstants splitting_constants(const BlochDecomposition& d, const GapInfo& gap) {
  SplittingConstants sc;
  sc.a = gap.a;
  sc.b = gap.b;
  const double sel = 0.5 * (gap.a + gap.b);  // subspace selection level
  sc.alpha0 = side_extremes(d, sel, 0.0, true, -1.0).first;
  sc.beta0 = side_extremes(d, sel, 0.0, false, 1.0).first;
  if (!(sc.alpha0 > 0.0) || !(sc.beta0 > 0.0))
    throw std::runtime_error("degenerate splitting constants");
  return sc;
}

std::pair<double, double> eplus_equivalence_constants(const BlochDecomposition& d, double level) {
  return side_extremes(d, level, level, false, 1.0);
}

Field qj_projection(const Field& u, const BlochDecomposition& d, const GapInfo& gap, int j) {
  if (j < 0) throw std::invalid_argument("j must be >= 0 (0 = infinite-j sentinel)");
  if (j == 0) return u;  // the two spectral families at coincident level cancel
  const double cutoff = 1.0 / static_cast<double>(j);
  const double a = gap.a;
  return apply_spectral_function(
      u, d, [&](double m) { return (m - a < -cutoff || m - a > 0.0) ? 1.0 : 0.0; });
}

std::pair<Field, Field> field_from_cell_vector(const BlochDecomposition& d, int kappa_index,
                                               const Eigen::VectorXcd& w) {
  if (kappa_index < 0 || kappa_index >= d.kcount) throw std::invalid_argument("bad kappa index");
  if (w.size() != d.cellsize) throw std::invalid_argument("cell vector size mismatch");
  SpectralField F(d.grid);
  const auto& gi = d.gather[kappa_index];
  for (int c = 0; c < d.cellsize; ++c) F.c[gi[static_cast<std::size_t>(c)]] = w(c);
  // Split into real and imaginary parts; the coefficient set has no Hermitian
  // symmetry in general.
  const std::vector<cplx> orig = F.c;
  SpectralField Fc(d.grid);
  const int n1 = d.grid.n1();
  for (std::size_t i = 0; i < orig.size(); ++i) {
    auto ix = unravel(i, d.grid);
    std::array<int, 3> mi = {0, 0, 0};
    for (int dd = 0; dd < d.grid.N; ++dd) mi[dd] = (n1 - ix[dd]) % n1;
    const cplx fwd = orig[i];
    const cplx rev = std::conj(orig[ravel(mi, d.grid)]);
    Fc.c[i] = 0.5 * (fwd + rev);             // Hermitian part -> real component
    F.c[i] = cplx{0.0, -0.5} * (fwd - rev);  // anti-Hermitian part -> imag component
  }
  Field re = inverse_transform(Fc);
  Field im = inverse_transform(F);
  return {re, im};
}

std::pair<Field, Field> bloch_eigenfield(const BlochDecomposition& d, int kappa_index, int band) {
  if (d.store != BlochDecomposition::Store::full)
    throw std::invalid_argument("eigenfield extraction requires full storage");
  if (kappa_index < 0 || kappa_index >= d.kcount) throw std::invalid_argument("bad kappa index");
  if (band < 0 || band >= d.cellsize) throw std::invalid_argument("bad band index");
  return field_from_cell_vector(d, kappa_index, d.vecs[kappa_index].col(band));
}

}  // namespace chq
