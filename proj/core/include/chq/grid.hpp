#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace chq {

using cplx = std::complex<double>;

// Uniform periodic grid: supercell side L = M (potential period 1), n1 = M*s
// points per direction, h = 1/s spacing.
struct TorusGrid {
  int N = 3;
  int M = 1;
  int s = 8;

  int n1() const { return M * s; }
  double L() const { return static_cast<double>(M); }
  double h() const { return 1.0 / static_cast<double>(s); }
  std::size_t n() const {
    std::size_t r = 1;
    for (int d = 0; d < N; ++d) r *= static_cast<std::size_t>(n1());
    return r;
  }
  double cell_volume() const {
    double r = 1.0;
    for (int d = 0; d < N; ++d) r *= h();
    return r;
  }
  bool operator==(const TorusGrid&) const = default;
};

TorusGrid make_grid(int N, int M, int s);

struct Field {
  TorusGrid grid;
  std::vector<double> v;

  Field() = default;
  explicit Field(const TorusGrid& g) : grid(g), v(g.n(), 0.0) {}
};

// Coefficients in FFT storage order per direction (k = 0..n1/2-1, -n1/2..-1);
// convention f(x) = sum_k c_k exp(i 2 pi k . x / L).
struct SpectralField {
  TorusGrid grid;
  std::vector<cplx> c;

  SpectralField() = default;
  explicit SpectralField(const TorusGrid& g) : grid(g), c(g.n(), cplx{0.0, 0.0}) {}
};

// Signed wave number for storage index i in a length-n1 transform.
inline int kfreq(int i, int n1) { return i < n1 / 2 ? i : i - n1; }

// Deterministic pairwise reduction; fixed association order regardless of
// thread count, required for bitwise-reproducible outputs.
double pairwise_sum(std::span<const double> x);

SpectralField transform(const Field& f);
Field inverse_transform(const SpectralField& F);

double integrate(const Field& u);
double l2_inner(const Field& u, const Field& v);
double l2_norm(const Field& u);
double gradient_sq_integral(const Field& u);
double h1_norm(const Field& u);

// Applies the real even Fourier multiplier m(|xi|^2), xi_k = 2 pi k / L, to a
// real field. m receives xi2 = |xi_k|^2 including the true Nyquist value.
Field apply_xi2_multiplier(const Field& u, const std::vector<double>& m_table);

// Multiplier table builder: m_of_xi2(xi2) evaluated over the full k cube.
std::vector<double> multiplier_table(const TorusGrid& g, double (*m_of_xi2)(double, double), double param);

// Table of |xi_k|^2 in storage order (shared by Laplacian, dual norms, Bloch
// cross-checks).
const std::vector<double>& xi2_table(const TorusGrid& g);

// Cyclic shift by an integer lattice vector (units of whole cells): exact
// permutation tau_k u(x) = u(x - k).
Field lattice_shift(const Field& u, const std::array<int, 3>& k_cells);

// Grid coordinate of linear index (row-major, x1 slowest).
std::array<int, 3> unravel(std::size_t idx, const TorusGrid& g);
std::size_t ravel(const std::array<int, 3>& ix, const TorusGrid& g);

}  // namespace chq
