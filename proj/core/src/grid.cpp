#include "chq/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>

namespace chq {

TorusGrid make_grid(int N, int M, int s) {
  if (N < 1 || N > 3) throw std::invalid_argument("N must be 1, 2 or 3");
  if (M < 1) throw std::invalid_argument("M must be >= 1");
  if (s < 4) throw std::invalid_argument("s must be >= 4");
  if (s % 2 != 0) throw std::invalid_argument("s must be even");
  TorusGrid g;
  g.N = N;
  g.M = M;
  g.s = s;
  return g;
}

double pairwise_sum(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n <= 8) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(x.subspan(0, half)) + pairwise_sum(x.subspan(half));
}

namespace {

// One FFTW plan pair per grid shape; ESTIMATE planning keeps plan choice
// deterministic run to run.
class FftEngine {
 public:
  static FftEngine& get(const TorusGrid& g) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, FftEngine*> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(g.N, g.n1());
    auto it = cache.find(key);
    if (it != cache.end()) return *it->second;
    auto* eng = new FftEngine(g);
    cache.emplace(key, eng);
    return *eng;
  }

  void forward(const double* in, cplx* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      buf_[i][0] = in[i];
      buf_[i][1] = 0.0;
    }
    fftw_execute(fwd_);
    const double inv_n = 1.0 / static_cast<double>(n);
    auto* b = reinterpret_cast<cplx*>(buf_);
    for (std::size_t i = 0; i < n; ++i) out[i] = b[i] * inv_n;
  }

  void backward(const cplx* in, double* out, std::size_t n) {
    auto* b = reinterpret_cast<cplx*>(buf_);
    for (std::size_t i = 0; i < n; ++i) b[i] = in[i];
    fftw_execute(bwd_);
    for (std::size_t i = 0; i < n; ++i) out[i] = b[i].real();
  }

 private:
  explicit FftEngine(const TorusGrid& g) {
    const std::size_t n = g.n();
    buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    if (buf_ == nullptr) throw std::runtime_error("fftw_malloc failed");
    const int n1 = g.n1();
    switch (g.N) {
      case 1:
        fwd_ = fftw_plan_dft_1d(n1, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_1d(n1, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
        break;
      case 2:
        fwd_ = fftw_plan_dft_2d(n1, n1, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_2d(n1, n1, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
        break;
      default:
        fwd_ = fftw_plan_dft_3d(n1, n1, n1, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_3d(n1, n1, n1, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
        break;
    }
    if (fwd_ == nullptr || bwd_ == nullptr) throw std::runtime_error("fftw planning failed");
  }

  fftw_complex* buf_ = nullptr;
  fftw_plan fwd_ = nullptr;
  fftw_plan bwd_ = nullptr;
};

void check_same_grid(const TorusGrid& a, const TorusGrid& b) {
  if (!(a == b)) throw std::invalid_argument("grid mismatch");
}

}  // namespace

SpectralField transform(const Field& f) {
  SpectralField F(f.grid);
  FftEngine::get(f.grid).forward(f.v.data(), F.c.data(), f.grid.n());
  return F;
}

Field inverse_transform(const SpectralField& F) {
  Field f(F.grid);
  FftEngine::get(F.grid).backward(F.c.data(), f.v.data(), F.grid.n());
  return f;
}

double integrate(const Field& u) {
  return pairwise_sum(u.v) * u.grid.cell_volume();
}

double l2_inner(const Field& u, const Field& v) {
  check_same_grid(u.grid, v.grid);
  std::vector<double> prod(u.v.size());
  for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = u.v[i] * v.v[i];
  return pairwise_sum(prod) * u.grid.cell_volume();
}

double l2_norm(const Field& u) { return std::sqrt(l2_inner(u, u)); }

const std::vector<double>& xi2_table(const TorusGrid& g) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int>, std::vector<double>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_tuple(g.N, g.M, g.s);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  const int n1 = g.n1();
  const double fac = 2.0 * M_PI / g.L();
  std::vector<double> t(g.n());
  std::array<int, 3> dim = {g.N >= 1 ? n1 : 1, g.N >= 2 ? n1 : 1, g.N >= 3 ? n1 : 1};
  std::size_t idx = 0;
  for (int i0 = 0; i0 < dim[0]; ++i0) {
    const double x0 = g.N >= 1 ? fac * kfreq(i0, n1) : 0.0;
    for (int i1 = 0; i1 < dim[1]; ++i1) {
      const double x1 = g.N >= 2 ? fac * kfreq(i1, n1) : 0.0;
      for (int i2 = 0; i2 < dim[2]; ++i2) {
        const double x2 = g.N >= 3 ? fac * kfreq(i2, n1) : 0.0;
        t[idx++] = x0 * x0 + x1 * x1 + x2 * x2;
      }
    }
  }
  return cache.emplace(key, std::move(t)).first->second;
}

double gradient_sq_integral(const Field& u) {
  SpectralField F = transform(u);
  const auto& xi2 = xi2_table(u.grid);
  std::vector<double> terms(F.c.size());
  for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = xi2[i] * std::norm(F.c[i]);
  double ln = 1.0;
  for (int d = 0; d < u.grid.N; ++d) ln *= u.grid.L();
  return pairwise_sum(terms) * ln;
}

double h1_norm(const Field& u) {
  const double l2 = l2_inner(u, u);
  return std::sqrt(gradient_sq_integral(u) + l2);
}

Field apply_xi2_multiplier(const Field& u, const std::vector<double>& m_table) {
  if (m_table.size() != u.grid.n()) throw std::invalid_argument("multiplier table size mismatch");
  SpectralField F = transform(u);
  for (std::size_t i = 0; i < F.c.size(); ++i) F.c[i] *= m_table[i];
  return inverse_transform(F);
}

std::vector<double> multiplier_table(const TorusGrid& g, double (*m_of_xi2)(double, double), double param) {
  const auto& xi2 = xi2_table(g);
  std::vector<double> t(xi2.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = m_of_xi2(xi2[i], param);
  return t;
}

std::array<int, 3> unravel(std::size_t idx, const TorusGrid& g) {
  const std::size_t n1 = static_cast<std::size_t>(g.n1());
  std::array<int, 3> ix = {0, 0, 0};
  for (int d = g.N - 1; d >= 0; --d) {
    ix[d] = static_cast<int>(idx % n1);
    idx /= n1;
  }
  return ix;
}

std::size_t ravel(const std::array<int, 3>& ix, const TorusGrid& g) {
  const std::size_t n1 = static_cast<std::size_t>(g.n1());
  std::size_t idx = 0;
  for (int d = 0; d < g.N; ++d) idx = idx * n1 + static_cast<std::size_t>(ix[d]);
  return idx;
}

Field lattice_shift(const Field& u, const std::array<int, 3>& k_cells) {
  const int n1 = u.grid.n1();
  Field out(u.grid);
  std::array<int, 3> kp = {0, 0, 0};
  for (int d = 0; d < u.grid.N; ++d) {
    kp[d] = ((k_cells[d] * u.grid.s) % n1 + n1) % n1;
  }
  for (std::size_t i = 0; i < u.v.size(); ++i) {
    auto ix = unravel(i, u.grid);
    for (int d = 0; d < u.grid.N; ++d) ix[d] = (ix[d] - kp[d] + n1) % n1;
    out.v[i] = u.v[ravel(ix, u.grid)];
  }
  return out;
}

}  // namespace chq
