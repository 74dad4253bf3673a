#include "chq/riesz.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace chq {

void validate_riesz(const RieszParams& rp, const TorusGrid& g) {
  if (!(rp.alpha > 0.0) || !(rp.alpha < g.N))
    throw std::invalid_argument("alpha must lie in (0, N)");
  if (rp.zero_mode < 0.0) throw std::invalid_argument("zero_mode must be >= 0");
}

void validate_nonlocal(const NonlocalParams& np, const TorusGrid& g) {
  if (!(np.alpha > 0.0) || !(np.alpha < g.N))
    throw std::invalid_argument("alpha must lie in (0, N)");
  if (!(np.p > np.p_low(g.N)) || !(np.p < np.p_high(g.N)))
    throw std::invalid_argument("p out of admissible range");
}

double riesz_constant(int N, double alpha) {
  return std::tgamma((N - alpha) / 2.0) /
         (std::pow(2.0, alpha) * std::pow(M_PI, N / 2.0) * std::tgamma(alpha / 2.0));
}

double default_zero_mode(double alpha, const TorusGrid& g) {
  const int N = g.N;
  const double sigma = 2.0 * std::pow(M_PI, N / 2.0) / std::tgamma(N / 2.0);
  return riesz_constant(N, alpha) * sigma * std::pow(g.L() / 2.0, alpha) / alpha;
}

namespace {

const std::vector<double>& riesz_table(const TorusGrid& g, double alpha, double zero_mode,
                                       bool half) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int, double, double, bool>, std::vector<double>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_tuple(g.N, g.M, g.s, alpha, zero_mode, half);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  const auto& xi2 = xi2_table(g);
  const double expo = half ? alpha / 4.0 : alpha / 2.0;  // (xi^2)^expo = |xi|^{alpha or alpha/2}
  std::vector<double> t(xi2.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = xi2[i] > 0.0 ? std::pow(xi2[i], -expo) : (half ? std::sqrt(zero_mode) : zero_mode);
  }
  return cache.emplace(key, std::move(t)).first->second;
}

}  // namespace

Field riesz_apply(const Field& f, const RieszParams& rp) {
  validate_riesz(rp, f.grid);
  return apply_xi2_multiplier(f, riesz_table(f.grid, rp.alpha, rp.zero_mode, false));
}

Field riesz_half_apply(const Field& f, const RieszParams& rp) {
  validate_riesz(rp, f.grid);
  return apply_xi2_multiplier(f, riesz_table(f.grid, rp.alpha, rp.zero_mode, true));
}

double matched_zero_mode(double alpha, const TorusGrid& g) {
  RieszParams rp{alpha, 0.0};
  validate_riesz(rp, g);
  // Grid kernel at zero mode 0: G(r) = IDFT(multiplier)/h^N. Its deviation
  // from the free kernel at mid-range radii is a constant plus an O(r^2)
  // lattice term; fit both and cancel the constant.
  SpectralField D(g);
  const auto& table = riesz_table(g, alpha, 0.0, false);
  double vol = 1.0;
  for (int d = 0; d < g.N; ++d) vol *= g.L();
  for (std::size_t i = 0; i < D.c.size(); ++i) D.c[i] = table[i];
  Field K = inverse_transform(D);
  // Multiplier application is (1/n) sum_j K_{i-j} u_j, i.e. quadrature against
  // G = K / L^N, since n h^N = L^N.
  const double scale = 1.0 / vol;
  const double A = riesz_constant(g.N, alpha);

  const double r_lo = g.L() / 8.0, r_hi = g.L() / 4.0;
  double s00 = 0.0, s01 = 0.0, s11 = 0.0, b0 = 0.0, b1 = 0.0;
  const int n1 = g.n1();
  for (std::size_t i = 0; i < K.v.size(); ++i) {
    auto ix = unravel(i, g);
    double r2 = 0.0;
    for (int d = 0; d < g.N; ++d) {
      const double xd = (ix[d] <= n1 / 2 ? ix[d] : ix[d] - n1) * g.h();
      r2 += xd * xd;
    }
    const double r = std::sqrt(r2);
    if (r < r_lo || r > r_hi) continue;
    const double y = K.v[i] * scale - A * std::pow(r, alpha - g.N);
    s00 += 1.0;
    s01 += r2;
    s11 += r2 * r2;
    b0 += y;
    b1 += r2 * y;
  }
  if (s00 < 4.0) throw std::runtime_error("grid too small to match the zero mode");
  const double det = s00 * s11 - s01 * s01;
  const double c = (s11 * b0 - s01 * b1) / det;
  return -c * vol;
}

Field abs_pow(const Field& u, double p) {
  Field w(u.grid);
  if (p == 2.0) {
    for (std::size_t i = 0; i < u.v.size(); ++i) w.v[i] = u.v[i] * u.v[i];
  } else {
    for (std::size_t i = 0; i < u.v.size(); ++i) w.v[i] = std::pow(std::abs(u.v[i]), p);
  }
  return w;
}

Field signed_pow(const Field& u, double pm1) {
  Field w(u.grid);
  if (pm1 == 1.0) {
    w.v = u.v;
  } else {
    for (std::size_t i = 0; i < u.v.size(); ++i) {
      const double a = std::abs(u.v[i]);
      w.v[i] = a > 0.0 ? std::copysign(std::pow(a, pm1), u.v[i]) : 0.0;
    }
  }
  return w;
}

double j_energy(const Field& u, const NonlocalParams& np, const RieszParams& rp) {
  validate_nonlocal(np, u.grid);
  Field w = abs_pow(u, np.p);
  Field hw = riesz_half_apply(w, rp);
  return l2_inner(hw, hw);
}

double j_energy_direct(const Field& u, const NonlocalParams& np, const RieszParams& rp) {
  validate_nonlocal(np, u.grid);
  Field w = abs_pow(u, np.p);
  return l2_inner(riesz_apply(w, rp), w);
}

double coulomb_norm(const Field& u, const NonlocalParams& np, const RieszParams& rp) {
  return std::pow(j_energy(u, np, rp), 1.0 / (2.0 * np.p));
}

Field j_gradient(const Field& u, const NonlocalParams& np, const RieszParams& rp) {
  validate_nonlocal(np, u.grid);
  Field conv = riesz_apply(abs_pow(u, np.p), rp);
  Field su = signed_pow(u, np.p - 1.0);
  Field g(u.grid);
  for (std::size_t i = 0; i < g.v.size(); ++i) g.v[i] = 2.0 * np.p * conv.v[i] * su.v[i];
  return g;
}

double lp_norm(const Field& u, double t) {
  std::vector<double> terms(u.v.size());
  for (std::size_t i = 0; i < terms.size(); ++i) terms[i] = std::pow(std::abs(u.v[i]), t);
  return std::pow(pairwise_sum(terms) * u.grid.cell_volume(), 1.0 / t);
}

std::pair<double, double> hls_check(const Field& f, const Field& g, double t, double r,
                                    const RieszParams& rp) {
  if (!(t > 1.0) || !(r > 1.0) ||
      std::abs(1.0 / t + 1.0 / r - 1.0 - rp.alpha / f.grid.N) > 1e-12)
    throw std::invalid_argument("HLS exponents must satisfy 1/t + 1/r = 1 + alpha/N");
  const double lhs = l2_inner(riesz_apply(g, rp), f);
  return {lhs, lp_norm(f, t) * lp_norm(g, r)};
}

bool bilinear_cs_check(const Field& f, const Field& g, const RieszParams& rp) {
  for (double x : f.v)
    if (x < 0.0) throw std::invalid_argument("bilinear check requires nonnegative inputs");
  for (double x : g.v)
    if (x < 0.0) throw std::invalid_argument("bilinear check requires nonnegative inputs");
  const double lhs = l2_inner(riesz_apply(f, rp), g);
  const double ff = l2_inner(riesz_apply(f, rp), f);
  const double gg = l2_inner(riesz_apply(g, rp), g);
  const double rhs = std::sqrt(std::max(ff, 0.0)) * std::sqrt(std::max(gg, 0.0));
  return lhs <= rhs + 1e-12 * (1.0 + std::abs(rhs));
}

bool convexity_check(const Field& u, const Field& w, const NonlocalParams& np,
                     const RieszParams& rp) {
  Field sum(u.grid);
  for (std::size_t i = 0; i < sum.v.size(); ++i) sum.v[i] = u.v[i] + w.v[i];
  const double lhs = j_energy(sum, np, rp);
  const double rhs = std::pow(2.0, 1.0 - 2.0 * np.p) * j_energy(u, np, rp) - j_energy(w, np, rp);
  return lhs >= rhs - 1e-12 * (1.0 + std::abs(rhs));
}

std::vector<BrezisLiebRow> brezis_lieb_check(const Field& u, const Field& w,
                                             const std::vector<std::array<int, 3>>& shifts,
                                             const NonlocalParams& np, const RieszParams& rp) {
  std::vector<BrezisLiebRow> rows;
  const double ju = j_energy(u, np, rp);
  for (const auto& k : shifts) {
    for (int d = 0; d < u.grid.N; ++d) {
      if (std::abs(static_cast<double>(k[d])) > u.grid.L() / 2.0)
        throw std::invalid_argument("shift exceeds half-period");
    }
    Field tw = lattice_shift(w, k);
    const double jtw = j_energy(tw, np, rp);
    Field un(u.grid);
    for (std::size_t i = 0; i < un.v.size(); ++i) un.v[i] = u.v[i] + tw.v[i];
    rows.push_back({k, std::abs(j_energy(un, np, rp) - jtw - ju)});
  }
  return rows;
}

}  // namespace chq
