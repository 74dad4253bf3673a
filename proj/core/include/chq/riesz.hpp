#pragma once

#include <array>
#include <utility>
#include <vector>

#include "chq/grid.hpp"

namespace chq {

// Riesz potential of order alpha: Fourier multiplier |xi|^{-alpha} away from
// k = 0; the k = 0 value is a modeling choice carried explicitly.
struct RieszParams {
  double alpha = 2.0;
  double zero_mode = 0.0;
};

struct NonlocalParams {
  double p = 2.0;
  double alpha = 2.0;

  double p_low(int N) const { return (N + alpha) / N; }
  double p_high(int N) const { return N >= 3 ? (N + alpha) / (N - 2) : 1e300; }
};

void validate_riesz(const RieszParams& rp, const TorusGrid& g);
void validate_nonlocal(const NonlocalParams& np, const TorusGrid& g);

// Truncated-kernel mean: integral of the kernel over the ball |x| <= L/2.
double default_zero_mode(double alpha, const TorusGrid& g);

// Zero mode matching the free-space kernel: fits the constant offset of the
// periodized kernel against A_alpha |x|^{alpha-N} at mid-range radii and
// cancels it. Used by the free-space emulation experiments.
double matched_zero_mode(double alpha, const TorusGrid& g);

// Normalization constant A_alpha of the kernel A_alpha |x|^{alpha-N}.
double riesz_constant(int N, double alpha);

Field riesz_apply(const Field& f, const RieszParams& rp);
// Half-order operator realizing the semigroup factorization; its zero mode is
// sqrt(zero_mode) so the composition reproduces riesz_apply exactly.
Field riesz_half_apply(const Field& f, const RieszParams& rp);

// |u|^p and |u|^{p-2}u with the sign convention sign(u)|u|^{p-1}.
Field abs_pow(const Field& u, double p);
Field signed_pow(const Field& u, double pm1);

// J(u) via the nonnegative semigroup route int (I_{alpha/2} * |u|^p)^2.
double j_energy(const Field& u, const NonlocalParams& np, const RieszParams& rp);
// Direct route int (I_alpha * |u|^p)|u|^p; agrees with j_energy to 1e-10.
double j_energy_direct(const Field& u, const NonlocalParams& np, const RieszParams& rp);

double coulomb_norm(const Field& u, const NonlocalParams& np, const RieszParams& rp);

// L2 representative g = 2p (I_alpha * |u|^p)|u|^{p-2}u of J'.
Field j_gradient(const Field& u, const NonlocalParams& np, const RieszParams& rp);

// lhs = int (I_alpha * g) f, rhs = |f|_t |g|_r (no constant).
std::pair<double, double> hls_check(const Field& f, const Field& g, double t, double r,
                                    const RieszParams& rp);

bool bilinear_cs_check(const Field& f, const Field& g, const RieszParams& rp);

bool convexity_check(const Field& u, const Field& w, const NonlocalParams& np,
                     const RieszParams& rp);

struct BrezisLiebRow {
  std::array<int, 3> shift;
  double defect;
};
std::vector<BrezisLiebRow> brezis_lieb_check(const Field& u, const Field& w,
                                             const std::vector<std::array<int, 3>>& shifts,
                                             const NonlocalParams& np, const RieszParams& rp);

double lp_norm(const Field& u, double t);

}  // namespace chq
