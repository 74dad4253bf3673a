#pragma once

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <vector>

#include "chq/grid.hpp"

namespace chq {

// Per-quasimomentum eigendecomposition of the cell operator -(grad + i kappa)^2
// + V in the s^N plane-wave cell basis. The potential coupling is circulant
// (frequency differences mod s), so the decomposition represents the grid
// operator exactly: projectors and spectral functions built from it commute
// with the discrete -Delta + V to machine precision.
struct BlochDecomposition {
  enum class Store { values_only, below_level, full };

  TorusGrid grid;
  Field potential;
  int nbands = 0;
  Store store = Store::full;
  double split_level = 0.0;  // used when store == below_level
  bool vzero = false;        // identically zero potential: Fourier fast paths

  // kappa grid: row-major over m in [0, M)^N; kappa_d = 2 pi m_d / M.
  int kcount = 0;   // M^N
  int cellsize = 0; // s^N
  std::vector<Eigen::VectorXd> mu;          // [kcount], ascending
  std::vector<Eigen::MatrixXcd> vecs;       // full store: cellsize x cellsize
  std::vector<Eigen::MatrixXcd> below;      // below_level store: cellsize x d-
  std::vector<std::vector<std::size_t>> gather;  // [kcount][cellsize] global index
  std::vector<Eigen::VectorXd> xi2_cell;    // [kcount], |xi|^2 per cell basis entry

  std::array<int, 3> kappa_of(int ki) const;
};

struct GapInfo {
  double a = 0.0;
  double b = 0.0;
  int band_a = -1, band_b = -1;
  std::array<int, 3> kappa_a = {0, 0, 0}, kappa_b = {0, 0, 0};
};

struct SplittingConstants {
  double alpha0 = 0.0;
  double beta0 = 0.0;
  double a = 0.0;
  double b = 0.0;

  double alpha_lambda(double lambda) const {
    return lambda <= 0.0 ? alpha0 * (1.0 - lambda / a) : alpha0;
  }
  double beta_lambda(double lambda) const {
    return lambda > 0.0 ? beta0 * (1.0 - lambda / b) : beta0;
  }
};

BlochDecomposition band_structure(const Field& potential, const TorusGrid& g, int nbands,
                                  BlochDecomposition::Store store = BlochDecomposition::Store::full,
                                  double split_level = 0.0);

GapInfo find_gap(const BlochDecomposition& d, double level = 0.0);

enum class Side { minus, plus };
Field project(const Field& u, const BlochDecomposition& d, double level, Side side);

// u -> sum over Bloch modes of g(mu) times the modal component. Requires full
// storage.
Field apply_spectral_function(const Field& u, const BlochDecomposition& d,
                              const std::function<double(double)>& g);

double quadratic_form(const Field& u, const Field& potential, double lambda);

double e_lambda_norm(const Field& u, const BlochDecomposition& d, double level, double lambda);

SplittingConstants splitting_constants(const BlochDecomposition& d, const GapInfo& gap);

// Extremal generalized eigenvalues of Q_level against the H1 Gram on the
// above-level subspace: returns (min, max); the equivalence constants of
// ||.||_{E} and ||.||_{H1} there.
std::pair<double, double> eplus_equivalence_constants(const BlochDecomposition& d, double level);

// Q_j = P_{a,-1/j} + (Id - P_{a,0}): keeps mu < a - 1/j and mu > a.
// j = 0 is the infinite-j sentinel (cutoff 0).
Field qj_projection(const Field& u, const BlochDecomposition& d, const GapInfo& gap, int j);

// Supercell Bloch eigenfunction e^{i kappa x} phi(x) for the given
// quasimomentum index and band (complex-valued field as a pair of real
// fields).
std::pair<Field, Field> bloch_eigenfield(const BlochDecomposition& d, int kappa_index, int band);

// Supercell field (real, imaginary) from an arbitrary cell-basis coefficient
// vector at the given quasimomentum class.
std::pair<Field, Field> field_from_cell_vector(const BlochDecomposition& d, int kappa_index,
                                               const Eigen::VectorXcd& w);

// One dense cell eigensolve at quasimomentum m (ascending eigenvalues,
// orthonormal eigenvectors); independent of any stored decomposition.
std::pair<Eigen::VectorXd, Eigen::MatrixXcd> cell_eigensolve(const Field& potential,
                                                             const TorusGrid& g,
                                                             const std::array<int, 3>& m);

int kappa_linear_index(const BlochDecomposition& d, const std::array<int, 3>& m);

}  // namespace chq
