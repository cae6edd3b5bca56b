#ifndef FOUNTAIN_ORACLE_HPP
#define FOUNTAIN_ORACLE_HPP

// Brute-force references for cross-checking the spectral machinery. Nothing
// here calls the fractional-power arithmetic or the minimax engine; the
// eigenvalues and eigenfunctions are recomputed from closed forms.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "fountain/energy.hpp"

namespace fountain {

struct ShootingResult {
  double p = 0.0;
  double length = 0.0;
  double slope = 0.0;  ///< u'(0) of the one-sign solution
  double energy = 0.0; ///< int_0^l (u'^2 / 2 - |u|^p / p)
  double boundary_residual = 0.0;
  int bisection_steps = 0;
  std::vector<double> x;
  std::vector<double> u;
};

/// Positive solution of -u'' = |u|^(p-2) u, u(0) = u(l) = 0, by bisection on
/// u'(0) for the first zero of the RK4 trajectory.
ShootingResult shooting_ground_state(double p, double length, int steps = 20000);

/// Central differences of Phi along each split coordinate, returned as the
/// metric gradient point.
ProductPoint fd_gradient(const EnergyModel &model, const ProductPoint &z, double h);

struct DenseSpectrum {
  int dof = 0;
  Eigen::VectorXd eigenvalues; ///< dense eigenvalues, ascending
  Eigen::VectorXd predicted;   ///< per-mode formula, ascending
  double max_mismatch = 0.0;   ///< eigenvalues vs formula
  double min_abs = 0.0;        ///< smallest |eigenvalue|
  double weight_mismatch = 0.0; ///< |L| (or metric) vs split weights
  double direction_residual = 0.0; ///< split directions as eigenvectors
};

/// HS: assembles L = J d/dt + A on the raw trig x sine basis and compares
/// its eigendecomposition with +-sqrt((lambda_j + V0)^2 + w_k^2) and with the
/// split. ES: solves the generalized problem of the bilinear form against the
/// s x t metric, whose eigenvalues are +-1. Capped at 2000 dof.
DenseSpectrum dense_operator_check(const SplitSpace &split);

/// Dense spectrum of L from scratch. Throws AssumptionError("V2") when 0 is an
/// eigenvalue.
Eigen::VectorXd dense_hs_spectrum(const DomainSpec &domain,
                                  const std::vector<ModeIndex> &modes,
                                  double shift, double period, int cutoff);

struct BruteEmbedding {
  double beta = 0.0;
  int samples = 0;
};

/// Lower bound for the tail embedding constant: the largest |w|_r over random
/// unit-norm tail vectors supported on 1 to 4 random tail modes.
BruteEmbedding brute_embedding(const EigenBasis &basis, double s, double r, int k,
                               int samples, std::uint64_t seed = 0x0bad5eedULL);

} // namespace fountain

#endif
