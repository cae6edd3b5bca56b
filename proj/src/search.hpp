#ifndef FOUNTAIN_SRC_SEARCH_HPP
#define FOUNTAIN_SRC_SEARCH_HPP

// Optimizers shared by the geometry evaluators and the saddle solver. All of
// them work on x, the coordinates of c = B x for an orthonormal basis B of a
// subspace, so ||c|| = ||x||.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "fountain/energy.hpp"

namespace fountain::detail {

/// Columns e_begin .. e_{end-1} of the identity of size dim.
Eigen::MatrixXd coordinate_columns(int dim, int begin, int end);

struct ExtremumOptions {
  bool maximize = true;
  bool ball = false; ///< false: the sphere ||x|| = radius
  int starts = 8;
  std::uint64_t seed = 1;
  int max_iterations = 400;
  /// Start points in subspace coordinates; sphere starts are rescaled onto
  /// the sphere, ball starts are clipped into the ball.
  std::vector<Eigen::VectorXd> seeds;
};

struct Extremum {
  double value = 0.0;
  Eigen::VectorXd x;
  int iterations = 0;
};

/// Multi-start projected gradient ascent (or descent) of Phi(B x) with
/// Armijo backtracking.
Extremum constrained_extremum(const EnergyModel &model, const Eigen::MatrixXd &basis,
                              double radius, const ExtremumOptions &options);

struct Peak {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd grad; ///< full gradient at B x
  int iterations = 0;
  bool converged = false;
};

/// Unconstrained maximization of Phi(B x) by Newton steps on the restricted
/// Hessian, with positive curvature flipped so every step ascends.
Peak maximize_on(const EnergyModel &model, const Eigen::MatrixXd &basis,
                 Eigen::VectorXd x, int max_iterations, double tol);

/// t > 0 maximizing Phi(t c) along a direction, by doubling and golden section.
double best_scale(const EnergyModel &model, const Eigen::VectorXd &direction);

/// `count` unit directions in R^m: the coordinate axes first, then a Halton
/// sequence pushed through the normal quantile.
std::vector<Eigen::VectorXd> mesh_directions(int m, int count, std::uint64_t seed);

} // namespace fountain::detail

#endif
