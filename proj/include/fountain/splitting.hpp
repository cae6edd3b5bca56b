#ifndef FOUNTAIN_SPLITTING_HPP
#define FOUNTAIN_SPLITTING_HPP

// Orthogonal indefinite splittings X = X- (+) X+ of the product spaces used
// by the elliptic system (E^s x E^t) and the periodic Hamiltonian system
// (space-time modes of L = J d/dt + A).
//
// Points are stored as raw L2 coefficients: the u block followed by the v
// block. For the Hamiltonian system each spatial mode j carries 2K+1
// temporal functions {1, cos(w_1 t), sin(w_1 t), ..., sin(w_K t)}, each
// L2(0,T)-normalized.
//
// The metric is diagonal in raw coefficients. Scaling by the square roots of
// those weights gives metric coordinates y; inside every block the split is
// then an orthogonal change of variables
//
//   c+ = (y_u + R y_v) / sqrt(2),   c- = (y_u - R y_v) / sqrt(2)
//
// with R orthogonal (R = [1] for the elliptic system). The vector
// c = [c- ..., c+ ...] is an orthonormal coordinate system of X, listed in
// the direction order documented on SplitSpace.

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fountain/spectral.hpp"

namespace fountain {

enum class Problem { ES, HS };

std::string to_string(Problem problem);
Problem problem_from_string(const std::string &name);

struct ProductPoint {
  Problem problem = Problem::ES;
  Eigen::VectorXd coeffs;
};

struct SplitBlock {
  std::vector<int> u_index;
  std::vector<int> v_index;
  Eigen::MatrixXd rotation;
  double mu = 0.0;
  int space_mode = 0;
  int frequency = 0;
};

struct Direction {
  bool positive = true;
  int block = 0;
  int slot = 0;
  double mu = 0.0;
  int space_mode = 0;
  int frequency = 0;
};

/// Immutable splitting of a Galerkin product space.
///
/// Directions of each sign are ordered by ascending mu, then spatial index
/// tuple, then temporal frequency, then slot within the block. The plus
/// directions in this order are the basis e_0, e_1, ... of X+; the minus
/// directions are the enumeration a_0, a_1, ... used by the tau norm.
class SplitSpace {
public:
  Problem problem() const { return problem_; }
  const EigenBasis &basis() const { return *basis_; }
  std::shared_ptr<const EigenBasis> basis_ptr() const { return basis_; }

  double s() const { return s_; }
  double t() const { return t_; }
  double period() const { return period_; }
  double potential_shift() const { return shift_; }
  int temporal_cutoff() const { return cutoff_; }
  /// Temporal functions per spatial mode: 2K+1 for HS, 1 for ES.
  int temporal_functions() const { return problem_ == Problem::HS ? 2 * cutoff_ + 1 : 1; }

  int dimension() const { return static_cast<int>(weights_.size()); }
  int plus_count() const { return static_cast<int>(plus_.size()); }
  int minus_count() const { return static_cast<int>(minus_.size()); }

  const Eigen::VectorXd &metric_weights() const { return weights_; }
  const std::vector<SplitBlock> &blocks() const { return blocks_; }
  const std::vector<Direction> &plus() const { return plus_; }
  const std::vector<Direction> &minus() const { return minus_; }

  int raw_index(int component, int space_mode, int temporal) const {
    return (component * basis_->size() + space_mode) * temporal_functions() + temporal;
  }

  ProductPoint zero() const;
  void check(const ProductPoint &z) const;

  /// Orthonormal split coordinates [c-, c+].
  Eigen::VectorXd coords(const ProductPoint &z) const;
  ProductPoint point(const Eigen::VectorXd &c) const;
  /// Same maps on metric coordinates y = sqrt(weights) * raw.
  Eigen::VectorXd coords_from_metric(const Eigen::VectorXd &y) const;
  Eigen::VectorXd metric_from_coords(const Eigen::VectorXd &c) const;

  /// Unit vector along minus direction i (positive = false) or plus
  /// direction i (positive = true).
  ProductPoint direction_point(bool positive, int i) const;
  int coord_index(bool positive, int i) const {
    return positive ? minus_count() + i : i;
  }

  double inner(const ProductPoint &a, const ProductPoint &b) const;
  double norm(const ProductPoint &z) const;

  /// Mutation hook for negative-control checks: flips the sign of the
  /// cross term in the plus projection.
  void inject_projection_sign_error() { sign_error_ = true; }

  friend SplitSpace build_es_split(std::shared_ptr<const EigenBasis> basis,
                                   double s, double t);
  friend SplitSpace build_hs_split(std::shared_ptr<const EigenBasis> basis,
                                   double shift, double period, int cutoff);

private:
  void finalize();

  Problem problem_ = Problem::ES;
  std::shared_ptr<const EigenBasis> basis_;
  double s_ = 1.0, t_ = 1.0;
  double period_ = 0.0, shift_ = 0.0;
  int cutoff_ = 0;
  Eigen::VectorXd weights_;
  Eigen::VectorXd sqrt_weights_;
  std::vector<SplitBlock> blocks_;
  std::vector<Direction> plus_, minus_;
  std::vector<std::vector<int>> plus_pos_, minus_pos_;
  bool sign_error_ = false;
};

/// E = E^s x E^t with E+- = {(u, +-A^(s-t) u)}. Requires s + t = 2 and
/// s >= t > 0.
SplitSpace build_es_split(std::shared_ptr<const EigenBasis> basis, double s,
                          double t);

/// Space-time splitting for L = J d/dt + J0(-Laplace + V0) with period T and
/// temporal frequencies 0..K. Throws AssumptionError("V2") when some retained
/// lambda_j + V0 vanishes.
SplitSpace build_hs_split(std::shared_ptr<const EigenBasis> basis, double shift,
                          double period, int cutoff);

struct Projection {
  ProductPoint plus;
  ProductPoint minus;
};

Projection project_pm(const SplitSpace &split, const ProductPoint &z);

/// Elliptic-system helpers.
ProductPoint make_es_point(const SplitSpace &split, const CoeffVec &u,
                           const CoeffVec &v);
CoeffVec es_component(const SplitSpace &split, const ProductPoint &z, int component);

/// Enumeration of the minus directions with weights 2^-(j+1).
struct TauWeights {
  std::vector<int> order;
  std::vector<double> weights;

  static TauWeights canonical(const SplitSpace &split);
};

/// max( sum_j w_j |<P- z, a_j>|, ||P+ z|| ).
double tau_norm(const SplitSpace &split, const TauWeights &order,
                const ProductPoint &z);

/// Coordinate ranges of X_k- = X- (+) span(e_0..e_k) and
/// X_k+ = span(e_k, e_{k+1}, ...), both contiguous in split coordinates.
struct GalerkinSubspaces {
  int k = 0;
  int lower_begin = 0, lower_end = 0; ///< X_k-
  int upper_begin = 0, upper_end = 0; ///< X_k+

  int lower_dim() const { return lower_end - lower_begin; }
  int upper_dim() const { return upper_end - upper_begin; }
};

GalerkinSubspaces galerkin_subspaces(const SplitSpace &split, int k);

} // namespace fountain

#endif
