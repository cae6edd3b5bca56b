#ifndef FOUNTAIN_ENERGY_HPP
#define FOUNTAIN_ENERGY_HPP

// Energy functionals
//
//   Phi(z) = 1/2 ||z+||^2 - 1/2 ||z-||^2 -+ Psi(z),
//
// with Psi(u, v) = int F(u) + G(v) for the elliptic system and
// Psi(z) = int_Theta H(z) for the Hamiltonian system. The minus sign is the
// primal convention; the plus sign is the dual convention used by the dual
// geometry evaluator.
//
// All evaluation happens in split coordinates c (see SplitSpace::coords). The
// grid fields are u = S_u c and v = S_v c with dense synthesis matrices, so
// the metric gradient is Q c -+ S_u^T W H_u - S_v^T W H_v with Q = diag(-1, +1).

#include <memory>

#include <Eigen/Dense>

#include "fountain/nonlinearity.hpp"
#include "fountain/splitting.hpp"

namespace fountain {

class EnergyModel {
public:
  /// Psi(u, v) = int F(u) + G(v) on the spatial quadrature grid.
  static EnergyModel elliptic(std::shared_ptr<const SplitSpace> split,
                              ScalarNonlinearity f, ScalarNonlinearity g);
  /// Psi(z) = int H(z) on the space-time grid with `time_nodes` equispaced
  /// nodes per period (0 selects 4(2K+1)).
  static EnergyModel hamiltonian(std::shared_ptr<const SplitSpace> split,
                                 HamiltonianDensity density, int time_nodes = 0);

  /// Same model with the sign of Psi flipped.
  EnergyModel dual() const;
  bool is_dual() const { return dual_; }

  Problem problem() const { return split_->problem(); }
  const SplitSpace &split() const { return *split_; }
  std::shared_ptr<const SplitSpace> split_ptr() const { return split_; }
  const ScalarNonlinearity &f() const { return f_; }
  const ScalarNonlinearity &g() const { return g_; }
  const HamiltonianDensity &density() const { return density_; }

  int dimension() const { return split_->dimension(); }
  int grid_size() const { return static_cast<int>(weights_.size()); }
  int time_nodes() const { return time_nodes_; }
  const Eigen::VectorXd &grid_weights() const { return weights_; }
  /// |Omega| for ES, T |Omega| for HS.
  double volume() const { return volume_; }
  /// Grid field of component 0 (u) or 1 (v) as a linear map of split coordinates.
  const Eigen::MatrixXd &synthesis(int component) const {
    return component == 0 ? su_ : sv_;
  }
  /// Signature of the quadratic part: -1 on minus coordinates, +1 on plus.
  const Eigen::VectorXd &signature() const { return signature_; }

  double quadratic(const Eigen::VectorXd &c) const;
  double psi(const Eigen::VectorXd &c) const;
  double phi(const Eigen::VectorXd &c) const;
  /// Metric gradient in split coordinates.
  Eigen::VectorXd grad(const Eigen::VectorXd &c) const;
  /// Phi and its gradient from one synthesis.
  double phi_grad(const Eigen::VectorXd &c, Eigen::VectorXd &gradient) const;
  /// Dense Hessian in split coordinates.
  Eigen::MatrixXd hessian(const Eigen::VectorXd &c) const;
  /// B^T Hess(c) B for a dim x m basis B.
  Eigen::MatrixXd hessian_restricted(const Eigen::VectorXd &c,
                                     const Eigen::MatrixXd &basis) const;
  /// (1 + ||z||) ||Phi'(z)||.
  double cerami(const Eigen::VectorXd &c) const;
  /// int 1/2 H_z.z - H over the grid (for ES, the same with F and G).
  double h_tilde_integral(const Eigen::VectorXd &c) const;

  /// ProductPoint forms of the above.
  double eval_phi(const ProductPoint &z) const;
  double eval_psi(const ProductPoint &z) const;
  ProductPoint grad_phi(const ProductPoint &z) const;
  double cerami_measure(const ProductPoint &z) const;

private:
  struct Fields {
    Eigen::VectorXd u, v;
  };
  Fields fields(const Eigen::VectorXd &c) const;
  void check_coords(const Eigen::VectorXd &c) const;
  double density_sum(const Fields &fl) const;
  void nonlinear_field(const Fields &fl, Eigen::VectorXd &hu, Eigen::VectorXd &hv) const;
  void build_grid(int time_nodes);

  std::shared_ptr<const SplitSpace> split_;
  ScalarNonlinearity f_ = ScalarNonlinearity::zero();
  ScalarNonlinearity g_ = ScalarNonlinearity::zero();
  HamiltonianDensity density_ = HamiltonianDensity::zero();
  bool dual_ = false;
  int time_nodes_ = 1;
  double volume_ = 0.0;
  Eigen::VectorXd weights_;
  Eigen::VectorXd signature_;
  Eigen::MatrixXd su_, sv_;
};

/// Synthesizes a point on the model's grid: columns u and v.
Eigen::MatrixXd grid_fields(const EnergyModel &model, const ProductPoint &z);

/// Temporal basis value: tau = 0 is 1/sqrt(T), tau = 2k-1 is
/// sqrt(2/T) cos(w_k t), tau = 2k is sqrt(2/T) sin(w_k t).
double temporal_function(int tau, double t, double period);

} // namespace fountain

#endif
