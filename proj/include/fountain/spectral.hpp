#ifndef FOUNTAIN_SPECTRAL_HPP
#define FOUNTAIN_SPECTRAL_HPP

// Dirichlet spectral calculus on box domains.
//
// A function on the domain is carried by its coefficients in the L2-normalized
// Dirichlet eigenbasis of -Laplace. Fractional powers, the E^s inner products
// and the transforms to and from a Gauss-Legendre grid all act on those
// coefficients.

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fountain {

enum class DomainKind { Interval, Rectangle };

std::string to_string(DomainKind kind);
DomainKind domain_kind_from_string(const std::string &name);

struct DomainSpec {
  DomainKind kind = DomainKind::Interval;
  std::array<double, 2> lengths{3.141592653589793, 0.0};

  static DomainSpec interval(double length);
  static DomainSpec rectangle(double lx, double ly);

  int dimension() const { return kind == DomainKind::Interval ? 1 : 2; }
  double measure() const;
  /// Throws unless the lengths are positive and finite.
  void validate() const;
};

/// One-based mode index; the second entry is 0 on intervals.
using ModeIndex = std::array<int, 2>;

struct Quadrature {
  Eigen::MatrixXd nodes; ///< dimension x node count
  Eigen::VectorXd weights;
};

/// Lowest Dirichlet eigenpairs of -Laplace together with a quadrature grid and
/// the eigenfunction values on it.
class EigenBasis {
public:
  const DomainSpec &domain() const { return domain_; }
  int size() const { return static_cast<int>(lambda_.size()); }
  int node_count() const { return static_cast<int>(quad_.weights.size()); }
  int oversampling() const { return oversampling_; }

  const Eigen::VectorXd &eigenvalues() const { return lambda_; }
  double eigenvalue(int j) const { return lambda_(j); }
  const std::vector<ModeIndex> &indices() const { return index_; }
  const Quadrature &quadrature() const { return quad_; }
  /// node_count x size matrix of phi_j(x_q).
  const Eigen::MatrixXd &values() const { return phi_; }

  /// Identity of (domain, truncation, grid); coefficient vectors carry it.
  std::uint64_t id() const { return id_; }

  friend EigenBasis build_basis(const DomainSpec &domain, int modes,
                                int oversampling);

private:
  DomainSpec domain_;
  int oversampling_ = 0;
  Eigen::VectorXd lambda_;
  std::vector<ModeIndex> index_;
  Quadrature quad_;
  Eigen::MatrixXd phi_;
  std::uint64_t id_ = 0;
};

/// Builds the `modes` lowest modes sorted by eigenvalue, ties broken
/// lexicographically on the index tuple. The grid uses 20-point
/// Gauss-Legendre panels with at least `oversampling` nodes per unit of the
/// highest retained frequency in each direction.
EigenBasis build_basis(const DomainSpec &domain, int modes,
                       int oversampling = 8);

/// Closed-form Dirichlet eigenvalue of a mode.
double dirichlet_eigenvalue(const DomainSpec &domain, const ModeIndex &index);
/// Pointwise value of the L2-normalized eigenfunction.
double dirichlet_eigenfunction(const DomainSpec &domain, const ModeIndex &index,
                               std::span<const double> x);

struct CoeffVec {
  std::uint64_t basis = 0;
  Eigen::VectorXd a;
};

struct GridFn {
  Eigen::VectorXd values;
};

CoeffVec zero_coeff(const EigenBasis &basis);
CoeffVec unit_coeff(const EigenBasis &basis, int j);

/// A^s u: multiplies coefficient j by lambda_j^(s/2). Negative s gives the
/// inverse power.
CoeffVec apply_fractional(const EigenBasis &basis, double s, const CoeffVec &u);

/// <u, v>_s = sum_j lambda_j^s a_j b_j.
double es_inner(const EigenBasis &basis, double s, const CoeffVec &u,
                const CoeffVec &v);
double es_norm(const EigenBasis &basis, double s, const CoeffVec &u);

GridFn synthesize(const EigenBasis &basis, const CoeffVec &u);
CoeffVec analyze(const EigenBasis &basis, const GridFn &g);

/// |g|_r by quadrature.
double lebesgue_norm(const EigenBasis &basis, const GridFn &g, double r);

struct EmbeddingOptions {
  int starts = 8;
  std::uint64_t seed = 0x5eed5eedULL;
  int max_iterations = 5000;
  double rel_tol = 1e-15;
};

struct SphereSupResult {
  double value = 0.0;       ///< sup of |w|_r found
  Eigen::VectorXd coords;   ///< unit coordinates of the maximizer
  int best_start = 0;
  int iterations = 0;       ///< total over all starts
};

/// Maximizes |w|_r over the unit sphere of coordinates c, where w is the
/// (possibly vector-valued) grid field sum_i c_i F_i. `components[m]` holds
/// component m of every F_i as columns; `weights` are the quadrature weights.
///
/// The iteration c <- grad J(c) / |grad J(c)| with J = |w|_r^r increases J
/// monotonically because J is convex; start 0 is the first coordinate vector
/// and the remaining starts are seeded Gaussian directions.
SphereSupResult lr_sphere_sup(std::span<const Eigen::MatrixXd> components,
                              const Eigen::VectorXd &weights, double r,
                              const EmbeddingOptions &options = {});

struct EmbeddingEstimate {
  double beta = 0.0;
  CoeffVec maximizer; ///< ||maximizer||_s = 1
  int best_start = 0;
  int iterations = 0;
};

/// sup { |w|_r : w in span(phi_k, ..., phi_{N-1}), ||w||_s = 1 }.
EmbeddingEstimate embedding_constant(const EigenBasis &basis, double s, double r,
                                     int k, const EmbeddingOptions &options = {});

} // namespace fountain

#endif
