#include "fountain/minimax.hpp"

#include "fountain/error.hpp"

namespace fountain {

StrongResidual strong_residual(const EnergyModel &model, const ProductPoint &z, int refine) {
  const SplitSpace &split = model.split();
  if (split.problem() != Problem::ES)
    throw Error(ErrorCode::InvalidArgument, "strong residual is defined for the elliptic system");
  if (refine < 1)
    throw Error(ErrorCode::InvalidArgument, "refinement factor must be at least 1");
  split.check(z);
  const EigenBasis &coarse = split.basis();
  const EigenBasis fine =
      build_basis(coarse.domain(), coarse.size(), coarse.oversampling() * refine);
  if (fine.indices() != coarse.indices())
    throw Error(ErrorCode::BasisMismatch, "refined basis selects different modes");

  const int n = coarse.size();
  const Eigen::VectorXd a = z.coeffs.head(n), b = z.coeffs.tail(n);
  const Eigen::VectorXd &lam = coarse.eigenvalues();
  const Eigen::MatrixXd &phi = fine.values();
  const Eigen::VectorXd &w = fine.quadrature().weights;
  const Eigen::VectorXd u = phi * a, v = phi * b;
  const Eigen::VectorXd lap_u = phi * lam.cwiseProduct(a); // -Laplace u
  const Eigen::VectorXd lap_v = phi * lam.cwiseProduct(b);

  Eigen::VectorXd ru(u.size()), rv(u.size());
  for (int q = 0; q < u.size(); ++q) {
    ru(q) = lap_u(q) - model.g().f(v(q));
    rv(q) = lap_v(q) - model.f().f(u(q));
  }
  auto l2 = [&](const Eigen::VectorXd &x) { return std::sqrt(w.dot(x.cwiseAbs2())); };
  auto ratio = [&](const Eigen::VectorXd &num, const Eigen::VectorXd &den) {
    const double top = l2(num), bottom = l2(den);
    return bottom > 0.0 ? top / bottom : (top > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  };
  return {ratio(ru, lap_u), ratio(rv, lap_v)};
}

} // namespace fountain
