#include "fountain/energy.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "fountain/error.hpp"

namespace fountain {

double temporal_function(int tau, double t, double period) {
  if (tau == 0)
    return 1.0 / std::sqrt(period);
  const int k = (tau + 1) / 2;
  const double arg = 2.0 * std::numbers::pi * k * t / period;
  const double amp = std::sqrt(2.0 / period);
  return tau % 2 == 1 ? amp * std::cos(arg) : amp * std::sin(arg);
}

void EnergyModel::build_grid(int time_nodes) {
  const SplitSpace &sp = *split_;
  const EigenBasis &basis = sp.basis();
  const int n = basis.size();
  const int nt = sp.temporal_functions();
  const int qx = basis.node_count();
  const bool hs = sp.problem() == Problem::HS;
  time_nodes_ = hs ? (time_nodes > 0 ? time_nodes : std::max(4, 4 * nt)) : 1;
  if (hs && time_nodes_ < 2 * nt)
    throw Error(ErrorCode::InvalidArgument, "too few time nodes for the temporal cutoff");
  const int mt = time_nodes_;

  Eigen::MatrixXd tval(mt, nt);
  Eigen::VectorXd tw(mt);
  for (int m = 0; m < mt; ++m) {
    const double t = hs ? sp.period() * m / mt : 0.0;
    tw(m) = hs ? sp.period() / mt : 1.0;
    for (int tau = 0; tau < nt; ++tau)
      tval(m, tau) = hs ? temporal_function(tau, t, sp.period()) : 1.0;
  }
  volume_ = basis.domain().measure() * (hs ? sp.period() : 1.0);

  // Grid index q * mt + m; raw index j * nt + tau within each component.
  Eigen::MatrixXd raw(qx * mt, n * nt);
  weights_.resize(qx * mt);
  const Eigen::MatrixXd &phi = basis.values();
  for (int q = 0; q < qx; ++q)
    for (int m = 0; m < mt; ++m) {
      const int row = q * mt + m;
      weights_(row) = basis.quadrature().weights(q) * tw(m);
      for (int j = 0; j < n; ++j)
        for (int tau = 0; tau < nt; ++tau)
          raw(row, j * nt + tau) = phi(q, j) * tval(m, tau);
    }

  const int dim = sp.dimension();
  Eigen::MatrixXd p(dim, dim);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
  for (int i = 0; i < dim; ++i) {
    e(i) = 1.0;
    p.col(i) = sp.point(e).coeffs;
    e(i) = 0.0;
  }
  su_ = raw * p.topRows(n * nt);
  sv_ = raw * p.bottomRows(n * nt);

  signature_.resize(dim);
  signature_.head(sp.minus_count()).setConstant(-1.0);
  signature_.tail(sp.plus_count()).setConstant(1.0);
}

EnergyModel EnergyModel::elliptic(std::shared_ptr<const SplitSpace> split,
                                  ScalarNonlinearity f, ScalarNonlinearity g) {
  if (!split || split->problem() != Problem::ES)
    throw Error(ErrorCode::InvalidArgument, "elliptic model needs an ES split");
  EnergyModel m;
  m.split_ = std::move(split);
  m.f_ = f;
  m.g_ = g;
  m.build_grid(1);
  return m;
}

EnergyModel EnergyModel::hamiltonian(std::shared_ptr<const SplitSpace> split,
                                     HamiltonianDensity density, int time_nodes) {
  if (!split || split->problem() != Problem::HS)
    throw Error(ErrorCode::InvalidArgument, "Hamiltonian model needs an HS split");
  EnergyModel m;
  m.split_ = std::move(split);
  m.density_ = density;
  m.build_grid(time_nodes);
  return m;
}

EnergyModel EnergyModel::dual() const {
  EnergyModel m = *this;
  m.dual_ = !dual_;
  return m;
}

void EnergyModel::check_coords(const Eigen::VectorXd &c) const {
  if (c.size() != dimension())
    throw Error(ErrorCode::SizeMismatch, "coordinate vector does not match the model");
  if (!c.allFinite())
    throw Error(ErrorCode::NonFinite, "non-finite coordinates");
}

EnergyModel::Fields EnergyModel::fields(const Eigen::VectorXd &c) const {
  check_coords(c);
  return {su_ * c, sv_ * c};
}

double EnergyModel::density_sum(const Fields &fl) const {
  double acc = 0.0;
  if (problem() == Problem::ES) {
    for (int i = 0; i < grid_size(); ++i)
      acc += weights_(i) * (f_.F(fl.u(i)) + g_.F(fl.v(i)));
  } else {
    for (int i = 0; i < grid_size(); ++i)
      acc += weights_(i) * density_.H(std::hypot(fl.u(i), fl.v(i)));
  }
  return acc;
}

void EnergyModel::nonlinear_field(const Fields &fl, Eigen::VectorXd &hu,
                                  Eigen::VectorXd &hv) const {
  const int q = grid_size();
  hu.resize(q);
  hv.resize(q);
  if (problem() == Problem::ES) {
    for (int i = 0; i < q; ++i) {
      hu(i) = weights_(i) * f_.f(fl.u(i));
      hv(i) = weights_(i) * g_.f(fl.v(i));
    }
  } else {
    for (int i = 0; i < q; ++i) {
      const double s = weights_(i) * density_.h(std::hypot(fl.u(i), fl.v(i)));
      hu(i) = s * fl.u(i);
      hv(i) = s * fl.v(i);
    }
  }
}

double EnergyModel::quadratic(const Eigen::VectorXd &c) const {
  check_coords(c);
  return 0.5 * c.cwiseAbs2().dot(signature_);
}

double EnergyModel::psi(const Eigen::VectorXd &c) const {
  return density_sum(fields(c));
}

double EnergyModel::phi(const Eigen::VectorXd &c) const {
  const double ps = psi(c);
  return quadratic(c) + (dual_ ? ps : -ps);
}

double EnergyModel::phi_grad(const Eigen::VectorXd &c, Eigen::VectorXd &gradient) const {
  const Fields fl = fields(c);
  Eigen::VectorXd hu, hv;
  nonlinear_field(fl, hu, hv);
  const Eigen::VectorXd gpsi = su_.transpose() * hu + sv_.transpose() * hv;
  const double ps = density_sum(fl);
  const Eigen::VectorXd lin = signature_.cwiseProduct(c);
  gradient = dual_ ? Eigen::VectorXd(lin + gpsi) : Eigen::VectorXd(lin - gpsi);
  return 0.5 * c.cwiseAbs2().dot(signature_) + (dual_ ? ps : -ps);
}

Eigen::VectorXd EnergyModel::grad(const Eigen::VectorXd &c) const {
  Eigen::VectorXd g;
  phi_grad(c, g);
  return g;
}

namespace {

/// S * B where columns of B that are coordinate unit vectors are copied
/// instead of multiplied; the peak and geometry bases are mostly such columns.
Eigen::MatrixXd apply_basis(const Eigen::MatrixXd &s, const Eigen::MatrixXd &basis) {
  const int m = static_cast<int>(basis.cols());
  Eigen::MatrixXd out(s.rows(), m);
  std::vector<int> dense;
  for (int j = 0; j < m; ++j) {
    int hit = -1, nonzero = 0;
    for (int i = 0; i < basis.rows(); ++i)
      if (basis(i, j) != 0.0) {
        ++nonzero;
        hit = i;
      }
    if (nonzero == 1 && basis(hit, j) == 1.0)
      out.col(j) = s.col(hit);
    else
      dense.push_back(j);
  }
  if (!dense.empty()) {
    Eigen::MatrixXd cols(basis.rows(), dense.size());
    for (size_t j = 0; j < dense.size(); ++j)
      cols.col(j) = basis.col(dense[j]);
    const Eigen::MatrixXd prod = s * cols;
    for (size_t j = 0; j < dense.size(); ++j)
      out.col(dense[j]) = prod.col(j);
  }
  return out;
}

/// sum_i d_i a_i a_i^T over the rows a_i of A; a symmetric rank update when
/// all weights are nonnegative.
void add_gram(Eigen::MatrixXd &acc, const Eigen::MatrixXd &a, const Eigen::VectorXd &d) {
  if ((d.array() >= 0.0).all()) {
    const Eigen::MatrixXd scaled = d.cwiseSqrt().asDiagonal() * a;
    acc.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose());
  } else {
    acc.triangularView<Eigen::Lower>() += a.transpose() * (d.asDiagonal() * a);
  }
}

} // namespace

Eigen::MatrixXd EnergyModel::hessian_restricted(const Eigen::VectorXd &c,
                                                const Eigen::MatrixXd &basis) const {
  const Fields fl = fields(c);
  if (basis.rows() != dimension())
    throw Error(ErrorCode::SizeMismatch, "restriction basis has the wrong row count");
  const Eigen::MatrixXd bu = apply_basis(su_, basis);
  const Eigen::MatrixXd bv = apply_basis(sv_, basis);
  const int q = grid_size();
  const int m = static_cast<int>(basis.cols());
  // Only the lower triangle of `second` is accumulated.
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(m, m);
  if (problem() == Problem::ES) {
    Eigen::VectorXd du(q), dv(q);
    for (int i = 0; i < q; ++i) {
      du(i) = weights_(i) * f_.df(fl.u(i));
      dv(i) = weights_(i) * g_.df(fl.v(i));
    }
    add_gram(second, bu, du);
    add_gram(second, bv, dv);
  } else {
    // h I + (h'/r) z z^T has eigenvalues h + h' r along z and h across it.
    Eigen::VectorXd along(q), across(q), cu(q), cv(q);
    for (int i = 0; i < q; ++i) {
      const double r = std::hypot(fl.u(i), fl.v(i));
      const double h = density_.h(r);
      across(i) = weights_(i) * h;
      along(i) = r > 0.0 ? weights_(i) * (h + density_.dh(r) * r) : across(i);
      cu(i) = r > 0.0 ? fl.u(i) / r : 1.0;
      cv(i) = r > 0.0 ? fl.v(i) / r : 0.0;
    }
    const Eigen::MatrixXd ra = cu.asDiagonal() * bu + cv.asDiagonal() * bv;
    const Eigen::MatrixXd rc = cv.asDiagonal() * bu - cu.asDiagonal() * bv;
    add_gram(second, ra, along);
    add_gram(second, rc, across);
  }
  second.triangularView<Eigen::StrictlyUpper>() = second.transpose();
  Eigen::MatrixXd hess = basis.transpose() * signature_.asDiagonal() * basis;
  if (dual_)
    hess += second;
  else
    hess -= second;
  return 0.5 * (hess + hess.transpose());
}

Eigen::MatrixXd EnergyModel::hessian(const Eigen::VectorXd &c) const {
  return hessian_restricted(c, Eigen::MatrixXd::Identity(dimension(), dimension()));
}

double EnergyModel::cerami(const Eigen::VectorXd &c) const {
  return (1.0 + c.norm()) * grad(c).norm();
}

double EnergyModel::h_tilde_integral(const Eigen::VectorXd &c) const {
  const Fields fl = fields(c);
  double acc = 0.0;
  if (problem() == Problem::ES) {
    for (int i = 0; i < grid_size(); ++i) {
      const double u = fl.u(i), v = fl.v(i);
      acc += weights_(i) * (0.5 * f_.f(u) * u - f_.F(u) + 0.5 * g_.f(v) * v - g_.F(v));
    }
  } else {
    for (int i = 0; i < grid_size(); ++i)
      acc += weights_(i) * density_.H_tilde(std::hypot(fl.u(i), fl.v(i)));
  }
  return acc;
}

double EnergyModel::eval_phi(const ProductPoint &z) const {
  return phi(split_->coords(z));
}

double EnergyModel::eval_psi(const ProductPoint &z) const {
  return psi(split_->coords(z));
}

ProductPoint EnergyModel::grad_phi(const ProductPoint &z) const {
  return split_->point(grad(split_->coords(z)));
}

double EnergyModel::cerami_measure(const ProductPoint &z) const {
  return cerami(split_->coords(z));
}

Eigen::MatrixXd grid_fields(const EnergyModel &model, const ProductPoint &z) {
  const Eigen::VectorXd c = model.split().coords(z);
  Eigen::MatrixXd out(model.grid_size(), 2);
  out.col(0) = model.synthesis(0) * c;
  out.col(1) = model.synthesis(1) * c;
  return out;
}

} // namespace fountain
