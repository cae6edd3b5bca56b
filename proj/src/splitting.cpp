#include "fountain/splitting.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

#include "fountain/error.hpp"

namespace fountain {

namespace {

const double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

bool direction_less(const EigenBasis &basis, const Direction &a, const Direction &b) {
  if (a.mu != b.mu)
    return a.mu < b.mu;
  const auto &ia = basis.indices()[a.space_mode];
  const auto &ib = basis.indices()[b.space_mode];
  return std::tie(ia, a.frequency, a.slot) < std::tie(ib, b.frequency, b.slot);
}

} // namespace

std::string to_string(Problem problem) {
  return problem == Problem::ES ? "ES" : "HS";
}

Problem problem_from_string(const std::string &name) {
  if (name == "ES" || name == "es")
    return Problem::ES;
  if (name == "HS" || name == "hs")
    return Problem::HS;
  throw Error(ErrorCode::InvalidArgument, "unknown problem '" + name + "'");
}

void SplitSpace::finalize() {
  sqrt_weights_ = weights_.cwiseSqrt();
  plus_.clear();
  minus_.clear();
  for (int b = 0; b < static_cast<int>(blocks_.size()); ++b) {
    const auto &blk = blocks_[b];
    for (int slot = 0; slot < static_cast<int>(blk.u_index.size()); ++slot) {
      plus_.push_back({true, b, slot, blk.mu, blk.space_mode, blk.frequency});
      minus_.push_back({false, b, slot, blk.mu, blk.space_mode, blk.frequency});
    }
  }
  const auto less = [this](const Direction &a, const Direction &b) {
    return direction_less(*basis_, a, b);
  };
  std::sort(plus_.begin(), plus_.end(), less);
  std::sort(minus_.begin(), minus_.end(), less);

  plus_pos_.assign(blocks_.size(), {});
  minus_pos_.assign(blocks_.size(), {});
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    plus_pos_[b].assign(blocks_[b].u_index.size(), -1);
    minus_pos_[b].assign(blocks_[b].u_index.size(), -1);
  }
  for (int i = 0; i < plus_count(); ++i)
    plus_pos_[plus_[i].block][plus_[i].slot] = coord_index(true, i);
  for (int i = 0; i < minus_count(); ++i)
    minus_pos_[minus_[i].block][minus_[i].slot] = coord_index(false, i);
}

ProductPoint SplitSpace::zero() const {
  return {problem_, Eigen::VectorXd::Zero(dimension())};
}

void SplitSpace::check(const ProductPoint &z) const {
  if (z.problem != problem_ || z.coeffs.size() != dimension())
    throw Error(ErrorCode::SizeMismatch, "point does not match the split's mode set");
}

Eigen::VectorXd SplitSpace::coords_from_metric(const Eigen::VectorXd &y) const {
  Eigen::VectorXd c(dimension());
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const auto &blk = blocks_[b];
    const int m = static_cast<int>(blk.u_index.size());
    Eigen::VectorXd yu(m), yv(m);
    for (int i = 0; i < m; ++i) {
      yu(i) = y(blk.u_index[i]);
      yv(i) = y(blk.v_index[i]);
    }
    const Eigen::VectorXd ryv = blk.rotation * yv;
    for (int i = 0; i < m; ++i) {
      c(plus_pos_[b][i]) = kInvSqrt2 * (sign_error_ ? yu(i) - ryv(i) : yu(i) + ryv(i));
      c(minus_pos_[b][i]) = kInvSqrt2 * (yu(i) - ryv(i));
    }
  }
  return c;
}

Eigen::VectorXd SplitSpace::metric_from_coords(const Eigen::VectorXd &c) const {
  if (c.size() != dimension())
    throw Error(ErrorCode::SizeMismatch, "coordinate vector has the wrong length");
  Eigen::VectorXd y(dimension());
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const auto &blk = blocks_[b];
    const int m = static_cast<int>(blk.u_index.size());
    Eigen::VectorXd diff(m);
    for (int i = 0; i < m; ++i) {
      const double cp = c(plus_pos_[b][i]);
      const double cm = c(minus_pos_[b][i]);
      y(blk.u_index[i]) = kInvSqrt2 * (cp + cm);
      diff(i) = kInvSqrt2 * (cp - cm);
    }
    const Eigen::VectorXd yv = blk.rotation.transpose() * diff;
    for (int i = 0; i < m; ++i)
      y(blk.v_index[i]) = yv(i);
  }
  return y;
}

Eigen::VectorXd SplitSpace::coords(const ProductPoint &z) const {
  check(z);
  return coords_from_metric(z.coeffs.cwiseProduct(sqrt_weights_));
}

ProductPoint SplitSpace::point(const Eigen::VectorXd &c) const {
  return {problem_, metric_from_coords(c).cwiseQuotient(sqrt_weights_)};
}

ProductPoint SplitSpace::direction_point(bool positive, int i) const {
  const int n = positive ? plus_count() : minus_count();
  if (i < 0 || i >= n)
    throw Error(ErrorCode::OutOfRange, "direction index out of range");
  Eigen::VectorXd c = Eigen::VectorXd::Zero(dimension());
  c(coord_index(positive, i)) = 1.0;
  return point(c);
}

double SplitSpace::inner(const ProductPoint &a, const ProductPoint &b) const {
  check(a);
  check(b);
  return (a.coeffs.cwiseProduct(weights_)).dot(b.coeffs);
}

double SplitSpace::norm(const ProductPoint &z) const {
  return std::sqrt(inner(z, z));
}

SplitSpace build_es_split(std::shared_ptr<const EigenBasis> basis, double s,
                          double t) {
  if (!basis)
    throw Error(ErrorCode::InvalidArgument, "null basis");
  if (std::abs(s + t - 2.0) > 1e-12)
    throw Error(ErrorCode::InvalidArgument, "exponents must satisfy s + t = 2");
  if (!(t > 0.0) || s < t)
    throw Error(ErrorCode::InvalidArgument, "exponents must satisfy s >= t > 0");

  SplitSpace sp;
  sp.problem_ = Problem::ES;
  sp.basis_ = std::move(basis);
  sp.s_ = s;
  sp.t_ = t;
  const int n = sp.basis_->size();
  sp.weights_.resize(2 * n);
  for (int j = 0; j < n; ++j) {
    const double lam = sp.basis_->eigenvalue(j);
    sp.weights_(j) = std::pow(lam, s);
    sp.weights_(n + j) = std::pow(lam, t);
    SplitBlock blk;
    blk.u_index = {j};
    blk.v_index = {n + j};
    blk.rotation = Eigen::MatrixXd::Identity(1, 1);
    blk.mu = std::pow(lam, 0.5 * (s + t));
    blk.space_mode = j;
    sp.blocks_.push_back(std::move(blk));
  }
  sp.finalize();
  return sp;
}

SplitSpace build_hs_split(std::shared_ptr<const EigenBasis> basis, double shift,
                          double period, int cutoff) {
  if (!basis)
    throw Error(ErrorCode::InvalidArgument, "null basis");
  if (cutoff < 0)
    throw Error(ErrorCode::InvalidArgument, "temporal cutoff K must be >= 0");
  if (!(period > 0.0) || !std::isfinite(period))
    throw Error(ErrorCode::InvalidArgument, "period must be positive");
  for (int j = 0; j < basis->size(); ++j) {
    const double sigma = basis->eigenvalue(j) + shift;
    if (std::abs(sigma) <= 1e-12 * std::max(1.0, basis->eigenvalue(j)))
      throw AssumptionError("V2", "0 is an eigenvalue of S = -Laplace + V (mode " +
                                      std::to_string(j) + ")");
  }

  SplitSpace sp;
  sp.problem_ = Problem::HS;
  sp.basis_ = std::move(basis);
  sp.period_ = period;
  sp.shift_ = shift;
  sp.cutoff_ = cutoff;
  const int n = sp.basis_->size();
  const int nt = sp.temporal_functions();
  sp.weights_.resize(2 * n * nt);
  for (int j = 0; j < n; ++j) {
    const double sigma = sp.basis_->eigenvalue(j) + shift;
    for (int k = 0; k <= cutoff; ++k) {
      const double omega = 2.0 * std::numbers::pi * k / period;
      SplitBlock blk;
      blk.space_mode = j;
      blk.frequency = k;
      blk.mu = std::hypot(sigma, omega);
      if (k == 0) {
        blk.u_index = {sp.raw_index(0, j, 0)};
        blk.v_index = {sp.raw_index(1, j, 0)};
        blk.rotation = Eigen::MatrixXd::Constant(1, 1, sigma > 0 ? 1.0 : -1.0);
      } else {
        blk.u_index = {sp.raw_index(0, j, 2 * k - 1), sp.raw_index(0, j, 2 * k)};
        blk.v_index = {sp.raw_index(1, j, 2 * k - 1), sp.raw_index(1, j, 2 * k)};
        // (Lz)_u = B z_v and (Lz)_v = B^T z_u in (cos, sin) coordinates.
        Eigen::MatrixXd b(2, 2);
        b << sigma, -omega, omega, sigma;
        blk.rotation = b / blk.mu;
      }
      for (int i : blk.u_index)
        sp.weights_(i) = blk.mu;
      for (int i : blk.v_index)
        sp.weights_(i) = blk.mu;
      sp.blocks_.push_back(std::move(blk));
    }
  }
  sp.finalize();
  return sp;
}

Projection project_pm(const SplitSpace &split, const ProductPoint &z) {
  const Eigen::VectorXd c = split.coords(z);
  const int nm = split.minus_count();
  Eigen::VectorXd cp = c, cm = c;
  cp.head(nm).setZero();
  cm.tail(split.plus_count()).setZero();
  return {split.point(cp), split.point(cm)};
}

ProductPoint make_es_point(const SplitSpace &split, const CoeffVec &u,
                           const CoeffVec &v) {
  if (split.problem() != Problem::ES)
    throw Error(ErrorCode::InvalidArgument, "not an elliptic-system split");
  const auto &basis = split.basis();
  if (u.basis != basis.id() || v.basis != basis.id())
    throw Error(ErrorCode::BasisMismatch, "component belongs to a different basis");
  ProductPoint z = split.zero();
  z.coeffs.head(basis.size()) = u.a;
  z.coeffs.tail(basis.size()) = v.a;
  return z;
}

CoeffVec es_component(const SplitSpace &split, const ProductPoint &z, int component) {
  split.check(z);
  if (split.problem() != Problem::ES)
    throw Error(ErrorCode::InvalidArgument, "not an elliptic-system split");
  const int n = split.basis().size();
  return {split.basis().id(), z.coeffs.segment(component * n, n)};
}

TauWeights TauWeights::canonical(const SplitSpace &split) {
  TauWeights tw;
  double w = 0.5;
  for (int j = 0; j < split.minus_count(); ++j) {
    tw.order.push_back(j);
    tw.weights.push_back(w);
    w *= 0.5;
  }
  return tw;
}

double tau_norm(const SplitSpace &split, const TauWeights &order,
                const ProductPoint &z) {
  const Eigen::VectorXd c = split.coords(z);
  double weak = 0.0;
  for (std::size_t j = 0; j < order.order.size(); ++j)
    weak += order.weights[j] * std::abs(c(split.coord_index(false, order.order[j])));
  const double strong = c.tail(split.plus_count()).norm();
  return std::max(weak, strong);
}

GalerkinSubspaces galerkin_subspaces(const SplitSpace &split, int k) {
  if (k < 0 || k >= split.plus_count())
    throw Error(ErrorCode::OutOfRange,
                "k must index an existing plus direction (0 <= k < dim X+)");
  GalerkinSubspaces g;
  g.k = k;
  g.lower_begin = 0;
  g.lower_end = split.minus_count() + k + 1;
  g.upper_begin = split.minus_count() + k;
  g.upper_end = split.dimension();
  return g;
}

} // namespace fountain
