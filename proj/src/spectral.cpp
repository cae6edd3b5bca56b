#include "fountain/spectral.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss.hpp>

#include "fountain/error.hpp"

namespace fountain {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kPanelOrder = 20;

std::uint64_t fnv_mix(std::uint64_t h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xffu;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Composite Gauss-Legendre rule on [0, length] with `panels` panels.
void panel_rule(double length, int panels, std::vector<double> &x,
                std::vector<double> &w) {
  using rule = boost::math::quadrature::gauss<double, kPanelOrder>;
  const auto &abs = rule::abscissa();
  const auto &wts = rule::weights();
  std::vector<double> ref_x, ref_w;
  for (int i = static_cast<int>(abs.size()) - 1; i >= 0; --i) {
    ref_x.push_back(-abs[i]);
    ref_w.push_back(wts[i]);
  }
  for (std::size_t i = 0; i < abs.size(); ++i) {
    ref_x.push_back(abs[i]);
    ref_w.push_back(wts[i]);
  }
  const double h = length / panels;
  x.clear();
  w.clear();
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * h;
    for (std::size_t i = 0; i < ref_x.size(); ++i) {
      x.push_back(mid + 0.5 * h * ref_x[i]);
      w.push_back(0.5 * h * ref_w[i]);
    }
  }
}

int panels_for(int highest_index, int oversampling) {
  const int want = oversampling * std::max(highest_index, 1);
  return std::max(1, (want + kPanelOrder - 1) / kPanelOrder);
}

void require_same_basis(const EigenBasis &basis, const CoeffVec &u) {
  if (u.basis != basis.id())
    throw Error(ErrorCode::BasisMismatch,
                "coefficient vector belongs to a different basis");
  if (u.a.size() != basis.size())
    throw Error(ErrorCode::SizeMismatch, "coefficient length does not match basis");
}

void require_finite(const Eigen::VectorXd &v) {
  if (!v.allFinite())
    throw Error(ErrorCode::NonFinite, "non-finite coefficients");
}

} // namespace

std::string to_string(DomainKind kind) {
  return kind == DomainKind::Interval ? "interval" : "rectangle";
}

DomainKind domain_kind_from_string(const std::string &name) {
  if (name == "interval")
    return DomainKind::Interval;
  if (name == "rectangle")
    return DomainKind::Rectangle;
  throw Error(ErrorCode::UnsupportedDomain, "unsupported domain kind '" + name + "'");
}

DomainSpec DomainSpec::interval(double length) {
  DomainSpec d{DomainKind::Interval, {length, 0.0}};
  d.validate();
  return d;
}

DomainSpec DomainSpec::rectangle(double lx, double ly) {
  DomainSpec d{DomainKind::Rectangle, {lx, ly}};
  d.validate();
  return d;
}

double DomainSpec::measure() const {
  return kind == DomainKind::Interval ? lengths[0] : lengths[0] * lengths[1];
}

void DomainSpec::validate() const {
  if (kind != DomainKind::Interval && kind != DomainKind::Rectangle)
    throw Error(ErrorCode::UnsupportedDomain, "unsupported domain kind");
  for (int d = 0; d < dimension(); ++d)
    if (!(lengths[d] > 0.0) || !std::isfinite(lengths[d]))
      throw Error(ErrorCode::InvalidArgument, "domain lengths must be positive");
}

double dirichlet_eigenvalue(const DomainSpec &domain, const ModeIndex &index) {
  double lam = 0.0;
  for (int d = 0; d < domain.dimension(); ++d) {
    const double w = index[d] * kPi / domain.lengths[d];
    lam += w * w;
  }
  return lam;
}

double dirichlet_eigenfunction(const DomainSpec &domain, const ModeIndex &index,
                               std::span<const double> x) {
  double v = 1.0;
  for (int d = 0; d < domain.dimension(); ++d) {
    const double l = domain.lengths[d];
    v *= std::sqrt(2.0 / l) * std::sin(index[d] * kPi * x[d] / l);
  }
  return v;
}

EigenBasis build_basis(const DomainSpec &domain, int modes, int oversampling) {
  domain.validate();
  if (modes < 1)
    throw Error(ErrorCode::InvalidArgument, "mode count must be at least 1");
  if (oversampling < 4)
    throw Error(ErrorCode::InvalidArgument, "oversampling factor must be at least 4");

  struct Candidate {
    double lambda;
    ModeIndex index;
  };
  std::vector<Candidate> cand;
  if (domain.kind == DomainKind::Interval) {
    for (int j = 1; j <= modes; ++j)
      cand.push_back({dirichlet_eigenvalue(domain, {j, 0}), {j, 0}});
  } else {
    for (int j = 1; j <= modes; ++j)
      for (int k = 1; k <= modes; ++k)
        cand.push_back({dirichlet_eigenvalue(domain, {j, k}), {j, k}});
  }
  std::sort(cand.begin(), cand.end(),
            [](const Candidate &a, const Candidate &b) { return a.lambda < b.lambda; });
  // Near-equal eigenvalues form a tie group ordered by index tuple.
  for (std::size_t g = 0; g < cand.size();) {
    std::size_t e = g + 1;
    while (e < cand.size() &&
           cand[e].lambda - cand[g].lambda <= 1e-12 * cand[g].lambda)
      ++e;
    std::sort(cand.begin() + g, cand.begin() + e,
              [](const Candidate &a, const Candidate &b) { return a.index < b.index; });
    g = e;
  }
  cand.resize(modes);

  EigenBasis basis;
  basis.domain_ = domain;
  basis.oversampling_ = oversampling;
  basis.lambda_.resize(modes);
  for (int j = 0; j < modes; ++j) {
    basis.lambda_(j) = cand[j].lambda;
    basis.index_.push_back(cand[j].index);
  }

  const int dim = domain.dimension();
  std::array<std::vector<double>, 2> gx, gw;
  for (int d = 0; d < dim; ++d) {
    int highest = 0;
    for (const auto &c : basis.index_)
      highest = std::max(highest, c[d]);
    panel_rule(domain.lengths[d], panels_for(highest, oversampling), gx[d], gw[d]);
  }
  if (dim == 1) {
    const int q = static_cast<int>(gx[0].size());
    basis.quad_.nodes.resize(1, q);
    basis.quad_.weights.resize(q);
    for (int i = 0; i < q; ++i) {
      basis.quad_.nodes(0, i) = gx[0][i];
      basis.quad_.weights(i) = gw[0][i];
    }
  } else {
    const int qx = static_cast<int>(gx[0].size());
    const int qy = static_cast<int>(gx[1].size());
    basis.quad_.nodes.resize(2, qx * qy);
    basis.quad_.weights.resize(qx * qy);
    for (int i = 0; i < qx; ++i)
      for (int k = 0; k < qy; ++k) {
        const int q = i * qy + k;
        basis.quad_.nodes(0, q) = gx[0][i];
        basis.quad_.nodes(1, q) = gx[1][k];
        basis.quad_.weights(q) = gw[0][i] * gw[1][k];
      }
  }

  const int q = static_cast<int>(basis.quad_.weights.size());
  basis.phi_.resize(q, modes);
  for (int j = 0; j < modes; ++j)
    for (int i = 0; i < q; ++i) {
      const double x[2] = {basis.quad_.nodes(0, i),
                           dim == 2 ? basis.quad_.nodes(1, i) : 0.0};
      basis.phi_(i, j) = dirichlet_eigenfunction(domain, basis.index_[j], x);
    }

  std::uint64_t h = 0xcbf29ce484222325ULL;
  h = fnv_mix(h, static_cast<std::uint64_t>(domain.kind));
  h = fnv_mix(h, std::bit_cast<std::uint64_t>(domain.lengths[0]));
  h = fnv_mix(h, std::bit_cast<std::uint64_t>(domain.lengths[1]));
  h = fnv_mix(h, static_cast<std::uint64_t>(modes));
  h = fnv_mix(h, static_cast<std::uint64_t>(oversampling));
  basis.id_ = h;
  return basis;
}

CoeffVec zero_coeff(const EigenBasis &basis) {
  return {basis.id(), Eigen::VectorXd::Zero(basis.size())};
}

CoeffVec unit_coeff(const EigenBasis &basis, int j) {
  if (j < 0 || j >= basis.size())
    throw Error(ErrorCode::OutOfRange, "mode index out of range");
  CoeffVec e = zero_coeff(basis);
  e.a(j) = 1.0;
  return e;
}

CoeffVec apply_fractional(const EigenBasis &basis, double s, const CoeffVec &u) {
  require_same_basis(basis, u);
  require_finite(u.a);
  CoeffVec out{u.basis, u.a};
  for (int j = 0; j < basis.size(); ++j)
    out.a(j) *= std::pow(basis.eigenvalue(j), 0.5 * s);
  return out;
}

double es_inner(const EigenBasis &basis, double s, const CoeffVec &u,
                const CoeffVec &v) {
  require_same_basis(basis, u);
  require_same_basis(basis, v);
  double acc = 0.0;
  for (int j = 0; j < basis.size(); ++j)
    acc += std::pow(basis.eigenvalue(j), s) * u.a(j) * v.a(j);
  return acc;
}

double es_norm(const EigenBasis &basis, double s, const CoeffVec &u) {
  return std::sqrt(es_inner(basis, s, u, u));
}

GridFn synthesize(const EigenBasis &basis, const CoeffVec &u) {
  require_same_basis(basis, u);
  return {basis.values() * u.a};
}

CoeffVec analyze(const EigenBasis &basis, const GridFn &g) {
  if (g.values.size() != basis.node_count())
    throw Error(ErrorCode::SizeMismatch, "grid function length does not match basis grid");
  return {basis.id(),
          basis.values().transpose() *
              g.values.cwiseProduct(basis.quadrature().weights)};
}

double lebesgue_norm(const EigenBasis &basis, const GridFn &g, double r) {
  if (g.values.size() != basis.node_count())
    throw Error(ErrorCode::SizeMismatch, "grid function length does not match basis grid");
  if (!(r >= 1.0))
    throw Error(ErrorCode::InvalidArgument, "Lebesgue exponent must be >= 1");
  const auto &w = basis.quadrature().weights;
  double acc = 0.0;
  for (int i = 0; i < g.values.size(); ++i)
    acc += w(i) * std::pow(std::abs(g.values(i)), r);
  return std::pow(acc, 1.0 / r);
}

SphereSupResult lr_sphere_sup(std::span<const Eigen::MatrixXd> components,
                              const Eigen::VectorXd &weights, double r,
                              const EmbeddingOptions &options) {
  if (components.empty())
    throw Error(ErrorCode::InvalidArgument, "no field components");
  if (!(r >= 2.0))
    throw Error(ErrorCode::InvalidArgument, "Lebesgue exponent must be >= 2");
  const Eigen::Index m = components[0].cols();
  if (m == 0)
    throw Error(ErrorCode::EmptyTail, "empty subspace");
  for (const auto &c : components)
    if (c.cols() != m || c.rows() != weights.size())
      throw Error(ErrorCode::SizeMismatch, "inconsistent field components");

  const std::size_t ncomp = components.size();
  std::vector<Eigen::VectorXd> field(ncomp);
  Eigen::VectorXd mag(weights.size());

  auto objective = [&](const Eigen::VectorXd &c) {
    mag.setZero();
    for (std::size_t k = 0; k < ncomp; ++k) {
      field[k] = components[k] * c;
      mag += field[k].cwiseAbs2();
    }
    double acc = 0.0;
    for (Eigen::Index i = 0; i < mag.size(); ++i)
      acc += weights(i) * std::pow(mag(i), 0.5 * r);
    return acc;
  };
  // Gradient direction of J at the point whose fields were last evaluated.
  auto ascent = [&]() {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd scale(mag.size());
    for (Eigen::Index i = 0; i < mag.size(); ++i)
      scale(i) = weights(i) * std::pow(mag(i), 0.5 * r - 1.0);
    for (std::size_t k = 0; k < ncomp; ++k)
      g += components[k].transpose() * field[k].cwiseProduct(scale);
    return g;
  };

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  SphereSupResult best;
  best.value = -1.0;
  for (int start = 0; start < std::max(1, options.starts); ++start) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(m);
    if (start == 0) {
      c(0) = 1.0;
    } else {
      for (Eigen::Index i = 0; i < m; ++i)
        c(i) = gauss(rng);
      c.normalize();
    }
    double val = objective(c);
    double omega = 2.0;
    for (int it = 0; it < options.max_iterations; ++it) {
      ++best.iterations;
      Eigen::VectorXd g = ascent();
      const double gn = g.norm();
      if (!(gn > 0.0))
        break;
      Eigen::VectorXd next = g / gn;
      // Over-relaxed trial along the fixed-point step; kept only if it does
      // better than the plain step, so monotonicity is preserved.
      const Eigen::VectorXd relaxed = (c + omega * (next - c)).normalized();
      const double rv = objective(relaxed);
      double nv = objective(next);
      if (rv > nv) {
        next = relaxed;
        nv = objective(next);
        omega = std::min(2.0 * omega, 64.0);
      } else {
        omega = std::max(0.5 * omega, 2.0);
      }
      if (!(nv > val)) {
        objective(c);
        break;
      }
      const double gain = nv - val;
      c = std::move(next);
      val = nv;
      if (gain <= options.rel_tol * val)
        break;
    }
    const double norm = std::pow(val, 1.0 / r);
    if (norm > best.value) {
      best.value = norm;
      best.coords = c;
      best.best_start = start;
    }
  }
  return best;
}

EmbeddingEstimate embedding_constant(const EigenBasis &basis, double s, double r,
                                     int k, const EmbeddingOptions &options) {
  if (k < 0 || k >= basis.size())
    throw Error(ErrorCode::EmptyTail, "tail subspace is empty under the truncation");
  const int m = basis.size() - k;
  // Columns are the s-normalized tail modes lambda_j^(-s/2) phi_j.
  Eigen::MatrixXd cols = basis.values().rightCols(m);
  for (int i = 0; i < m; ++i)
    cols.col(i) *= std::pow(basis.eigenvalue(k + i), -0.5 * s);
  const std::array<Eigen::MatrixXd, 1> comps{std::move(cols)};
  const SphereSupResult sup =
      lr_sphere_sup(comps, basis.quadrature().weights, r, options);

  EmbeddingEstimate est;
  est.beta = sup.value;
  est.best_start = sup.best_start;
  est.iterations = sup.iterations;
  est.maximizer = zero_coeff(basis);
  for (int i = 0; i < m; ++i)
    est.maximizer.a(k + i) = sup.coords(i) * std::pow(basis.eigenvalue(k + i), -0.5 * s);
  return est;
}

} // namespace fountain
