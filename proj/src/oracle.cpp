#include "fountain/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>

#include "fountain/error.hpp"

namespace fountain {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kDenseCap = 2000;

struct State {
  double u, w; // u and u'
};

State rhs(const State &s, double p) {
  const double a = std::abs(s.u);
  return {s.w, a == 0.0 ? 0.0 : -std::pow(a, p - 2.0) * s.u};
}

State rk4_step(const State &s, double h, double p) {
  const State k1 = rhs(s, p);
  const State k2 = rhs({s.u + 0.5 * h * k1.u, s.w + 0.5 * h * k1.w}, p);
  const State k3 = rhs({s.u + 0.5 * h * k2.u, s.w + 0.5 * h * k2.w}, p);
  const State k4 = rhs({s.u + h * k3.u, s.w + h * k3.w}, p);
  return {s.u + h / 6.0 * (k1.u + 2 * k2.u + 2 * k3.u + k4.u),
          s.w + h / 6.0 * (k1.w + 2 * k2.w + 2 * k3.w + k4.w)};
}

// First positive zero of the trajectory with u'(0) = slope, searched on
// (0, limit]. Located inside the bracketing step by cubic Hermite
// interpolation and bisection.
std::optional<double> first_zero(double slope, double p, double h, double limit) {
  State s{0.0, slope};
  double x = 0.0;
  while (x < limit) {
    const State n = rk4_step(s, h, p);
    if (n.u <= 0.0) {
      const State d0 = rhs(s, p), d1 = rhs(n, p);
      auto hermite = [&](double t) {
        const double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * s.u + (t3 - 2 * t2 + t) * h * d0.u +
               (-2 * t3 + 3 * t2) * n.u + (t3 - t2) * h * d1.u;
      };
      double lo = 0.0, hi = 1.0;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (hermite(mid) > 0.0 ? lo : hi) = mid;
      }
      return x + 0.5 * (lo + hi) * h;
    }
    s = n;
    x += h;
  }
  return std::nullopt;
}

double closed_form_lambda(const DomainSpec &domain, const ModeIndex &idx) {
  double lam = 0.0;
  for (int d = 0; d < domain.dimension(); ++d) {
    const double w = idx[d] * kPi / domain.lengths[d];
    lam += w * w;
  }
  return lam;
}

// L on the raw basis {phi_j(x) T_tau(t)}: (Lz)_u = -v_t + S v, (Lz)_v = u_t + S u.
// d/dt maps cos_k to -w sin_k and sin_k to w cos_k.
Eigen::MatrixXd assemble_hs(const DomainSpec &domain, const std::vector<ModeIndex> &modes,
                            double shift, double period, int cutoff) {
  const int n = static_cast<int>(modes.size());
  const int nt = 2 * cutoff + 1;
  const int half = n * nt;
  if (2 * half > kDenseCap)
    throw Error(ErrorCode::SizeCap, "dense operator check is capped at 2000 dof");
  Eigen::MatrixXd dt = Eigen::MatrixXd::Zero(nt, nt);
  for (int k = 1; k <= cutoff; ++k) {
    const double w = 2.0 * kPi * k / period;
    dt(2 * k, 2 * k - 1) = -w;
    dt(2 * k - 1, 2 * k) = w;
  }
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(2 * half, 2 * half);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(nt, nt);
  for (int j = 0; j < n; ++j) {
    const double sigma = closed_form_lambda(domain, modes[j]) + shift;
    const int o = j * nt;
    l.block(o, half + o, nt, nt) = sigma * id - dt;
    l.block(half + o, o, nt, nt) = sigma * id + dt;
  }
  return l;
}

} // namespace

ShootingResult shooting_ground_state(double p, double length, int steps) {
  if (!(p > 2.0))
    throw Error(ErrorCode::InvalidArgument, "shooting needs p > 2 (p = 2 is linear resonance)");
  if (!(length > 0.0))
    throw Error(ErrorCode::InvalidArgument, "interval length must be positive");
  if (steps < 100)
    throw Error(ErrorCode::InvalidArgument, "too few integration steps");
  const double h = length / steps;
  const double limit = 2.0 * length;

  // The first zero moves left as the slope grows.
  auto too_short = [&](double a) {
    const auto z = first_zero(a, p, h, limit);
    return z && *z < length;
  };
  double lo = 1.0, hi = 1.0;
  int guard = 0;
  while (too_short(lo)) {
    lo *= 0.5;
    if (++guard > 200)
      throw Error(ErrorCode::Bracketing, "no slope with first zero beyond the interval");
  }
  guard = 0;
  while (!too_short(hi)) {
    hi *= 2.0;
    if (++guard > 200)
      throw Error(ErrorCode::Bracketing, "no slope with first zero inside the interval");
  }
  ShootingResult res;
  res.p = p;
  res.length = length;
  while (hi - lo > 1e-12 * hi && res.bisection_steps < 200) {
    const double mid = 0.5 * (lo + hi);
    (too_short(mid) ? hi : lo) = mid;
    ++res.bisection_steps;
  }
  res.slope = 0.5 * (lo + hi);

  State s{0.0, res.slope};
  std::vector<double> du(steps + 1);
  res.x.resize(steps + 1);
  res.u.resize(steps + 1);
  for (int i = 0; i <= steps; ++i) {
    res.x[i] = i * h;
    res.u[i] = s.u;
    du[i] = s.w;
    if (i < steps)
      s = rk4_step(s, h, p);
  }
  res.boundary_residual = std::max(std::abs(res.u[0]), std::abs(res.u[steps]));

  // Composite Simpson for even step counts, trapezoid otherwise.
  auto integrand = [&](int i) {
    return 0.5 * du[i] * du[i] - std::pow(std::abs(res.u[i]), p) / p;
  };
  double acc = 0.0;
  if (steps % 2 == 0) {
    acc = integrand(0) + integrand(steps);
    for (int i = 1; i < steps; ++i)
      acc += (i % 2 == 1 ? 4.0 : 2.0) * integrand(i);
    acc *= h / 3.0;
  } else {
    for (int i = 0; i < steps; ++i)
      acc += 0.5 * h * (integrand(i) + integrand(i + 1));
  }
  res.energy = acc;
  return res;
}

ProductPoint fd_gradient(const EnergyModel &model, const ProductPoint &z, double h) {
  if (!(h > 0.0))
    throw Error(ErrorCode::InvalidArgument, "finite-difference step must be positive");
  const Eigen::VectorXd c = model.split().coords(z);
  Eigen::VectorXd g(c.size());
  Eigen::VectorXd cp = c, cm = c;
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    cp(i) = c(i) + h;
    cm(i) = c(i) - h;
    g(i) = (model.phi(cp) - model.phi(cm)) / (2.0 * h);
    cp(i) = c(i);
    cm(i) = c(i);
  }
  return model.split().point(g);
}

Eigen::VectorXd dense_hs_spectrum(const DomainSpec &domain,
                                  const std::vector<ModeIndex> &modes, double shift,
                                  double period, int cutoff) {
  const Eigen::MatrixXd l = assemble_hs(domain, modes, shift, period, cutoff);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd ev = es.eigenvalues();
  if (ev.cwiseAbs().minCoeff() <= 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff()))
    throw AssumptionError("V2", "0 is an eigenvalue of the assembled operator");
  return ev;
}

DenseSpectrum dense_operator_check(const SplitSpace &split) {
  const int dof = split.dimension();
  if (dof > kDenseCap)
    throw Error(ErrorCode::SizeCap, "dense operator check is capped at 2000 dof");
  const auto &basis = split.basis();
  const auto &dom = basis.domain();
  const int n = basis.size();
  DenseSpectrum out;
  out.dof = dof;

  Eigen::MatrixXd op = Eigen::MatrixXd::Zero(dof, dof);
  Eigen::VectorXd metric(dof);
  std::vector<double> predicted;

  if (split.problem() == Problem::HS) {
    op = assemble_hs(dom, basis.indices(), split.potential_shift(), split.period(),
                     split.temporal_cutoff());
    for (int j = 0; j < n; ++j) {
      const double sigma = closed_form_lambda(dom, basis.indices()[j]) + split.potential_shift();
      for (int k = 0; k <= split.temporal_cutoff(); ++k) {
        const double mu = std::hypot(sigma, 2.0 * kPi * k / split.period());
        for (int rep = 0; rep < (k == 0 ? 1 : 2); ++rep) {
          predicted.push_back(mu);
          predicted.push_back(-mu);
        }
      }
    }
    metric.setOnes();
  } else {
    // Sum_j lambda_j a_j b_j = 1/2 z^T M z against the metric diag(lambda^s, lambda^t).
    for (int j = 0; j < n; ++j) {
      const double lam = closed_form_lambda(dom, basis.indices()[j]);
      op(j, n + j) = lam;
      op(n + j, j) = lam;
      metric(j) = std::pow(lam, split.s());
      metric(n + j) = std::pow(lam, split.t());
      predicted.push_back(1.0);
      predicted.push_back(-1.0);
    }
  }

  // Symmetric scaling turns the generalized problem into a standard one.
  const Eigen::VectorXd isq = metric.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd scaled = isq.asDiagonal() * op * isq.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(scaled);
  out.eigenvalues = es.eigenvalues();
  std::sort(predicted.begin(), predicted.end());
  out.predicted = Eigen::Map<const Eigen::VectorXd>(predicted.data(), predicted.size());
  out.max_mismatch = (out.eigenvalues - out.predicted).cwiseAbs().maxCoeff();
  out.min_abs = out.eigenvalues.cwiseAbs().minCoeff();

  if (split.problem() == Problem::HS) {
    // The X metric is the form of |L|.
    const Eigen::MatrixXd absl = es.eigenvectors() * out.eigenvalues.cwiseAbs().asDiagonal() *
                                 es.eigenvectors().transpose();
    out.weight_mismatch =
        (absl - Eigen::MatrixXd(split.metric_weights().asDiagonal())).cwiseAbs().maxCoeff();
  } else {
    out.weight_mismatch = (metric - split.metric_weights()).cwiseAbs().maxCoeff() /
                          metric.cwiseAbs().maxCoeff();
  }

  // Unit split directions d satisfy op d = +-(metric weight form) d.
  double resid = 0.0;
  for (int sign = 0; sign < 2; ++sign) {
    const bool positive = sign == 1;
    const int count = positive ? split.plus_count() : split.minus_count();
    for (int i = 0; i < count; ++i) {
      const Eigen::VectorXd d = split.direction_point(positive, i).coeffs;
      const Eigen::VectorXd md = metric.asDiagonal() * d;
      const Eigen::VectorXd lhs = op * d;
      Eigen::VectorXd target;
      if (split.problem() == Problem::HS) {
        const double mu = positive ? split.plus()[i].mu : -split.minus()[i].mu;
        target = mu * d;
      } else {
        target = (positive ? 1.0 : -1.0) * md;
      }
      resid = std::max(resid, (lhs - target).cwiseAbs().maxCoeff());
    }
  }
  out.direction_residual = resid;
  return out;
}

BruteEmbedding brute_embedding(const EigenBasis &basis, double s, double r, int k,
                               int samples, std::uint64_t seed) {
  const int n = basis.size();
  if (k < 0 || k >= n)
    throw Error(ErrorCode::EmptyTail, "tail subspace is empty under the truncation");
  if (!(r >= 2.0))
    throw Error(ErrorCode::InvalidArgument, "Lebesgue exponent must be >= 2");
  const DomainSpec &dom = basis.domain();
  const int dim = dom.dimension();

  // Midpoint grid with 32 points per unit of the highest frequency.
  std::array<int, 2> highest{1, 1};
  for (const auto &idx : basis.indices())
    for (int d = 0; d < dim; ++d)
      highest[d] = std::max(highest[d], idx[d]);
  std::array<std::vector<double>, 2> xs;
  double cell = 1.0;
  for (int d = 0; d < dim; ++d) {
    const int m = 32 * highest[d];
    const double h = dom.lengths[d] / m;
    cell *= h;
    for (int i = 0; i < m; ++i)
      xs[d].push_back((i + 0.5) * h);
  }
  const int gx = static_cast<int>(xs[0].size());
  const int gy = dim == 2 ? static_cast<int>(xs[1].size()) : 1;

  const int m = n - k;
  Eigen::MatrixXd cols(gx * gy, m);
  for (int c = 0; c < m; ++c) {
    const ModeIndex &idx = basis.indices()[k + c];
    const double scale = std::pow(closed_form_lambda(dom, idx), -0.5 * s);
    for (int i = 0; i < gx; ++i)
      for (int j = 0; j < gy; ++j) {
        double v = std::sqrt(2.0 / dom.lengths[0]) * std::sin(idx[0] * kPi * xs[0][i] / dom.lengths[0]);
        if (dim == 2)
          v *= std::sqrt(2.0 / dom.lengths[1]) * std::sin(idx[1] * kPi * xs[1][j] / dom.lengths[1]);
        cols(i * gy + j, c) = scale * v;
      }
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, m - 1);
  std::uniform_int_distribution<int> support(1, std::min(4, m));
  BruteEmbedding out;
  out.samples = samples;
  Eigen::VectorXd coef(m);
  for (int it = 0; it < samples; ++it) {
    coef.setZero();
    const int sz = support(rng);
    for (int j = 0; j < sz; ++j)
      coef(pick(rng)) = gauss(rng);
    const double nrm = coef.norm();
    if (!(nrm > 0.0))
      continue;
    coef /= nrm;
    const Eigen::VectorXd w = cols * coef;
    double acc = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i)
      acc += std::pow(std::abs(w(i)), r);
    out.beta = std::max(out.beta, std::pow(acc * cell, 1.0 / r));
  }
  return out;
}

} // namespace fountain
