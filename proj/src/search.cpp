#include "search.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

#include <boost/math/special_functions/erf.hpp>

namespace fountain::detail {

Eigen::MatrixXd coordinate_columns(int dim, int begin, int end) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(dim, end - begin);
  for (int i = begin; i < end; ++i)
    b(i, i - begin) = 1.0;
  return b;
}

namespace {

Eigen::VectorXd place(Eigen::VectorXd x, double radius, bool ball) {
  const double n = x.norm();
  if (n == 0.0)
    return x;
  if (!ball || n > radius)
    x *= radius / n;
  return x;
}

} // namespace

Extremum constrained_extremum(const EnergyModel &model, const Eigen::MatrixXd &basis,
                              double radius, const ExtremumOptions &options) {
  const int m = static_cast<int>(basis.cols());
  const double sgn = options.maximize ? 1.0 : -1.0;
  auto eval = [&](const Eigen::VectorXd &x, Eigen::VectorXd &gx) {
    Eigen::VectorXd g;
    const double f = model.phi_grad(basis * x, g);
    gx = sgn * (basis.transpose() * g);
    return sgn * f;
  };

  std::vector<Eigen::VectorXd> starts;
  for (const auto &s : options.seeds)
    if (s.size() == m && s.norm() > 0.0)
      starts.push_back(options.ball ? Eigen::VectorXd(s) : Eigen::VectorXd(radius * s.normalized()));
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  for (int i = 0; i < options.starts; ++i) {
    Eigen::VectorXd s(m);
    for (int j = 0; j < m; ++j)
      s(j) = normal(rng);
    // Ball starts spread over radii as well as directions.
    const double scale = options.ball ? radius * (0.25 + 0.75 * (i % 4) / 3.0) : radius;
    starts.push_back(scale * s.normalized());
  }
  if (options.ball)
    starts.push_back(Eigen::VectorXd::Zero(m));

  Extremum best;
  best.value = -std::numeric_limits<double>::infinity();
  int total = 0;
  for (Eigen::VectorXd x : starts) {
    x = place(x, radius, options.ball);
    Eigen::VectorXd g;
    double f = eval(x, g);
    double step = -1.0;
    for (int it = 0; it < options.max_iterations; ++it, ++total) {
      Eigen::VectorXd dir = g;
      const bool on_sphere = !options.ball || x.norm() >= radius * (1.0 - 1e-12);
      if (on_sphere && x.norm() > 0.0 && (!options.ball || g.dot(x) > 0.0))
        dir -= (g.dot(x) / x.squaredNorm()) * x;
      const double dn = dir.norm();
      if (dn <= 1e-9 * (1.0 + g.norm()))
        break;
      if (step < 0.0)
        step = 0.1 * radius / dn;
      bool accepted = false;
      Eigen::VectorXd xn, gn;
      double fn = f;
      while (step * dn > 1e-15 * radius) {
        xn = place(x + step * dir, radius, options.ball);
        fn = eval(xn, gn);
        if (fn > f + 1e-4 * g.dot(xn - x)) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted)
        break;
      const double gain = fn - f;
      // Barzilai-Borwein trial step from the accepted move.
      const Eigen::VectorXd sx = xn - x;
      const double curv = std::abs(sx.dot(gn - g));
      step = curv > 0.0 ? std::min(sx.squaredNorm() / curv, 1e3 * step) : 2.0 * step;
      x = xn;
      g = gn;
      f = fn;
      if (gain <= 1e-12 * (1.0 + std::abs(f)))
        break;
    }
    if (f > best.value) {
      best.value = f;
      best.x = x;
    }
  }
  best.value *= sgn;
  best.iterations = total;
  return best;
}

Peak maximize_on(const EnergyModel &model, const Eigen::MatrixXd &basis,
                 Eigen::VectorXd x, int max_iterations, double tol) {
  Peak out;
  Eigen::VectorXd g;
  double f = model.phi_grad(basis * x, g);
  Eigen::VectorXd gr = basis.transpose() * g;
  int it = 0;
  for (; it < max_iterations; ++it) {
    if (gr.norm() <= tol) {
      out.converged = true;
      break;
    }
    const Eigen::MatrixXd h = model.hessian_restricted(basis * x, basis);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    const Eigen::VectorXd &lam = es.eigenvalues();
    const double floor = std::max(1e-10 * lam.cwiseAbs().maxCoeff(), 1e-300);
    bool newton = true;
    Eigen::VectorXd proj = es.eigenvectors().transpose() * gr;
    for (int i = 0; i < proj.size(); ++i) {
      double nu = lam(i);
      if (nu > -floor) {
        newton = false;
        nu = -std::max(std::abs(nu), floor);
      }
      proj(i) = -proj(i) / nu;
    }
    const Eigen::VectorXd d = es.eigenvectors() * proj;
    const double slope = gr.dot(d);
    bool accepted = false;
    double s = 1.0;
    for (int ls = 0; ls < 60; ++ls, s *= 0.5) {
      const Eigen::VectorXd xn = x + s * d;
      Eigen::VectorXd gn;
      const double fn = model.phi_grad(basis * xn, gn);
      const Eigen::VectorXd grn = basis.transpose() * gn;
      // At roundoff level in Phi a full Newton step is judged by the gradient.
      const bool gradient_drop = newton && ls == 0 && grn.norm() < 0.5 * gr.norm();
      if (std::isfinite(fn) && (fn >= f + 1e-4 * s * slope || gradient_drop)) {
        x = xn;
        f = fn;
        g = gn;
        gr = grn;
        accepted = true;
        break;
      }
    }
    if (!accepted)
      break;
  }
  out.converged = out.converged || gr.norm() <= tol;
  out.x = std::move(x);
  out.value = f;
  out.grad = std::move(g);
  out.iterations = it;
  return out;
}

double best_scale(const EnergyModel &model, const Eigen::VectorXd &direction) {
  auto phi = [&](double t) { return model.phi(t * direction); };
  double lo = 0.0, mid = 1.0, hi = 2.0;
  double fmid = phi(mid);
  // Bracket the maximum of a function that is 0 at 0 and eventually decreasing.
  for (int i = 0; i < 200 && phi(hi) > fmid; ++i) {
    lo = mid;
    mid = hi;
    fmid = phi(mid);
    hi *= 2.0;
  }
  for (int i = 0; i < 60 && phi(0.5 * mid) > fmid; ++i) {
    hi = mid;
    mid *= 0.5;
    fmid = phi(mid);
    lo = 0.5 * mid;
  }
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double f1 = phi(x1), f2 = phi(x2);
  for (int i = 0; i < 200 && b - a > 1e-12 * b; ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = phi(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = phi(x1);
    }
  }
  return 0.5 * (a + b);
}

std::vector<Eigen::VectorXd> mesh_directions(int m, int count, std::uint64_t seed) {
  static constexpr std::array<int, 24> primes = {2,  3,  5,  7,  11, 13, 17, 19,
                                                 23, 29, 31, 37, 41, 43, 47, 53,
                                                 59, 61, 67, 71, 73, 79, 83, 89};
  std::vector<Eigen::VectorXd> dirs;
  // A line through the origin in R^1 is one direction up to sign.
  if (m == 1)
    return {Eigen::VectorXd::Ones(1)};
  for (int i = 0; i < m && static_cast<int>(dirs.size()) < count; ++i)
    dirs.push_back(Eigen::VectorXd::Unit(m, i));
  const std::uint64_t offset = 1 + seed % 997;
  for (std::uint64_t n = offset; static_cast<int>(dirs.size()) < count; ++n) {
    Eigen::VectorXd d(m);
    for (int j = 0; j < m; ++j) {
      const int b = primes[j % primes.size()];
      double f = 1.0, u = 0.0;
      for (std::uint64_t i = n; i > 0; i /= b) {
        f /= b;
        u += f * static_cast<double>(i % b);
      }
      d(j) = std::sqrt(2.0) * boost::math::erf_inv(2.0 * u - 1.0);
    }
    if (d.norm() > 1e-12)
      dirs.push_back(d.normalized());
  }
  return dirs;
}

} // namespace fountain::detail
