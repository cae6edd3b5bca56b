#include "fountain/minimax.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <lapacke.h>

#include "fountain/error.hpp"
#include "search.hpp"

namespace fountain {

std::string to_string(SolveStatus status) {
  switch (status) {
  case SolveStatus::Converged:
    return "converged";
  case SolveStatus::Unconverged:
    return "unconverged";
  case SolveStatus::FlowOnly:
    return "flow_only";
  }
  return "unknown";
}

namespace {

/// Newton step H d = -g by symmetric indefinite factorization; the
/// eigen-pseudo-inverse takes over when the factorization is singular.
Eigen::VectorXd newton_step(const Eigen::MatrixXd &h, const Eigen::VectorXd &g,
                            bool pseudo) {
  const lapack_int n = static_cast<lapack_int>(h.rows());
  if (!pseudo) {
    Eigen::MatrixXd a = h;
    Eigen::VectorXd b = -g;
    std::vector<lapack_int> ipiv(n);
    const lapack_int info = LAPACKE_dsysv(LAPACK_COL_MAJOR, 'L', n, 1, a.data(), n,
                                          ipiv.data(), b.data(), n);
    if (info == 0 && b.allFinite())
      return b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  const Eigen::VectorXd &lam = es.eigenvalues();
  const double cut = 1e-10 * lam.cwiseAbs().maxCoeff();
  Eigen::VectorXd proj = es.eigenvectors().transpose() * g;
  for (int i = 0; i < proj.size(); ++i)
    proj(i) = std::abs(lam(i)) > cut ? -proj(i) / lam(i) : 0.0;
  return es.eigenvectors() * proj;
}

struct Polish {
  Eigen::VectorXd c;
  int iterations = 0;
  bool ok = false;
};

/// Newton iteration on the full gradient, judged by the gradient norm.
Polish newton_polish(const EnergyModel &model, Eigen::VectorXd c, double tol) {
  Polish out;
  Eigen::VectorXd g = model.grad(c);
  for (int it = 0; it < 40; ++it) {
    if ((1.0 + c.norm()) * g.norm() <= tol) {
      out.ok = true;
      break;
    }
    ++out.iterations;
    const Eigen::MatrixXd h = model.hessian(c);
    bool moved = false;
    for (int attempt = 0; attempt < 2 && !moved; ++attempt) {
      const Eigen::VectorXd d = newton_step(h, g, attempt == 1);
      double s = 1.0;
      for (int ls = 0; ls < 12; ++ls, s *= 0.5) {
        const Eigen::VectorXd cn = c + s * d;
        const Eigen::VectorXd gn = model.grad(cn);
        if (gn.allFinite() && gn.norm() < g.norm()) {
          c = cn;
          g = gn;
          moved = true;
          break;
        }
      }
    }
    if (!moved)
      break;
  }
  out.ok = out.ok || (1.0 + c.norm()) * g.norm() <= tol;
  out.c = std::move(c);
  return out;
}

/// Basis [L | v | X-] of the current peak subspace.
Eigen::MatrixXd peak_basis(const Eigen::MatrixXd &l, const Eigen::VectorXd &v, int n_minus) {
  const int dim = static_cast<int>(v.size());
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(dim, l.cols() + 1 + n_minus);
  b.leftCols(l.cols()) = l;
  b.col(l.cols()) = v;
  for (int i = 0; i < n_minus; ++i)
    b(i, l.cols() + 1 + i) = 1.0;
  return b;
}

void finish_report(const EnergyModel &model, SolveReport &rep, const SolveOptions &options,
                   double tol) {
  const SplitSpace &split = model.split();
  Eigen::VectorXd g;
  rep.level = model.phi_grad(rep.coords, g);
  rep.grad_norm = g.norm();
  rep.norm = rep.coords.norm();
  rep.cerami = (1.0 + rep.norm) * rep.grad_norm;
  rep.point = split.point(rep.coords);
  // Raw coefficients are L2-orthonormal in each component.
  rep.l2_norm = rep.point.coeffs.norm();
  if (options.geometry) {
    rep.b_k = options.geometry->b;
    rep.d_k = options.geometry->d;
    rep.above_lower_bound = rep.level >= options.geometry->b - tol;
  }
  if (model.problem() == Problem::ES)
    rep.residual = strong_residual(model, rep.point);
}

} // namespace

SolveReport saddle_solve(const EnergyModel &model, int k, const FlowConfig &config,
                         const SolveOptions &options) {
  config.validate();
  const SplitSpace &split = model.split();
  const GalerkinSubspaces sub = galerkin_subspaces(split, k);
  const int nm = split.minus_count();
  const int dim = split.dimension();
  SolveReport rep;
  rep.k = k;

  // Mesh over the unit sphere of span(e_0..e_k), each direction reduced to
  // the peak of Phi over its line plus X-.
  const Eigen::MatrixXd lower = detail::coordinate_columns(dim, sub.lower_begin, sub.lower_end);
  std::vector<Eigen::VectorXd> mesh = detail::mesh_directions(k + 1, config.starts, config.seed);
  rep.mesh_size = static_cast<int>(mesh.size());
  detail::Peak best;
  bool have = false;
  for (Eigen::VectorXd theta : mesh) {
    if (options.mirror)
      theta = -theta;
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(lower.cols());
    x0.segment(nm, k + 1) = theta;
    const double t = detail::best_scale(model, lower * x0);
    x0 *= t;
    const detail::Peak pk = detail::maximize_on(model, lower, x0, 200, 1e-10 * (1.0 + t));
    if (!have || pk.value > best.value) {
      best = pk;
      have = true;
    }
  }
  rep.mesh_peak = best.value;

  Eigen::VectorXd c = lower * best.x;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
  v.segment(nm, k + 1) = c.segment(nm, k + 1);
  if (v.norm() == 0.0)
    throw Error(ErrorCode::AssumptionViolated, "mesh peak has no plus component");
  double t = v.norm();
  v /= t;

  // L spans span(e_0..e_k) minus v and stays fixed while v moves in X+.
  Eigen::MatrixXd l(dim, k);
  if (k > 0) {
    Eigen::MatrixXd span = detail::coordinate_columns(dim, nm, nm + k + 1);
    span -= v * (v.transpose() * span);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(span);
    l = Eigen::MatrixXd(qr.householderQ()).leftCols(k);
  }
  Eigen::VectorXd x(k + 1 + nm);
  x.head(k) = l.transpose() * c;
  x(k) = t;
  x.tail(nm) = c.head(nm);

  const double switch_level = std::max(10.0 * config.stop_tol, config.polish_tol);
  const int peak_iterations = 100;
  auto peak_tol = [](const Eigen::VectorXd &xx) { return 1e-11 * (1.0 + xx.norm()); };

  detail::Peak pk = detail::maximize_on(model, peak_basis(l, v, nm), x, peak_iterations, peak_tol(x));
  double step = 1.0;
  int it = 0;
  for (; it < config.max_iterations; ++it) {
    x = pk.x;
    const Eigen::VectorXd cc = peak_basis(l, v, nm) * x;
    const double gn = pk.grad.norm();
    const double cer = (1.0 + cc.norm()) * gn;
    rep.history.push_back({it, pk.value, gn, cer});
    if (cer < switch_level)
      break;
    // Descent direction: the X+ part of the gradient, orthogonal to L and v.
    Eigen::VectorXd gp = pk.grad;
    gp.head(nm).setZero();
    if (k > 0)
      gp -= l * (l.transpose() * gp);
    gp -= v * v.dot(gp);
    const double tt = x(k);
    const double sgn = tt >= 0.0 ? 1.0 : -1.0;
    bool accepted = false;
    step = std::min(1.0, 2.0 * step);
    for (; step >= 1e-6; step *= 0.5) {
      const Eigen::VectorXd vn = (v - step * sgn * gp).normalized();
      detail::Peak trial = detail::maximize_on(model, peak_basis(l, vn, nm), x, peak_iterations,
                                               peak_tol(x));
      if (trial.value < pk.value - 0.25 * step * std::abs(tt) * gp.squaredNorm()) {
        v = vn;
        pk = std::move(trial);
        accepted = true;
        break;
      }
    }
    if (!accepted)
      break;
  }
  rep.minimax_iterations = it;
  rep.coords = peak_basis(l, v, nm) * pk.x;
  const double lmm_level = pk.value;

  bool polish_failed = false;
  if (config.newton_polish) {
    const Polish po = newton_polish(model, rep.coords, config.stop_tol);
    rep.newton_iterations = po.iterations;
    // A polish that drifts to another level has left the minimax point.
    const bool drift = std::abs(model.phi(po.c) - lmm_level) > 1e-6 * (1.0 + std::abs(lmm_level));
    if (!drift && model.cerami(po.c) <= model.cerami(rep.coords))
      rep.coords = po.c;
    polish_failed = !po.ok || drift;
  }
  finish_report(model, rep, options, 1e-8);
  if (rep.cerami <= config.stop_tol)
    rep.status = SolveStatus::Converged;
  else
    rep.status = polish_failed ? SolveStatus::FlowOnly : SolveStatus::Unconverged;
  rep.history.push_back({it + 1, rep.level, rep.grad_norm, rep.cerami});
  return rep;
}

SweepResult multiplicity_sweep(const EnergyModel &model, const std::vector<int> &ks,
                               const FlowConfig &config, int jobs,
                               const std::vector<std::optional<GeometryReport>> &geometry,
                               bool mirror) {
  config.validate();
  if (!geometry.empty() && geometry.size() != ks.size())
    throw Error(ErrorCode::SizeMismatch, "one geometry entry per k is required");
  SweepResult out;
  out.reports.resize(ks.size());
  std::vector<std::exception_ptr> errors(ks.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < ks.size(); i = next++) {
      try {
        SolveOptions opt;
        opt.mirror = mirror;
        if (!geometry.empty())
          opt.geometry = geometry[i];
        out.reports[i] = saddle_solve(model, ks[i], config, opt);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(ks.size())));
  std::vector<std::thread> pool;
  for (int i = 1; i < n; ++i)
    pool.emplace_back(worker);
  worker();
  for (auto &th : pool)
    th.join();
  for (const auto &e : errors)
    if (e)
      std::rethrow_exception(e);

  // Distinct levels among converged, nontrivial reports.
  std::vector<size_t> order;
  for (size_t i = 0; i < out.reports.size(); ++i)
    if (out.reports[i].status == SolveStatus::Converged && out.reports[i].l2_norm > 0.0)
      order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return out.reports[a].level < out.reports[b].level;
  });
  auto rel = [](double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
  };
  std::vector<size_t> kept;
  for (size_t i : order) {
    const SolveReport &r = out.reports[i];
    bool same = false;
    for (size_t j : kept) {
      const SolveReport &q = out.reports[j];
      if (rel(std::abs(r.level), std::abs(q.level)) <= 1e-3 && rel(r.l2_norm, q.l2_norm) <= 1e-2)
        same = true;
    }
    if (!same) {
      kept.push_back(i);
      out.distinct_levels.push_back(r.level);
      out.distinct_k.push_back(r.k);
    }
  }
  return out;
}

} // namespace fountain
