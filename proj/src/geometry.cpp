#include "fountain/minimax.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "fountain/error.hpp"
#include "search.hpp"

namespace fountain {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

bool psi_suppressed(const EnergyModel &model) {
  if (model.problem() == Problem::HS)
    return model.density().kind == DensityKind::Zero;
  return model.f().kind == ScalarKind::Zero && model.g().kind == ScalarKind::Zero;
}

/// sup_{x >= 0} (delta x^2 - P(x)) for an even primitive P, by a logarithmic
/// scan and golden refinement. +inf when P is not superquadratic.
template <class Primitive>
double deficit(double delta, Primitive primitive) {
  auto fn = [&](double x) { return delta * x * x - primitive(x); };
  const int n = 2400;
  const double lo = std::log(1e-8), hi = std::log(1e16);
  int best_i = 0;
  double best = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double v = fn(std::exp(lo + (hi - lo) * i / n));
    if (v > best) {
      best = v;
      best_i = i;
    }
  }
  if (best_i >= n - 1)
    return inf;
  if (best_i == 0)
    return std::max(best, 0.0);
  double a = std::exp(lo + (hi - lo) * (best_i - 1) / n);
  double b = std::exp(lo + (hi - lo) * (best_i + 1) / n);
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int i = 0; i < 200 && b - a > 1e-14 * b; ++i) {
    const double x1 = b - r * (b - a), x2 = a + r * (b - a);
    if (fn(x1) < fn(x2))
      a = x1;
    else
      b = x2;
  }
  return std::max(best, fn(0.5 * (a + b)));
}

std::vector<double> delta_grid(const GeometryOptions &options) {
  if (!options.delta_grid.empty())
    return options.delta_grid;
  std::vector<double> grid;
  for (int i = -4; i <= 24; ++i)
    grid.push_back(std::ldexp(1.0, i));
  return grid;
}

/// Plus unit vectors e_0..e_k of X_k-, in coordinates of the X_k- basis.
std::vector<Eigen::VectorXd> plus_axes(int n_minus, int k) {
  std::vector<Eigen::VectorXd> out;
  for (int i = 0; i <= k; ++i)
    out.push_back(Eigen::VectorXd::Unit(n_minus + k + 1, n_minus + i));
  return out;
}

} // namespace

double quadratic_deficit(const EnergyModel &model, double delta) {
  if (!(delta > 0.0))
    throw Error(ErrorCode::InvalidArgument, "delta must be positive");
  if (model.problem() == Problem::HS) {
    const HamiltonianDensity &h = model.density();
    return deficit(delta, [&](double r) { return h.H(r); });
  }
  const ScalarNonlinearity &f = model.f(), &g = model.g();
  auto side = [&](const ScalarNonlinearity &s) {
    return std::max(deficit(delta, [&](double x) { return s.F(x); }),
                    deficit(delta, [&](double x) { return s.F(-x); }));
  };
  return side(f) + side(g);
}

GeometryReport geometry_check(const EnergyModel &model, int k,
                              const GeometryOptions &options) {
  const SplitSpace &split = model.split();
  const GalerkinSubspaces sub = galerkin_subspaces(split, k);
  const int nm = split.minus_count();
  const int dim = split.dimension();
  GeometryReport rep;
  rep.k = k;
  const bool suppressed = psi_suppressed(model);

  if (suppressed) {
    // Phi = 1/2 ||z||^2 on X_k+, so every radius is admissible.
    rep.r = 1.0;
    rep.b = 0.5;
  } else if (model.problem() == Problem::HS) {
    const DensityConstants dc = density_constants(model.density());
    rep.eps = 0.5 * split.plus()[k].mu;
    rep.envelope_c = envelope_constant(model.density(), rep.eps);
    const double p = dc.p;
    const std::array<Eigen::MatrixXd, 2> comps = {
        model.synthesis(0).middleCols(sub.upper_begin, sub.upper_dim()),
        model.synthesis(1).middleCols(sub.upper_begin, sub.upper_dim())};
    EmbeddingOptions eo;
    eo.seed = options.seed;
    eo.starts = options.starts;
    eo.rel_tol = options.embedding_tol;
    rep.beta = lr_sphere_sup(comps, model.grid_weights(), p + 1.0, eo).value;
    const double c3 = 2.0 * rep.envelope_c / (p + 1.0);
    rep.r = std::pow(c3 * (p + 1.0) * std::pow(rep.beta, p + 1.0), 1.0 / (1.0 - p));
    rep.b = 0.5 * (0.5 - 1.0 / (p + 1.0)) * rep.r * rep.r;
  } else {
    const ScalarNonlinearity &f = model.f(), &g = model.g();
    const double pf = f.growth_exponent(), pg = g.growth_exponent();
    if (!(pf > 2.0) || !(pg > 2.0))
      throw AssumptionError("E2", "the fountain bound needs superquadratic growth");
    EmbeddingOptions eo;
    eo.seed = options.seed;
    eo.starts = options.starts;
    eo.rel_tol = options.embedding_tol;
    rep.beta_u = embedding_constant(split.basis(), split.s(), pf, k, eo).beta;
    rep.beta_v = embedding_constant(split.basis(), split.t(), pg, k, eo).beta;
    rep.beta = std::max(rep.beta_u, rep.beta_v);
    const double c1 = std::max(f.primitive_constant(), g.primitive_constant());
    const double p = std::max(pf, pg);
    rep.r = std::pow(c1 * p * std::pow(rep.beta, p), 1.0 / (2.0 - p));
    const double rho = rep.r / std::sqrt(2.0);
    rep.b = rho * rho - 2.0 * c1 * std::pow(rep.beta, pf) * std::pow(rho, pf) -
            2.0 * c1 * std::pow(rep.beta, pg) * std::pow(rho, pg) -
            4.0 * c1 * split.basis().domain().measure();
  }
  rep.b_finite = std::isfinite(rep.b) && std::isfinite(rep.r) && rep.r > 0.0;
  if (!rep.b_finite) {
    rep.reason = "b_k not finite";
    return rep;
  }

  // Envelope Phi <= -||z||^2/2 + c_delta |Theta| on X_k-. It needs the split
  // to be L2-orthogonal, which holds for HS and for ES with s = t.
  const bool orthogonal = model.problem() == Problem::HS || split.s() == split.t();
  if (orthogonal && !suppressed) {
    const double mu_max = split.plus()[k].mu;
    for (double d : delta_grid(options)) {
      if (d < mu_max)
        continue;
      const double cd = quadratic_deficit(model, d);
      if (!std::isfinite(cd))
        break;
      rep.envelope_valid = true;
      rep.delta = d;
      rep.c_delta = cd;
      const double slack = cd * model.volume() - std::min(0.0, rep.b);
      rep.envelope_radius = std::sqrt(2.0 * std::max(slack, 0.0));
      break;
    }
  }

  const Eigen::MatrixXd lower = detail::coordinate_columns(dim, sub.lower_begin, sub.lower_end);
  detail::ExtremumOptions eo;
  eo.maximize = true;
  eo.starts = options.starts;
  eo.seed = options.seed;
  eo.max_iterations = options.ascent_iterations;
  eo.seeds = plus_axes(nm, k);

  const double target = std::min(0.0, rep.b);
  double rho = 4.0 * rep.r;
  for (int i = 0; i <= options.max_doublings; ++i, rho *= 2.0) {
    rep.rho = rho;
    rep.a = detail::constrained_extremum(model, lower, rho, eo).value;
    if (rep.a < target)
      break;
  }

  // d_k: the ball sup is the sphere sup or an interior critical value; the
  // interior candidates are the peaks of Phi on X_k- reached from each axis.
  rep.d = rep.a;
  eo.ball = true;
  eo.starts = 0;
  eo.seeds.clear();
  for (const Eigen::VectorXd &axis : plus_axes(nm, k)) {
    const double t = detail::best_scale(model, lower * axis);
    const detail::Peak pk = detail::maximize_on(model, lower, t * axis, 100, 1e-10 * (1.0 + t));
    eo.seeds.push_back(pk.x.norm() <= rho ? pk.x : Eigen::VectorXd(std::min(t, rho) * axis));
  }
  rep.d = std::max(rep.d, detail::constrained_extremum(model, lower, rho, eo).value);

  rep.a1 = rep.a < target && std::isfinite(rep.d);
  rep.pass = rep.a1 && rep.b_finite;
  if (!rep.a1)
    rep.reason = suppressed || target == 0.0 ? "a_k >= 0" : "a_k >= min(0, b_k)";
  return rep;
}

DualGeometryReport dual_geometry_check(const EnergyModel &model, int k, double r,
                                       double rho, const GeometryOptions &options) {
  if (!model.is_dual())
    throw Error(ErrorCode::InvalidArgument, "dual geometry needs the dual sign convention");
  if (!(r > 0.0) || !(rho > 0.0))
    throw Error(ErrorCode::InvalidArgument, "radii must be positive");
  const SplitSpace &split = model.split();
  const GalerkinSubspaces sub = galerkin_subspaces(split, k);
  const int dim = split.dimension();
  const Eigen::MatrixXd upper = detail::coordinate_columns(dim, sub.upper_begin, sub.upper_end);
  const Eigen::MatrixXd lower = detail::coordinate_columns(dim, sub.lower_begin, sub.lower_end);
  const Eigen::MatrixXd whole = Eigen::MatrixXd::Identity(dim, dim);

  detail::ExtremumOptions eo;
  eo.starts = options.starts;
  eo.seed = options.seed;
  eo.max_iterations = options.ascent_iterations;
  // The first tail direction is the natural candidate on X_k+.
  eo.seeds = {Eigen::VectorXd::Unit(sub.upper_dim(), 0)};

  DualGeometryReport rep;
  rep.k = k;
  rep.r = r;
  rep.rho = rho;
  eo.maximize = false;
  rep.a = detail::constrained_extremum(model, upper, rho, eo).value;
  eo.maximize = true;
  rep.a_sup = detail::constrained_extremum(model, upper, rho, eo).value;
  eo.ball = true;
  eo.maximize = false;
  rep.d = detail::constrained_extremum(model, upper, rho, eo).value;
  eo.seeds.clear();
  eo.maximize = true;
  rep.ball_sup = detail::constrained_extremum(model, whole, r, eo).value;
  eo.ball = false;
  rep.b = detail::constrained_extremum(model, lower, r, eo).value;
  rep.b1 = rep.a > std::max(0.0, rep.ball_sup) && rep.b < 0.0;
  return rep;
}

} // namespace fountain
