#include "fountain/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fountain/error.hpp"

namespace fountain {

namespace {

// F for LogPower near 0, where the closed form cancels: sum over n >= 1 of
// (-1)^(n+1) a^(n+2) / (n (n+2)).
double log_power_primitive_series(double a) {
  double term = a * a * a;
  double acc = 0.0;
  for (int n = 1; n <= 30; ++n) {
    acc += ((n % 2 == 1) ? 1.0 : -1.0) * term / (n * (n + 2.0));
    term *= a;
  }
  return acc;
}

// Deterministic log-spaced radii on [lo, hi].
std::vector<double> log_samples(double lo, double hi, int count) {
  std::vector<double> r(std::max(count, 2));
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < r.size(); ++i)
    r[i] = std::exp(a + (b - a) * static_cast<double>(i) / (r.size() - 1));
  return r;
}

double relative_excess(double lhs, double rhs) {
  return (lhs - rhs) / std::max(1.0, std::abs(rhs));
}

} // namespace

ScalarNonlinearity ScalarNonlinearity::power(double p) {
  if (!(p > 1.0))
    throw Error(ErrorCode::InvalidArgument, "power exponent must exceed 1");
  return {ScalarKind::Power, p};
}
ScalarNonlinearity ScalarNonlinearity::log_power() { return {ScalarKind::LogPower, 3.0}; }
ScalarNonlinearity ScalarNonlinearity::concave(double q) {
  if (!(q > 1.0) || !(q < 2.0))
    throw Error(ErrorCode::InvalidArgument, "concave exponent must lie in (1, 2)");
  return {ScalarKind::Concave, q};
}
ScalarNonlinearity ScalarNonlinearity::zero() { return {ScalarKind::Zero, 2.0}; }

double ScalarNonlinearity::f(double u) const {
  const double a = std::abs(u);
  switch (kind) {
  case ScalarKind::Power:
    return a == 0.0 ? 0.0 : std::pow(a, exponent - 2.0) * u;
  case ScalarKind::LogPower:
    return u * std::log1p(a);
  case ScalarKind::Concave:
    return a == 0.0 ? 0.0 : -std::pow(a, exponent - 2.0) * u;
  case ScalarKind::Zero:
    return 0.0;
  }
  return 0.0;
}

double ScalarNonlinearity::F(double u) const {
  const double a = std::abs(u);
  switch (kind) {
  case ScalarKind::Power:
    return std::pow(a, exponent) / exponent;
  case ScalarKind::LogPower:
    if (a < 0.1)
      return log_power_primitive_series(a);
    return 0.5 * (a * a - 1.0) * std::log1p(a) - 0.25 * a * a + 0.5 * a;
  case ScalarKind::Concave:
    return -std::pow(a, exponent) / exponent;
  case ScalarKind::Zero:
    return 0.0;
  }
  return 0.0;
}

double ScalarNonlinearity::df(double u) const {
  const double a = std::abs(u);
  switch (kind) {
  case ScalarKind::Power:
    return a == 0.0 ? (exponent == 2.0 ? 1.0 : 0.0)
                    : (exponent - 1.0) * std::pow(a, exponent - 2.0);
  case ScalarKind::LogPower:
    return std::log1p(a) + a / (1.0 + a);
  case ScalarKind::Concave:
    return a == 0.0 ? -std::numeric_limits<double>::infinity()
                    : -(exponent - 1.0) * std::pow(a, exponent - 2.0);
  case ScalarKind::Zero:
    return 0.0;
  }
  return 0.0;
}

double ScalarNonlinearity::growth_exponent() const {
  return kind == ScalarKind::LogPower ? 3.0 : exponent;
}

// ln(1 + a) <= a gives |u ln(1+|u|)| <= u^2 and F <= |u|^3 / 3.
double ScalarNonlinearity::growth_constant() const {
  return kind == ScalarKind::Zero ? 0.0 : 1.0;
}

double ScalarNonlinearity::primitive_constant() const {
  switch (kind) {
  case ScalarKind::Power:
  case ScalarKind::Concave:
    return 1.0 / exponent;
  case ScalarKind::LogPower:
    return 1.0 / 3.0;
  case ScalarKind::Zero:
    return 0.0;
  }
  return 0.0;
}

std::string ScalarNonlinearity::name() const {
  switch (kind) {
  case ScalarKind::Power:
    return "POWER(" + std::to_string(exponent) + ")";
  case ScalarKind::LogPower:
    return "LOG_POWER";
  case ScalarKind::Concave:
    return "CONCAVE(" + std::to_string(exponent) + ")";
  case ScalarKind::Zero:
    return "ZERO";
  }
  return "?";
}

HamiltonianDensity HamiltonianDensity::power(double mu) {
  if (!(mu > 2.0))
    throw Error(ErrorCode::InvalidArgument, "power density needs mu > 2");
  return {DensityKind::Power, mu};
}
HamiltonianDensity HamiltonianDensity::log_quad() { return {DensityKind::LogQuad, 0.0}; }
HamiltonianDensity HamiltonianDensity::quadratic(double c) {
  if (!(c > 0.0))
    throw Error(ErrorCode::InvalidArgument, "quadratic density needs c > 0");
  return {DensityKind::Quadratic, c};
}
HamiltonianDensity HamiltonianDensity::zero() { return {DensityKind::Zero, 0.0}; }

double HamiltonianDensity::H(double r) const {
  switch (kind) {
  case DensityKind::Power:
    return std::pow(r, parameter) / parameter;
  case DensityKind::LogQuad:
    return r * r * std::log1p(r);
  case DensityKind::Quadratic:
    return parameter * r * r;
  case DensityKind::Zero:
    return 0.0;
  }
  return 0.0;
}

double HamiltonianDensity::h(double r) const {
  switch (kind) {
  case DensityKind::Power:
    return r == 0.0 ? 0.0 : std::pow(r, parameter - 2.0);
  case DensityKind::LogQuad:
    return 2.0 * std::log1p(r) + r / (1.0 + r);
  case DensityKind::Quadratic:
    return 2.0 * parameter;
  case DensityKind::Zero:
    return 0.0;
  }
  return 0.0;
}

double HamiltonianDensity::dh(double r) const {
  switch (kind) {
  case DensityKind::Power:
    if (r == 0.0)
      return parameter == 3.0 ? 1.0 : 0.0;
    return (parameter - 2.0) * std::pow(r, parameter - 3.0);
  case DensityKind::LogQuad: {
    const double s = 1.0 / (1.0 + r);
    return 2.0 * s + s * s;
  }
  case DensityKind::Quadratic:
  case DensityKind::Zero:
    return 0.0;
  }
  return 0.0;
}

double HamiltonianDensity::H_tilde(double r) const {
  switch (kind) {
  case DensityKind::Power:
    return (0.5 - 1.0 / parameter) * std::pow(r, parameter);
  case DensityKind::LogQuad:
    return r * r * r / (2.0 * (1.0 + r));
  case DensityKind::Quadratic:
  case DensityKind::Zero:
    return 0.0;
  }
  return 0.0;
}

Eigen::Vector2d HamiltonianDensity::grad(const Eigen::Vector2d &z) const {
  return h(z.norm()) * z;
}

// Hessian of a radial density: h I + (h'/r) z z^T, extended by h(0) I at 0.
Eigen::Matrix2d HamiltonianDensity::hessian(const Eigen::Vector2d &z) const {
  const double r = z.norm();
  Eigen::Matrix2d m = h(r) * Eigen::Matrix2d::Identity();
  if (r > 0.0)
    m += (dh(r) / r) * (z * z.transpose());
  return m;
}

std::string HamiltonianDensity::name() const {
  switch (kind) {
  case DensityKind::Power:
    return "POWER(" + std::to_string(parameter) + ")";
  case DensityKind::LogQuad:
    return "LOG_QUAD";
  case DensityKind::Quadratic:
    return "QUADRATIC(" + std::to_string(parameter) + ")";
  case DensityKind::Zero:
    return "ZERO";
  }
  return "?";
}

double h_tilde(const HamiltonianDensity &density, const Eigen::Vector2d &z) {
  return density.H_tilde(z.norm());
}

DensityConstants density_constants(const HamiltonianDensity &density) {
  DensityConstants c;
  switch (density.kind) {
  case DensityKind::Power: {
    const double mu = density.parameter;
    c.R = 1.0;
    c.sigma = mu / (mu - 2.0);
    c.a1 = 0.5 - 1.0 / mu;
    c.a2 = 1.0 / (0.5 - 1.0 / mu);
    c.p = (c.sigma + 1.0) / (c.sigma - 1.0);
    c.a3 = 1.0;
    c.a4 = 1.0;
    return c;
  }
  case DensityKind::LogQuad: {
    // Both sup's over r >= R are attained at r = R = 1.
    const double h1 = density.h(1.0);
    c.R = 1.0;
    c.sigma = 2.0;
    c.a1 = 0.25;
    c.a2 = 4.0 * h1 * h1;
    c.p = 3.0;
    c.a3 = h1;
    c.a4 = h1;
    return c;
  }
  case DensityKind::Quadratic:
  case DensityKind::Zero:
    break;
  }
  throw AssumptionError("H3", density.name() + " is not superquadratic");
}

double envelope_constant(const HamiltonianDensity &density, double eps) {
  if (!(eps > 0.0))
    throw Error(ErrorCode::InvalidArgument, "envelope needs eps > 0");
  const DensityConstants c = density_constants(density);
  // h is increasing for the catalogued densities; bisect h(delta) = eps.
  double lo = 0.0, hi = 1.0;
  while (density.h(hi) < eps) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300)
      return c.a3;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (density.h(mid) < eps ? lo : hi) = mid;
  }
  const double delta = lo;
  if (!(delta > 0.0))
    throw Error(ErrorCode::Bracketing, "envelope radius collapsed to zero");
  return c.a4 / std::pow(delta, c.p) + c.a3;
}

bool GrowthReport::pass() const {
  return std::all_of(entries.begin(), entries.end(),
                     [](const GrowthEntry &e) { return e.pass; });
}

GrowthReport check_growth(const HamiltonianDensity &density,
                          const GrowthSampleSpec &spec) {
  GrowthReport rep;
  rep.model = density.name();
  const auto radii = log_samples(spec.r_min, spec.r_max, spec.samples);

  {
    GrowthEntry e{"H2", true, 0.0, 0.0, 0.0};
    e.worst = std::abs(density.H(0.0));
    e.at = 1e-8;
    e.worst = std::max(e.worst, density.h(1e-8) - 1e-6);
    e.pass = density.H(0.0) == 0.0 && density.h(1e-8) <= 1e-6;
    rep.entries.push_back(e);
  }
  {
    // Positivity on samples and growth of H / r^2 between sqrt(r_max) and r_max.
    GrowthEntry e{"H3", true, -std::numeric_limits<double>::infinity(), 0.0, 0.0};
    for (double r : radii)
      if (-density.H(r) > e.worst) {
        e.worst = -density.H(r);
        e.at = r;
      }
    const double r1 = std::sqrt(spec.r_max);
    const double q1 = density.H(r1) / (r1 * r1);
    const double q2 = density.H(spec.r_max) / (spec.r_max * spec.r_max);
    e.constant = q1 > 0.0 ? q2 / q1 : 0.0;
    e.pass = e.worst < 0.0 && e.constant >= 1.5;
    rep.entries.push_back(e);
  }
  {
    GrowthEntry e{"Htilde>=0", true, -std::numeric_limits<double>::infinity(), 0.0, 0.0};
    for (double r : radii)
      if (-density.H_tilde(r) > e.worst) {
        e.worst = -density.H_tilde(r);
        e.at = r;
      }
    e.pass = e.worst <= spec.slack;
    rep.entries.push_back(e);
  }

  DensityConstants c;
  try {
    c = density_constants(density);
  } catch (const AssumptionError &) {
    rep.entries.push_back({"H4", false, 0.0, 0.0, 0.0});
    return rep;
  }
  rep.constants = c;
  const auto tail = log_samples(c.R, std::max(spec.r_max, 2.0 * c.R), spec.samples);
  {
    GrowthEntry e{"H4(1)", true, -std::numeric_limits<double>::infinity(), 0.0, c.a1};
    for (double r : tail) {
      const double x = relative_excess(c.a1 * r * r, density.H_tilde(r));
      if (x > e.worst) {
        e.worst = x;
        e.at = r;
      }
    }
    e.pass = e.worst <= spec.slack;
    rep.entries.push_back(e);
  }
  {
    GrowthEntry e{"H4(2)", true, -std::numeric_limits<double>::infinity(), 0.0, c.a2};
    for (double r : tail) {
      const double x = relative_excess(std::pow(density.h(r), c.sigma),
                                       c.a2 * density.H_tilde(r));
      if (x > e.worst) {
        e.worst = x;
        e.at = r;
      }
    }
    e.pass = e.worst <= spec.slack;
    rep.entries.push_back(e);
  }
  for (double eps : spec.eps_grid) {
    const double ce = envelope_constant(density, eps);
    GrowthEntry e{"envelope eps=" + std::to_string(eps), true,
                  -std::numeric_limits<double>::infinity(), 0.0, ce};
    for (double r : radii) {
      const double x =
          relative_excess(density.h(r) * r, eps * r + ce * std::pow(r, c.p));
      if (x > e.worst) {
        e.worst = x;
        e.at = r;
      }
    }
    e.pass = e.worst <= spec.slack;
    rep.entries.push_back(e);
  }
  return rep;
}

GrowthReport check_growth(const ScalarNonlinearity &f, const GrowthSampleSpec &spec) {
  GrowthReport rep;
  rep.model = f.name();
  const auto radii = log_samples(spec.r_min, spec.r_max, spec.samples);
  const double p = f.growth_exponent();
  const double cg = f.growth_constant();
  {
    GrowthEntry e{"E1", true, -std::numeric_limits<double>::infinity(), 0.0, cg};
    for (double a : radii) {
      const double x = relative_excess(std::abs(f.f(a)), cg * (1.0 + std::pow(a, p - 1.0)));
      if (x > e.worst) {
        e.worst = x;
        e.at = a;
      }
    }
    e.pass = e.worst <= spec.slack && p > 2.0;
    rep.entries.push_back(e);
  }
  {
    GrowthEntry e{"E2", true, 0.0, 1e-8, 0.0};
    e.worst = std::abs(f.f(1e-8)) / 1e-8 - 1e-6;
    e.pass = e.worst <= 0.0;
    rep.entries.push_back(e);
  }
  {
    GrowthEntry e{"E3", true, 0.0, spec.r_max, 0.0};
    const double r1 = std::sqrt(spec.r_max);
    const double q1 = f.F(r1) / (r1 * r1);
    const double q2 = f.F(spec.r_max) / (spec.r_max * spec.r_max);
    e.constant = q1 > 0.0 ? q2 / q1 : 0.0;
    e.pass = e.constant >= 1.5;
    rep.entries.push_back(e);
  }
  {
    GrowthEntry e{"E4", true, -std::numeric_limits<double>::infinity(), 0.0, 0.0};
    double prev = f.f(radii.front()) / radii.front();
    for (std::size_t i = 1; i < radii.size(); ++i) {
      const double cur = f.f(radii[i]) / radii[i];
      if (prev - cur > e.worst) {
        e.worst = prev - cur;
        e.at = radii[i];
      }
      prev = cur;
    }
    e.pass = e.worst < 0.0;
    rep.entries.push_back(e);
  }
  {
    GrowthEntry e{"E5", true, 0.0, 0.0, 0.0};
    for (double a : radii) {
      const double x = std::abs(f.f(-a) + f.f(a));
      if (x > e.worst) {
        e.worst = x;
        e.at = a;
      }
    }
    e.pass = e.worst == 0.0;
    rep.entries.push_back(e);
  }
  {
    GrowthEntry e{"F>=0", true, -std::numeric_limits<double>::infinity(), 0.0, 0.0};
    for (double a : radii)
      if (-f.F(a) > e.worst) {
        e.worst = -f.F(a);
        e.at = a;
      }
    e.pass = e.worst <= spec.slack;
    rep.entries.push_back(e);
  }
  return rep;
}

double liu_inequality(const ScalarNonlinearity &f, double u, double v, double s) {
  if (!(s >= -1.0))
    throw Error(ErrorCode::InvalidArgument, "Liu inequality needs s >= -1");
  return f.f(u) * (s * (0.5 * s + 1.0) * u + (1.0 + s) * v) + f.F(u) -
         f.F((1.0 + s) * u + v);
}

} // namespace fountain
