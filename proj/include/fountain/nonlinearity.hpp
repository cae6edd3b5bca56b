#ifndef FOUNTAIN_NONLINEARITY_HPP
#define FOUNTAIN_NONLINEARITY_HPP

// Catalogued nonlinear terms. All variants are x- and t-independent and odd
// in the state, so the energies built from them are even.

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fountain {

enum class ScalarKind { Power, LogPower, Concave, Zero };

/// f(u) with primitive F(u) = int_0^u f.
///
///   Power(p):   f = |u|^(p-2) u,        F = |u|^p / p
///   LogPower:   f = u ln(1 + |u|)
///   Concave(q): f = -|u|^(q-2) u,       F = -|u|^q / q   (dual checks only)
///   Zero:       f = 0                   (quadratic-only test model)
struct ScalarNonlinearity {
  ScalarKind kind = ScalarKind::Power;
  double exponent = 4.0;

  static ScalarNonlinearity power(double p);
  static ScalarNonlinearity log_power();
  static ScalarNonlinearity concave(double q);
  static ScalarNonlinearity zero();

  double f(double u) const;
  double F(double u) const;
  double df(double u) const;

  /// Exponent p and constant C with |f(u)| <= C (1 + |u|^(p-1)).
  double growth_exponent() const;
  double growth_constant() const;
  /// C1 with |F(u)| <= C1 (1 + |u|^p).
  double primitive_constant() const;

  std::string name() const;
};

enum class DensityKind { Power, LogQuad, Quadratic, Zero };

/// Radial Hamiltonian density H(z) = H(|z|) on R^2 with H_z = h(|z|) z.
///
///   Power(mu):    H = r^mu / mu
///   LogQuad:      H = r^2 ln(1 + r)
///   Quadratic(c): H = c r^2   (fails the superquadratic condition)
///   Zero:         H = 0
struct HamiltonianDensity {
  DensityKind kind = DensityKind::Power;
  double parameter = 4.0;

  static HamiltonianDensity power(double mu);
  static HamiltonianDensity log_quad();
  static HamiltonianDensity quadratic(double c);
  static HamiltonianDensity zero();

  double H(double r) const;
  /// |H_z| / |z| as a function of r = |z|; continuous at r = 0.
  double h(double r) const;
  /// d h / d r.
  double dh(double r) const;
  /// (1/2) H_z . z - H.
  double H_tilde(double r) const;

  Eigen::Vector2d grad(const Eigen::Vector2d &z) const;
  Eigen::Matrix2d hessian(const Eigen::Vector2d &z) const;

  std::string name() const;
};

double h_tilde(const HamiltonianDensity &density, const Eigen::Vector2d &z);

/// Constants of the superquadratic structure condition (H4) and of the
/// growth envelope |H_z| <= eps |z| + C(eps) |z|^p with p = (sigma+1)/(sigma-1).
struct DensityConstants {
  double sigma = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
  double R = 0.0;
  double p = 0.0;
  double a3 = 0.0; ///< sup_{r >= R} |H_z| / r^p
  double a4 = 0.0; ///< sup_{r <= R} |H_z|
};

/// Catalogued constants. Throws AssumptionError("H3") for densities without
/// superquadratic growth.
DensityConstants density_constants(const HamiltonianDensity &density);

/// C(eps) = a4 / delta^p + a3 where delta is the largest radius with
/// h(r) <= eps on [0, delta).
double envelope_constant(const HamiltonianDensity &density, double eps);

struct GrowthSampleSpec {
  std::vector<double> eps_grid{1.0, 0.1, 0.01};
  double r_min = 1e-6;
  double r_max = 1e4;
  int samples = 100000;
  double slack = 1e-12;
};

struct GrowthEntry {
  std::string condition;
  bool pass = true;
  double worst = 0.0; ///< largest violation (<= 0 when the condition holds)
  double at = 0.0;    ///< sample radius of the worst case
  double constant = 0.0;
};

struct GrowthReport {
  std::string model;
  DensityConstants constants;
  std::vector<GrowthEntry> entries;
  bool pass() const;
};

/// Samples the radial conditions (H2)-(H4) and the envelope for each eps.
GrowthReport check_growth(const HamiltonianDensity &density,
                          const GrowthSampleSpec &spec = {});
/// Samples (E1)-(E5) for a scalar nonlinearity.
GrowthReport check_growth(const ScalarNonlinearity &f,
                          const GrowthSampleSpec &spec = {});

/// f(u)[s(s/2 + 1)u + (1+s)v] + F(u) - F((1+s)u + v); nonpositive for the
/// catalogued superquadratic models whenever s >= -1.
double liu_inequality(const ScalarNonlinearity &f, double u, double v, double s);

} // namespace fountain

#endif
