#include <doctest.h>

#include <cmath>
#include <random>

#include "fountain/energy.hpp"
#include "fountain/error.hpp"
#include "fountain/nonlinearity.hpp"
#include "fountain/oracle.hpp"
#include "test_support.hpp"

using namespace fountain;
using fountain::test::pi;

namespace {

struct Named {
  const char *name;
  EnergyModel model;
};

std::vector<Named> catalogue() {
  return {
      {"ES power 4/4", test::es_power(12)},
      {"ES log_power", EnergyModel::elliptic(test::es_split(12), ScalarNonlinearity::log_power(),
                                             ScalarNonlinearity::log_power())},
      {"ES power 3/5 s != t",
       EnergyModel::elliptic(test::es_split(12, 1.2, 0.8), ScalarNonlinearity::power(3.0),
                             ScalarNonlinearity::power(5.0))},
      {"HS power 4", EnergyModel::hamiltonian(test::hs_split(4, 3), HamiltonianDensity::power(4.0))},
      {"HS log_quad", EnergyModel::hamiltonian(test::hs_split(4, 3), HamiltonianDensity::log_quad())},
  };
}

EnergyModel suppressed(Problem p) {
  return p == Problem::ES
             ? EnergyModel::elliptic(test::es_split(8), ScalarNonlinearity::zero(), ScalarNonlinearity::zero())
             : EnergyModel::hamiltonian(test::hs_split(3, 2), HamiltonianDensity::zero());
}

} // namespace

TEST_SUITE("functionals") {

TEST_CASE("Phi at the origin and on the suppressed model") {
  for (const auto &[name, m] : catalogue()) {
    CAPTURE(name);
    const ProductPoint z = m.split().zero();
    CHECK(m.eval_phi(z) == 0.0);
    CHECK(m.grad_phi(z).coeffs.norm() == 0.0);
    CHECK(m.cerami_measure(z) == 0.0);
  }
  std::mt19937_64 rng(1);
  for (Problem p : {Problem::ES, Problem::HS}) {
    const EnergyModel m = suppressed(p);
    const int nm = m.split().minus_count();
    Eigen::VectorXd c = Eigen::VectorXd::Zero(m.dimension());
    c.tail(m.split().plus_count()) = test::gaussian(rng, m.split().plus_count());
    CHECK(m.phi(c) == doctest::Approx(0.5 * c.squaredNorm()).epsilon(1e-14));
    CHECK((m.grad(c) - c).norm() <= 1e-14 * c.norm());

    Eigen::VectorXd d = Eigen::VectorXd::Zero(m.dimension());
    d.head(nm) = test::gaussian(rng, nm);
    CHECK((m.grad(d) + d).norm() <= 1e-14 * d.norm());

    const Eigen::VectorXd e0 = Eigen::VectorXd::Unit(m.dimension(), nm);
    CHECK(m.cerami(e0) == doctest::Approx(2.0).epsilon(1e-14));
  }
}

TEST_CASE("Phi(phi_1, phi_1) for the power system") {
  const EnergyModel m = test::es_power(16);
  const EigenBasis &b = m.split().basis();
  const ProductPoint z = make_es_point(m.split(), unit_coeff(b, 0), unit_coeff(b, 0));
  // 1 - 2 * (1/4) * 3/(2 pi), and the Simpson oracle of the same integral.
  CHECK(m.eval_phi(z) == doctest::Approx(1.0 - 3.0 / (4.0 * pi)).epsilon(1e-13));
  CHECK(m.eval_phi(z) == doctest::Approx(test::oracle_value("es_phi_phi1_phi1")).epsilon(1e-12));
  CHECK(test::oracle_value("int_phi1_4") == doctest::Approx(3.0 / (2.0 * pi)).epsilon(1e-12));
}

TEST_CASE("gradient against central differences, 50 random pairs per model") {
  for (const auto &[name, m] : catalogue()) {
    CAPTURE(name);
    std::mt19937_64 rng(7);
    const double h = 1e-5;
    double worst = 0.0;
    for (int n = 0; n < 50; ++n) {
      const Eigen::VectorXd c = test::gaussian(rng, m.dimension(), 1.5 / std::sqrt(m.dimension()));
      Eigen::VectorXd w = test::gaussian(rng, m.dimension());
      w.normalize();
      const double dd = m.grad(c).dot(w);
      const double fd = (m.phi(c + h * w) - m.phi(c - h * w)) / (2.0 * h);
      worst = std::max(worst, std::abs(dd - fd) / (1.0 + std::abs(dd)));
    }
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("fd_gradient oracle") {
  std::mt19937_64 rng(9);
  for (const auto &[name, m] : catalogue()) {
    CAPTURE(name);
    const ProductPoint z = m.split().point(test::gaussian(rng, m.dimension(), 0.3));
    const Eigen::VectorXd an = m.grad_phi(z).coeffs;
    CHECK((fd_gradient(m, z, 1e-5).coeffs - an).norm() <= 1e-6 * an.norm());
    CHECK(fd_gradient(m, m.split().zero(), 1e-5).coeffs.norm() <= 1e-14);
  }
  // Quadratic model: central differences are exact up to rounding.
  const EnergyModel q = suppressed(Problem::HS);
  const ProductPoint z = q.split().point(test::gaussian(rng, q.dimension()));
  CHECK((fd_gradient(q, z, 1e-5).coeffs - q.grad_phi(z).coeffs).norm() <= 1e-10 * z.coeffs.norm());
}

TEST_CASE("Hessian against differences of the gradient") {
  std::mt19937_64 rng(13);
  for (const auto &[name, m] : catalogue()) {
    CAPTURE(name);
    const Eigen::VectorXd c = test::gaussian(rng, m.dimension(), 1.0 / std::sqrt(m.dimension()));
    const Eigen::MatrixXd hs = m.hessian(c);
    CHECK((hs - hs.transpose()).norm() == 0.0);
    const double h = 1e-6;
    double worst = 0.0;
    for (int i = 0; i < m.dimension(); i += 3) {
      const Eigen::VectorXd e = Eigen::VectorXd::Unit(m.dimension(), i);
      const Eigen::VectorXd col = (m.grad(c + h * e) - m.grad(c - h * e)) / (2 * h);
      worst = std::max(worst, (col - hs.col(i)).norm() / (1.0 + hs.col(i).norm()));
    }
    CHECK(worst <= 1e-6);
    const Eigen::MatrixXd basis = test::gaussian(rng, m.dimension() * 4).reshaped(m.dimension(), 4);
    const Eigen::MatrixXd r = m.hessian_restricted(c, basis);
    CHECK((r - basis.transpose() * hs * basis).norm() <= 1e-10 * (1.0 + r.norm()));
  }
}

TEST_CASE("evenness, Psi >= 0 and the dual sign") {
  std::mt19937_64 rng(17);
  for (const auto &[name, m] : catalogue()) {
    CAPTURE(name);
    for (int n = 0; n < 20; ++n) {
      const Eigen::VectorXd c = test::gaussian(rng, m.dimension(), 0.5);
      CHECK(m.phi(-c) == m.phi(c));
      CHECK((m.grad(-c) + m.grad(c)).norm() == 0.0);
      CHECK(m.psi(c) >= 0.0);
      const EnergyModel d = m.dual();
      CHECK(d.is_dual());
      CHECK(d.phi(c) == doctest::Approx(m.quadratic(c) + m.psi(c)).epsilon(1e-13));
    }
  }
}

TEST_CASE("H tilde closed forms") {
  const HamiltonianDensity p4 = HamiltonianDensity::power(4.0);
  const HamiltonianDensity lq = HamiltonianDensity::log_quad();
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> radius(0.0, 10.0);
  double worst_fd = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const double r = radius(rng);
    const Eigen::Vector2d z(r * std::cos(n), r * std::sin(n));
    CHECK(h_tilde(p4, z) == doctest::Approx(0.25 * std::pow(r, 4)).epsilon(1e-13));
    CHECK(h_tilde(p4, z) == doctest::Approx(p4.H(r)).epsilon(1e-13));
    CHECK(h_tilde(lq, z) == doctest::Approx(r * r * r / (2.0 * (1.0 + r))).epsilon(1e-12));
    // Finite-difference cross-check of H_z . z = r dH/dr.
    const double h = 1e-6 * (1.0 + r);
    const double dh = (lq.H(r + h) - lq.H(std::max(r - h, 0.0))) / (r + h - std::max(r - h, 0.0));
    worst_fd = std::max(worst_fd, std::abs(0.5 * r * dh - lq.H(r) - h_tilde(lq, z)) / (1.0 + r * r * r));
  }
  CHECK(worst_fd <= 1e-7);
  CHECK(h_tilde(p4, Eigen::Vector2d::Zero()) == 0.0);
  CHECK(h_tilde(lq, Eigen::Vector2d::Zero()) == 0.0);
}

TEST_CASE("density gradients and Hessians") {
  std::mt19937_64 rng(29);
  for (const HamiltonianDensity &d : {HamiltonianDensity::power(4.0), HamiltonianDensity::power(3.0),
                                      HamiltonianDensity::log_quad()}) {
    CAPTURE(d.name());
    CHECK(d.grad(Eigen::Vector2d::Zero()).norm() == 0.0);
    for (int n = 0; n < 50; ++n) {
      const Eigen::Vector2d z = test::gaussian(rng, 2);
      const double h = 1e-6;
      for (int i = 0; i < 2; ++i) {
        const Eigen::Vector2d e = Eigen::Vector2d::Unit(i);
        const double fd = (d.H((z + h * e).norm()) - d.H((z - h * e).norm())) / (2 * h);
        CHECK(d.grad(z)(i) == doctest::Approx(fd).epsilon(1e-6));
        const Eigen::Vector2d col = (d.grad(z + h * e) - d.grad(z - h * e)) / (2 * h);
        CHECK((col - d.hessian(z).col(i)).norm() <= 1e-6 * (1.0 + col.norm()));
      }
    }
  }
}

TEST_CASE("cerami measure at a point") {
  const EnergyModel m = test::es_power(8);
  std::mt19937_64 rng(31);
  const Eigen::VectorXd c = test::gaussian(rng, m.dimension(), 0.3);
  CHECK(m.cerami(c) == doctest::Approx((1.0 + c.norm()) * m.grad(c).norm()).epsilon(1e-14));
}

TEST_CASE("growth certificates") {
  const GrowthReport p4 = check_growth(HamiltonianDensity::power(4.0));
  CHECK(p4.pass());
  CHECK(p4.constants.p == doctest::Approx(3.0));
  for (const GrowthEntry &e : p4.entries)
    CHECK(e.pass);

  const GrowthReport lq = check_growth(HamiltonianDensity::log_quad());
  CHECK(lq.pass());
  CHECK(lq.constants.sigma == 2.0);
  CHECK(lq.constants.R == 1.0);
  int envelopes = 0;
  for (const GrowthEntry &e : lq.entries)
    envelopes += e.condition.rfind("envelope", 0) == 0;
  CHECK(envelopes == 3);

  const GrowthReport quad = check_growth(HamiltonianDensity::quadratic(1.0));
  CHECK_FALSE(quad.pass());
  bool h3_failed = false;
  for (const GrowthEntry &e : quad.entries)
    h3_failed = h3_failed || (e.condition == "H3" && !e.pass);
  CHECK(h3_failed);
  CHECK_THROWS_AS(density_constants(HamiltonianDensity::quadratic(1.0)), AssumptionError);

  for (const ScalarNonlinearity &f : {ScalarNonlinearity::power(3.0), ScalarNonlinearity::power(4.0),
                                      ScalarNonlinearity::log_power()})
    CHECK(check_growth(f).pass());
}

TEST_CASE("H tilde >= a1 |z|^2 beyond R on 1e5 samples") {
  for (const HamiltonianDensity &d : {HamiltonianDensity::power(4.0), HamiltonianDensity::log_quad()}) {
    const DensityConstants c = density_constants(d);
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> logr(std::log(c.R), std::log(1e4));
    double worst = -1.0;
    for (int n = 0; n < 100000; ++n) {
      const double r = std::exp(logr(rng));
      worst = std::max(worst, (c.a1 * r * r - d.H_tilde(r)) / (r * r));
      CHECK(d.H_tilde(r) >= 0.0);
    }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("Liu inequality") {
  const ScalarNonlinearity cubic = ScalarNonlinearity::power(4.0);
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> val(-3.0, 3.0);
  for (int n = 0; n < 100; ++n) {
    const double u = val(rng), v = val(rng);
    const double want = u * u * u * v + std::pow(u, 4) / 4 - std::pow(u + v, 4) / 4;
    CHECK(liu_inequality(cubic, u, v, 0.0) == doctest::Approx(want).epsilon(1e-12));
    CHECK(liu_inequality(cubic, u, 0.0, -1.0) == doctest::Approx(-0.25 * std::pow(u, 4)).epsilon(1e-12));
  }
  for (double s : {-1.0, 0.0, 2.5})
    CHECK(liu_inequality(cubic, 0.0, 0.0, s) == 0.0);
  CHECK_THROWS_AS(liu_inequality(cubic, 1.0, 1.0, -1.5), Error);

  std::uniform_real_distribution<double> sval(-1.0, 5.0);
  for (const ScalarNonlinearity &f : {ScalarNonlinearity::power(3.0), ScalarNonlinearity::power(4.0),
                                      ScalarNonlinearity::log_power()}) {
    CAPTURE(f.name());
    double worst = -std::numeric_limits<double>::infinity();
    for (int n = 0; n < 100000; ++n)
      worst = std::max(worst, liu_inequality(f, val(rng), val(rng), sval(rng)));
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("superquadratic defect identity for every HS model") {
  std::mt19937_64 rng(43);
  for (const HamiltonianDensity &d : {HamiltonianDensity::power(4.0), HamiltonianDensity::power(3.0),
                                      HamiltonianDensity::log_quad()}) {
    const EnergyModel m = EnergyModel::hamiltonian(test::hs_split(4, 3), d);
    for (int n = 0; n < 20; ++n) {
      const Eigen::VectorXd c = test::gaussian(rng, m.dimension(), 0.4);
      Eigen::VectorXd g;
      const double phi = m.phi_grad(c, g);
      const double rhs = m.h_tilde_integral(c);
      CHECK(std::abs(phi - 0.5 * g.dot(c) - rhs) <= 1e-9 * (1.0 + std::abs(rhs)));
    }
  }
}

TEST_CASE("model construction errors") {
  CHECK_THROWS_AS(ScalarNonlinearity::power(1.0), Error);
  CHECK_THROWS_AS(HamiltonianDensity::quadratic(-1.0), Error);
  const EnergyModel m = test::es_power(8);
  CHECK_THROWS_AS(m.phi(Eigen::VectorXd::Zero(3)), Error);
  Eigen::VectorXd bad = Eigen::VectorXd::Zero(m.dimension());
  bad(0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(m.phi(bad), Error);
}

} // TEST_SUITE
