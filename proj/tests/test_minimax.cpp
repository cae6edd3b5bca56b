#include <doctest.h>

#include <cmath>
#include <random>

#include "fountain/error.hpp"
#include "fountain/minimax.hpp"
#include "fountain/oracle.hpp"
#include "test_support.hpp"

using namespace fountain;
using fountain::test::pi;

namespace {

EnergyModel suppressed_es(int n) {
  return EnergyModel::elliptic(test::es_split(n), ScalarNonlinearity::zero(),
                               ScalarNonlinearity::zero());
}

FlowConfig quick_flow() {
  FlowConfig c;
  c.max_iterations = 200;
  return c;
}

} // namespace

TEST_SUITE("minimax") {

TEST_CASE("flow decreases Phi along every trajectory") {
  const EnergyModel m = test::es_power(12);
  std::mt19937_64 rng(51);
  for (int n = 0; n < 20; ++n) {
    CAPTURE(n);
    const Eigen::VectorXd c = test::gaussian(rng, m.dimension(), 0.5);
    FlowConfig cfg;
    cfg.max_iterations = 60;
    const Trajectory tr = integrate_flow(m, c, cfg);
    REQUIRE(tr.phi.size() >= 2);
    for (size_t i = 1; i < tr.phi.size(); ++i)
      CHECK(tr.phi[i] < tr.phi[i - 1]);
    CHECK(tr.phi.front() == doctest::Approx(m.phi(c)).epsilon(1e-14));
  }
}

TEST_CASE("flow is odd") {
  const EnergyModel m = test::es_power(12);
  std::mt19937_64 rng(53);
  FlowConfig cfg;
  cfg.max_iterations = 40;
  for (int n = 0; n < 5; ++n) {
    const Eigen::VectorXd c = test::gaussian(rng, m.dimension(), 0.5);
    const Trajectory a = integrate_flow(m, c, cfg);
    const Trajectory b = integrate_flow(m, Eigen::VectorXd(-c), cfg);
    REQUIRE(a.nodes.size() == b.nodes.size());
    for (size_t i = 0; i < a.nodes.size(); ++i)
      CHECK((a.nodes[i] + b.nodes[i]).norm() <= 1e-10 * (1.0 + a.nodes[i].norm()));
  }
}

TEST_CASE("flow of the quadratic model contracts X+") {
  const EnergyModel m = suppressed_es(8);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(m.dimension());
  c.tail(m.split().plus_count()).setConstant(0.5);
  FlowConfig cfg;
  cfg.max_iterations = 5000;
  cfg.ode_tol = 1e-4;
  const Trajectory tr = integrate_flow(m, c, cfg, 0.02);
  CHECK(tr.stop == FlowStop::Level);
  // Phi = |c|^2 / 2 on X+, and Phi drops by 2 per unit flow time.
  CHECK(tr.nodes.back().norm() <= 0.2);
  CHECK(tr.time.back() == doctest::Approx(0.5 * (m.phi(c) - tr.phi.back())).epsilon(1e-3));
  CHECK(tr.nodes.back().head(m.split().minus_count()).norm() == 0.0);
  CHECK_THROWS_AS(integrate_flow(m, Eigen::VectorXd::Zero(3), FlowConfig{}), Error);
  FlowConfig bad;
  bad.step = -1.0;
  CHECK_THROWS_AS(integrate_flow(m, c, bad), Error);
}

TEST_CASE("geometry of the power system") {
  const EnergyModel m = test::es_power(32);
  double last_b = -std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 8; ++k) {
    CAPTURE(k);
    const GeometryReport g = geometry_check(m, k);
    CHECK(g.pass);
    CHECK(g.b_finite);
    CHECK(g.a < std::min(0.0, g.b));
    CHECK(g.d >= g.a);
    CHECK(g.envelope_valid);
    if (k >= 1)
      CHECK(g.b > last_b);
    last_b = g.b;
  }
}

TEST_CASE("geometry fails for the quadratic model") {
  const GeometryReport g = geometry_check(suppressed_es(8), 1);
  CHECK_FALSE(g.pass);
  CHECK(g.reason == "a_k >= 0");
}

TEST_CASE("growth envelope along rays") {
  for (const HamiltonianDensity &d : {HamiltonianDensity::power(4.0), HamiltonianDensity::log_quad()}) {
    CAPTURE(d.name());
    const double p = density_constants(d).p;
    for (double eps : {1.0, 0.1, 0.01}) {
      const double c = envelope_constant(d, eps);
      REQUIRE(std::isfinite(c));
      for (double lr = -6.0; lr <= 4.0; lr += 0.01) {
        const double r = std::pow(10.0, lr);
        CHECK(d.h(r) * r <= (eps * r + c * std::pow(r, p)) * (1.0 + 1e-12));
      }
    }
  }
  const EnergyModel hs = EnergyModel::hamiltonian(test::hs_split(4, 3), HamiltonianDensity::log_quad());
  const GeometryReport g = geometry_check(hs, 1);
  CHECK(g.pass);
  CHECK(g.eps > 0.0);
  CHECK(g.envelope_c == doctest::Approx(envelope_constant(hs.density(), g.eps)));
}

TEST_CASE("ground state level matches the shooting energy") {
  const EnergyModel m = test::es_power(32);
  const SolveReport r = saddle_solve(m, 0, FlowConfig{});
  CHECK(r.status == SolveStatus::Converged);
  // With u = v the level is twice the scalar energy of -u'' = u^3.
  const double two_e = 2.0 * test::oracle_value("shooting_p4_pi", "energy");
  CHECK(r.level == doctest::Approx(two_e).epsilon(0.01));
  CHECK(r.cerami <= 1e-8);
  REQUIRE(r.residual);
  CHECK(r.residual->rho_u <= 1e-8);

  SolveOptions opt;
  opt.mirror = true;
  const SolveReport mr = saddle_solve(m, 0, FlowConfig{}, opt);
  CHECK(mr.level == doctest::Approx(r.level).epsilon(1e-10));
  CHECK((mr.coords + r.coords).norm() <= 1e-6 * r.coords.norm());
}

TEST_CASE("levels sit between the fountain bounds") {
  const EnergyModel m = test::es_power(16);
  for (int k : {0, 1, 2, 3}) {
    CAPTURE(k);
    SolveOptions opt;
    opt.geometry = geometry_check(m, k);
    const SolveReport r = saddle_solve(m, k, FlowConfig{}, opt);
    CHECK(r.status == SolveStatus::Converged);
    CHECK(r.above_lower_bound);
    CHECK(r.level >= *r.b_k - 1e-8);
    CHECK(r.level <= *r.d_k + 1e-8);
    CHECK(r.level <= r.mesh_peak + 1e-8 * (1.0 + std::abs(r.level)));
  }
}

TEST_CASE("sweep finds increasing nontrivial levels") {
  const EnergyModel m = test::es_power(16);
  const SweepResult sw = multiplicity_sweep(m, {0, 2, 4}, FlowConfig{}, 2);
  REQUIRE(sw.reports.size() == 3);
  CHECK(sw.distinct_levels.size() >= 3);
  for (size_t i = 1; i < sw.distinct_levels.size(); ++i)
    CHECK(sw.distinct_levels[i] > sw.distinct_levels[i - 1]);
  for (const SolveReport &r : sw.reports) {
    CHECK(r.l2_norm > 0.1);
    CHECK(r.level > 0.0);
  }
  // Identical requests collapse to one level.
  const SweepResult same = multiplicity_sweep(m, {0, 0}, FlowConfig{}, 1, {}, false);
  CHECK(same.distinct_levels.size() == 1);
  CHECK_THROWS_AS(multiplicity_sweep(m, {0, 1}, FlowConfig{}, 1, {std::nullopt}), Error);
}

TEST_CASE("strong residual") {
  const EnergyModel m = test::es_power(16);
  const StrongResidual zero = strong_residual(m, m.split().zero());
  CHECK(zero.rho_u == 0.0);
  CHECK(zero.rho_v == 0.0);
  std::mt19937_64 rng(57);
  const StrongResidual rnd = strong_residual(m, test::random_point(m.split(), rng));
  CHECK(rnd.rho_u > 0.1);
  CHECK(rnd.rho_v > 0.1);
  CHECK_THROWS_AS(strong_residual(m, m.split().zero(), 0), Error);
  const EnergyModel hs = EnergyModel::hamiltonian(test::hs_split(3, 1), HamiltonianDensity::power(4.0));
  CHECK_THROWS_AS(strong_residual(hs, hs.split().zero()), Error);
}

TEST_CASE("strong residual improves with the truncation") {
  // Values below the floor count as converged; the ground state is analytic.
  const double floor = 1e-11;
  for (int k : {0, 2}) {
    CAPTURE(k);
    double last = std::numeric_limits<double>::infinity();
    for (int n : {16, 32, 64}) {
      const SolveReport r = saddle_solve(test::es_power(n), k, FlowConfig{});
      REQUIRE(r.residual);
      const double rho = std::max(r.residual->rho_u, r.residual->rho_v);
      CHECK((rho <= last || rho <= floor));
      last = rho;
    }
    CHECK(last <= floor);
  }
}

TEST_CASE("dual geometry") {
  const EnergyModel quad = suppressed_es(8).dual();
  for (double r : {0.5, 1.0, 3.0}) {
    const DualGeometryReport g = dual_geometry_check(quad, 2, r, 2.0 * r);
    CHECK(g.b == doctest::Approx(0.5 * r * r).epsilon(1e-8));
  }
  CHECK_THROWS_AS(dual_geometry_check(suppressed_es(8), 1, 1.0, 2.0), Error);

  const EnergyModel concave = EnergyModel::elliptic(test::es_split(12), ScalarNonlinearity::concave(1.5),
                                                    ScalarNonlinearity::concave(1.5))
                                  .dual();
  double last = -std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 4; ++k) {
    CAPTURE(k);
    const DualGeometryReport g = dual_geometry_check(concave, k, 0.1, 1.0);
    CHECK(g.d <= g.a + 1e-10);
    CHECK(g.a <= g.a_sup + 1e-10);
    CHECK(g.d >= last - 1e-10);
    last = g.d;
  }
}

} // TEST_SUITE
