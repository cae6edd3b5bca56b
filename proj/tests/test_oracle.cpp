#include <doctest.h>

#include <cmath>
#include <random>

#include "fountain/error.hpp"
#include "fountain/oracle.hpp"
#include "test_support.hpp"

using namespace fountain;
using fountain::test::pi;

namespace {

Eigen::VectorXd oracle_vector(const std::string &key) {
  const auto &v = test::oracle().at(key).at("value");
  Eigen::VectorXd out(v.size());
  for (size_t i = 0; i < v.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
  return out;
}

} // namespace

TEST_SUITE("oracle") {

TEST_CASE("shooting ground states against frozen values") {
  for (const char *key : {"shooting_p4_pi", "shooting_p4_2pi", "shooting_p3_pi", "shooting_p3_2pi"}) {
    CAPTURE(key);
    const auto &params = test::oracle().at(key).at("params");
    const ShootingResult r = shooting_ground_state(params.at("p").get<double>(),
                                                   params.at("length").get<double>());
    CHECK(r.slope == doctest::Approx(test::oracle_value(key, "slope")).epsilon(1e-10));
    CHECK(r.energy == doctest::Approx(test::oracle_value(key, "energy")).epsilon(1e-10));
    CHECK(std::abs(r.boundary_residual) <= 1e-10);
    CHECK(r.energy > 0.0);
  }
}

TEST_CASE("shooting scaling laws") {
  // u_l(x) = (pi/l)^(2/(p-2)) u_pi(pi x / l): energy scales by (pi/l)^((p+2)/(p-2)).
  for (double p : {3.0, 4.0}) {
    const ShootingResult a = shooting_ground_state(p, pi);
    const ShootingResult b = shooting_ground_state(p, 2.0 * pi);
    const double e = (p + 2.0) / (p - 2.0);
    CHECK(b.energy == doctest::Approx(a.energy * std::pow(0.5, e)).epsilon(1e-8));
    CHECK(b.slope == doctest::Approx(a.slope * std::pow(0.5, p / (p - 2.0))).epsilon(1e-8));
  }
  // Virial identity: int u'^2 = int u^p, so E = (1/2 - 1/p) int u^p > 0.
  const ShootingResult r = shooting_ground_state(4.0, pi);
  double up = 0.0;
  for (size_t i = 0; i + 1 < r.x.size(); ++i)
    up += 0.5 * (r.x[i + 1] - r.x[i]) * (std::pow(r.u[i], 4) + std::pow(r.u[i + 1], 4));
  CHECK(r.energy == doctest::Approx(0.25 * up).epsilon(1e-6));
}

TEST_CASE("shooting rejects the linear and degenerate cases") {
  CHECK_THROWS_AS(shooting_ground_state(2.0, pi), Error);
  CHECK_THROWS_AS(shooting_ground_state(4.0, 0.0), Error);
  CHECK_THROWS_AS(shooting_ground_state(4.0, pi, 2), Error);
}

TEST_CASE("finite differences are exact on the quadratic model") {
  const auto split = test::hs_split(3, 2);
  const EnergyModel m = EnergyModel::hamiltonian(split, HamiltonianDensity::zero());
  std::mt19937_64 rng(3);
  for (int n = 0; n < 10; ++n) {
    const ProductPoint z = test::random_point(*split, rng);
    const ProductPoint fd = fd_gradient(m, z, 1e-3);
    CHECK((fd.coeffs - m.grad_phi(z).coeffs).norm() <= 1e-10 * (1.0 + z.coeffs.norm()));
  }
}

TEST_CASE("dense operator check") {
  for (int cutoff : {0, 3, 7}) {
    CAPTURE(cutoff);
    const DenseSpectrum d = dense_operator_check(*test::hs_split(6, cutoff));
    CHECK(d.max_mismatch <= 1e-10);
    CHECK(d.weight_mismatch <= 1e-10);
    CHECK(d.direction_residual <= 1e-10);
    CHECK(d.min_abs > 0.0);
  }
  const DenseSpectrum shifted = dense_operator_check(*test::hs_split(6, 2, -2.5));
  CHECK(shifted.max_mismatch <= 1e-10);
  // lambda_1 + V0 = -1.5 and lambda_2 + V0 = 1.5 bound the spectrum away from 0.
  CHECK(shifted.min_abs == doctest::Approx(1.5).epsilon(1e-12));

  for (double s : {1.0, 1.2, 1.5}) {
    const DenseSpectrum es = dense_operator_check(*test::es_split(12, s, 2.0 - s));
    CHECK(es.max_mismatch <= 1e-10);
    CHECK(es.eigenvalues.cwiseAbs().minCoeff() == doctest::Approx(1.0).epsilon(1e-10));
  }

  CHECK_THROWS_AS(test::hs_split(4, 1, -1.0), AssumptionError);
  CHECK_THROWS_AS(dense_hs_spectrum(DomainSpec::interval(pi), test::interval_basis(4)->indices(),
                                    -1.0, 2.0 * pi, 1),
                  AssumptionError);
  // 2 * 50 * 21 = 2100 raw coefficients.
  try {
    dense_operator_check(*test::hs_split(50, 10));
    FAIL("size cap not enforced");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::SizeCap);
  }
}

TEST_CASE("dense spectra match the frozen tables") {
  const auto b8 = test::interval_basis(8);
  const Eigen::VectorXd s8 = dense_hs_spectrum(b8->domain(), b8->indices(), 0.0, 2.0 * pi, 7);
  const Eigen::VectorXd f8 = oracle_vector("hs_spectrum_8x8");
  REQUIRE(s8.size() == f8.size());
  CHECK((s8 - f8).cwiseAbs().maxCoeff() <= 1e-10);

  const auto b4 = test::interval_basis(4);
  const Eigen::VectorXd sh = dense_hs_spectrum(b4->domain(), b4->indices(), -2.5, 2.0 * pi, 0);
  const Eigen::VectorXd fs = oracle_vector("hs_spectrum_shifted");
  REQUIRE(sh.size() == fs.size());
  CHECK((sh - fs).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("brute embedding bounds the ascent from below") {
  const auto b = test::interval_basis(32);
  const Eigen::VectorXd r4 = oracle_vector("brute_beta_r4");
  const Eigen::VectorXd r2 = oracle_vector("brute_beta_r2");
  for (int k : {0, 1, 4, 9, 16}) {
    CAPTURE(k);
    const double beta4 = embedding_constant(*b, 1.0, 4.0, k).beta;
    CHECK(r4(k) <= beta4 * (1.0 + 1e-10));
    // On L2 the supremum is attained on a single mode, which the sampler hits.
    const double beta2 = embedding_constant(*b, 1.0, 2.0, k).beta;
    CHECK(r2(k) == doctest::Approx(beta2).epsilon(0.02));
    CHECK(r2(k) <= beta2 * (1.0 + 1e-10));
  }
}

TEST_CASE("single-mode tail is exact") {
  const auto b = test::interval_basis(12);
  const int k = b->size() - 1;
  const BruteEmbedding brute = brute_embedding(*b, 1.0, 4.0, k, 200, 5);
  const double beta = embedding_constant(*b, 1.0, 4.0, k).beta;
  CHECK(brute.beta == doctest::Approx(beta).epsilon(1e-12));
}

TEST_CASE("frozen values still reproduce") {
  const ShootingResult r = shooting_ground_state(4.0, pi);
  CHECK(r.energy == doctest::Approx(test::oracle_value("shooting_p4_pi", "energy")).epsilon(1e-12));
  const auto b4 = test::interval_basis(4);
  const Eigen::VectorXd s4 = dense_hs_spectrum(b4->domain(), b4->indices(), 0.0, 2.0 * pi, 3);
  CHECK((s4 - oracle_vector("hs_spectrum_4x4")).cwiseAbs().maxCoeff() <= 1e-12);
  const auto b32 = test::interval_basis(32);
  CHECK(brute_embedding(*b32, 1.0, 4.0, 5, 10000, 11).beta ==
        doctest::Approx(oracle_vector("brute_beta_r4")(5)).epsilon(1e-12));
}

} // TEST_SUITE
