// Runs the independent oracles once and writes their values, each with the
// invocation that produced it, to a JSON file consumed by the test suite.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "fountain/oracle.hpp"
#include "fountain/spectral.hpp"

using nlohmann::json;

namespace {

constexpr double pi = std::numbers::pi;

json entry(const std::string &op, json params, json value) {
  return {{"op", op}, {"params", std::move(params)}, {"value", std::move(value)}};
}

/// Composite Simpson on [a, b] with n (even) panels.
template <class F> double simpson(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i)
    s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

} // namespace

int main(int argc, char **argv) {
  if (argc != 2) {
    std::cerr << "usage: freeze_oracles OUTPUT.json\n";
    return 2;
  }
  json out;
  out["format_version"] = 1;

  // Ground state of -u'' = |u|^(p-2) u; the l = 2 pi run checks the scaling law.
  for (double p : {3.0, 4.0}) {
    for (double len : {pi, 2.0 * pi}) {
      const fountain::ShootingResult sh = fountain::shooting_ground_state(p, len);
      const std::string key = "shooting_p" + std::to_string(static_cast<int>(p)) +
                              (len > 4.0 ? "_2pi" : "_pi");
      out[key] = entry("shooting_ground_state", {{"p", p}, {"length", len}, {"steps", 20000}},
                       {{"slope", sh.slope},
                        {"energy", sh.energy},
                        {"boundary_residual", sh.boundary_residual}});
    }
  }

  // Space-time spectrum of L on (0, pi), T = 2 pi, assembled densely.
  for (auto [n, k] : {std::pair{8, 7}, std::pair{4, 3}}) {
    const fountain::EigenBasis b = fountain::build_basis(fountain::DomainSpec::interval(pi), n, 8);
    const Eigen::VectorXd ev =
        fountain::dense_hs_spectrum(b.domain(), b.indices(), 0.0, 2.0 * pi, k);
    out["hs_spectrum_" + std::to_string(n) + "x" + std::to_string(k + 1)] =
        entry("dense_hs_spectrum",
              {{"domain", "interval"}, {"length", pi}, {"modes", n}, {"shift", 0.0},
               {"period", 2.0 * pi}, {"cutoff", k}},
              std::vector<double>(ev.data(), ev.data() + ev.size()));
  }
  {
    const fountain::EigenBasis b = fountain::build_basis(fountain::DomainSpec::interval(pi), 4, 8);
    const Eigen::VectorXd ev =
        fountain::dense_hs_spectrum(b.domain(), b.indices(), -2.5, 2.0 * pi, 0);
    out["hs_spectrum_shifted"] =
        entry("dense_hs_spectrum",
              {{"domain", "interval"}, {"length", pi}, {"modes", 4}, {"shift", -2.5},
               {"period", 2.0 * pi}, {"cutoff", 0}},
              std::vector<double>(ev.data(), ev.data() + ev.size()));
  }

  // Lower bounds for the tail embedding constants on (0, pi), N = 32, s = 1.
  {
    const fountain::EigenBasis b = fountain::build_basis(fountain::DomainSpec::interval(pi), 32, 8);
    std::vector<double> r4, r2;
    for (int k = 0; k <= 16; ++k) {
      r4.push_back(fountain::brute_embedding(b, 1.0, 4.0, k, 10000, 11).beta);
      r2.push_back(fountain::brute_embedding(b, 1.0, 2.0, k, 10000, 11).beta);
    }
    const json params = {{"domain", "interval"}, {"length", pi}, {"modes", 32}, {"s", 1.0},
                         {"k", "0..16"}, {"samples", 10000}, {"seed", 11}};
    json p4 = params, p2 = params;
    p4["r"] = 4.0;
    p2["r"] = 2.0;
    out["brute_beta_r4"] = entry("brute_embedding", p4, r4);
    out["brute_beta_r2"] = entry("brute_embedding", p2, r2);
  }

  // Quadrature references computed from closed-form eigenfunctions only.
  {
    auto phi = [](int j, double x) { return std::sqrt(2.0 / pi) * std::sin(j * x); };
    const double quartic = simpson([&](double x) { return std::pow(phi(1, x), 4); }, 0.0, pi, 20000);
    out["int_phi1_4"] = entry("simpson", {{"integrand", "phi_1^4"}, {"panels", 20000}}, quartic);
    // Phi(phi_1, phi_1) for p = q = 4, s = t = 1: 1 - 2 * (1/4) int phi_1^4.
    out["es_phi_phi1_phi1"] =
        entry("simpson", {{"integrand", "1 - 2 * phi_1^4 / 4"}, {"panels", 20000}},
              1.0 - 0.5 * quartic);
    // A^2 phi_2 = lambda_2 phi_2 with lambda_2 = 4.
    const double a2 = simpson([&](double x) { return std::pow(4.0 * phi(2, x), 2); }, 0.0, pi, 20000);
    out["es_norm2_e2_s2"] =
        entry("simpson", {{"integrand", "(4 phi_2)^2"}, {"panels", 20000}}, a2);
    std::vector<double> ones;
    for (int j = 1; j <= 8; ++j)
      ones.push_back(simpson([&](double x) { return phi(j, x); }, 0.0, pi, 20000));
    out["analyze_constant_one"] =
        entry("simpson", {{"integrand", "phi_j, j = 1..8"}, {"panels", 20000}}, ones);
  }

  std::ofstream f(argv[1]);
  if (!f) {
    std::cerr << "cannot write " << argv[1] << "\n";
    return 1;
  }
  f << out.dump(2) << "\n";
  return 0;
}
