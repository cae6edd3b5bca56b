#ifndef FOUNTAIN_TEST_SUPPORT_HPP
#define FOUNTAIN_TEST_SUPPORT_HPP

#include <fstream>
#include <memory>
#include <numbers>
#include <random>
#include <string>

#include <json.hpp>

#include "fountain/energy.hpp"

namespace fountain::test {

constexpr double pi = std::numbers::pi;

/// Frozen oracle values; see tools/freeze_oracles.cpp.
inline const nlohmann::json &oracle() {
  static const nlohmann::json data = [] {
    std::ifstream in(FOUNTAIN_TEST_DATA "/oracle.json");
    return nlohmann::json::parse(in);
  }();
  return data;
}

inline double oracle_value(const std::string &key, const std::string &field = "") {
  const nlohmann::json &v = oracle().at(key).at("value");
  return field.empty() ? v.get<double>() : v.at(field).get<double>();
}

inline std::shared_ptr<const EigenBasis> interval_basis(int n, double len = pi, int over = 8) {
  return std::make_shared<const EigenBasis>(build_basis(DomainSpec::interval(len), n, over));
}

inline std::shared_ptr<const SplitSpace> es_split(int n, double s = 1.0, double t = 1.0) {
  return std::make_shared<const SplitSpace>(build_es_split(interval_basis(n), s, t));
}

inline std::shared_ptr<const SplitSpace> hs_split(int n, int cutoff, double shift = 0.0,
                                                  double period = 2.0 * pi) {
  return std::make_shared<const SplitSpace>(
      build_hs_split(interval_basis(n), shift, period, cutoff));
}

inline EnergyModel es_power(int n, double p = 4.0, double q = 4.0) {
  return EnergyModel::elliptic(es_split(n), ScalarNonlinearity::power(p),
                               ScalarNonlinearity::power(q));
}

inline Eigen::VectorXd gaussian(std::mt19937_64 &rng, int n, double scale = 1.0) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i)
    v(i) = scale * normal(rng);
  return v;
}

inline ProductPoint random_point(const SplitSpace &split, std::mt19937_64 &rng,
                                 double scale = 1.0) {
  ProductPoint z = split.zero();
  z.coeffs = gaussian(rng, static_cast<int>(z.coeffs.size()), scale);
  return z;
}

} // namespace fountain::test

#endif
