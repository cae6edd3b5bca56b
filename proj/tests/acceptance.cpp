// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "fountain/minimax.hpp"
#include "fountain/oracle.hpp"
#include "fountain/runner.hpp"
#include "test_support.hpp"

using namespace fountain;
using fountain::test::pi;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string &what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

RunConfig fixture(const char *name) {
  return load_config(std::string(FOUNTAIN_CONFIG_DIR "/") + name);
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// 1/2 <Lz, z> assembled from raw coefficients mode by mode.
double hs_form(const SplitSpace &sp, const ProductPoint &z) {
  double q = 0.0;
  for (int j = 0; j < sp.basis().size(); ++j) {
    const double sigma = sp.basis().eigenvalue(j) + sp.potential_shift();
    q += sigma * z.coeffs(sp.raw_index(0, j, 0)) * z.coeffs(sp.raw_index(1, j, 0));
    for (int k = 1; k <= sp.temporal_cutoff(); ++k) {
      const double w = 2.0 * pi * k / sp.period();
      const double uc = z.coeffs(sp.raw_index(0, j, 2 * k - 1)), us = z.coeffs(sp.raw_index(0, j, 2 * k));
      const double vc = z.coeffs(sp.raw_index(1, j, 2 * k - 1)), vs = z.coeffs(sp.raw_index(1, j, 2 * k));
      q += uc * (sigma * vc - w * vs) + us * (sigma * vs + w * vc);
    }
  }
  return q;
}

/// int A^s u A^t v for s + t = 2.
double es_form(const SplitSpace &sp, const ProductPoint &z) {
  const int n = sp.basis().size();
  double q = 0.0;
  for (int j = 0; j < n; ++j)
    q += sp.basis().eigenvalue(j) * z.coeffs(j) * z.coeffs(n + j);
  return q;
}

Outcome spectral_suite() {
  Outcome o;
  double lam_err = 0.0;
  const auto b = test::interval_basis(64);
  for (int j = 0; j < b->size(); ++j)
    lam_err = std::max(lam_err, std::abs(b->eigenvalue(j) - (j + 1.0) * (j + 1.0)) / ((j + 1.0) * (j + 1.0)));
  const EigenBasis rect = build_basis(DomainSpec::rectangle(pi, 2.0 * pi), 40, 8);
  for (int j = 0; j < rect.size(); ++j) {
    const auto [m, n] = rect.indices()[j];
    const double want = m * m + 0.25 * n * n;
    lam_err = std::max(lam_err, std::abs(rect.eigenvalue(j) - want) / want);
  }
  o.require(lam_err <= 1e-13, "eigenvalue error " + sci(lam_err));

  std::mt19937_64 rng(101);
  double semi = 0.0;
  for (int n = 0; n < 100; ++n) {
    CoeffVec u = zero_coeff(*b);
    u.a = test::gaussian(rng, b->size());
    const CoeffVec ab = apply_fractional(*b, 0.7, apply_fractional(*b, 0.6, u));
    const CoeffVec direct = apply_fractional(*b, 1.3, u);
    const CoeffVec inv = apply_fractional(*b, -1.3, direct);
    semi = std::max({semi, (ab.a - direct.a).cwiseAbs().cwiseQuotient(direct.a.cwiseAbs()).maxCoeff(),
                     (inv.a - u.a).cwiseAbs().cwiseQuotient(u.a.cwiseAbs()).maxCoeff()});
  }
  o.require(semi <= 1e-14, "semigroup/inverse error " + sci(semi));

  double proj = 0.0, form = 0.0;
  for (const auto &sp : {test::es_split(12), test::es_split(12, 1.3, 0.7), test::hs_split(4, 3),
                         test::hs_split(4, 3, -2.5)}) {
    for (int n = 0; n < 100; ++n) {
      const ProductPoint z = test::random_point(*sp, rng);
      const Projection pr = project_pm(*sp, z);
      const double zz = sp->norm(z) * sp->norm(z);
      const double np = sp->norm(pr.plus), nm = sp->norm(pr.minus);
      proj = std::max({proj, (pr.plus.coeffs + pr.minus.coeffs - z.coeffs).norm() / z.coeffs.norm(),
                       std::abs(sp->inner(pr.plus, pr.minus)) / zz});
      const double q = sp->problem() == Problem::ES ? es_form(*sp, z) : hs_form(*sp, z);
      form = std::max(form, std::abs(0.5 * np * np - 0.5 * nm * nm - q) / (np * np + nm * nm));
    }
  }
  o.require(proj <= 1e-10, "projector error " + sci(proj));
  o.require(form <= 1e-10, "quadratic form error " + sci(form));

  // Frozen dense spectrum of L on 8 spatial x 8 temporal functions (K = 7).
  const auto hs = test::hs_split(8, 7);
  std::vector<double> mine;
  for (const Direction &d : hs->plus())
    mine.push_back(d.mu);
  for (const Direction &d : hs->minus())
    mine.push_back(-d.mu);
  std::sort(mine.begin(), mine.end());
  const auto &frozen = test::oracle().at("hs_spectrum_8x8").at("value");
  double spec = frozen.size() == mine.size() ? 0.0 : INFINITY;
  for (size_t i = 0; i < mine.size() && i < frozen.size(); ++i)
    spec = std::max(spec, std::abs(mine[i] - frozen[i].get<double>()));
  const DenseSpectrum dense = dense_operator_check(*hs);
  spec = std::max(spec, dense.max_mismatch);
  o.require(spec <= 1e-10, "HS block spectrum error " + sci(spec));
  if (o.pass)
    o.detail = "eig " + sci(lam_err) + ", semigroup " + sci(semi) + ", projector " + sci(proj) +
               ", form " + sci(form) + ", HS spectrum " + sci(spec);
  return o;
}

Outcome gradient_suite() {
  Outcome o;
  const std::pair<const char *, EnergyModel> models[] = {
      {"ES power", test::es_power(16)},
      {"ES log_power", EnergyModel::elliptic(test::es_split(16), ScalarNonlinearity::log_power(),
                                             ScalarNonlinearity::log_power())},
      {"HS power", EnergyModel::hamiltonian(test::hs_split(4, 3), HamiltonianDensity::power(4.0))},
      {"HS log_quad", EnergyModel::hamiltonian(test::hs_split(4, 3), HamiltonianDensity::log_quad())},
  };
  std::mt19937_64 rng(103);
  double worst = 0.0;
  for (const auto &[name, m] : models) {
    double w = 0.0;
    for (int n = 0; n < 50; ++n) {
      const ProductPoint z = m.split().point(test::gaussian(rng, m.dimension(), 0.3));
      const Eigen::VectorXd an = m.grad_phi(z).coeffs;
      w = std::max(w, (fd_gradient(m, z, 1e-5).coeffs - an).norm() / an.norm());
    }
    o.require(w <= 1e-6, std::string(name) + " relative error " + sci(w));
    worst = std::max(worst, w);
  }
  if (o.pass)
    o.detail = "worst relative error " + sci(worst) + " over 4 models x 50 points";
  return o;
}

Outcome inequality_suite() {
  Outcome o;
  std::mt19937_64 rng(107);
  std::uniform_real_distribution<double> val(-4.0, 4.0), sv(-1.0, 6.0);
  double liu = -INFINITY;
  for (const ScalarNonlinearity &f : {ScalarNonlinearity::power(3.0), ScalarNonlinearity::power(4.0),
                                      ScalarNonlinearity::log_power()})
    for (int n = 0; n < 100000; ++n)
      liu = std::max(liu, liu_inequality(f, val(rng), val(rng), sv(rng)));
  o.require(liu <= 1e-12, "Liu inequality max " + sci(liu));

  double defect = -INFINITY;
  int envelopes = 0;
  for (const HamiltonianDensity &d : {HamiltonianDensity::power(4.0), HamiltonianDensity::log_quad()}) {
    const DensityConstants c = density_constants(d);
    std::uniform_real_distribution<double> lr(std::log(c.R), std::log(1e4));
    for (int n = 0; n < 100000; ++n) {
      const double r = std::exp(lr(rng));
      defect = std::max(defect, (c.a1 * r * r - d.H_tilde(r)) / (r * r));
    }
    for (const GrowthEntry &e : check_growth(d).entries)
      if (e.condition.rfind("envelope", 0) == 0) {
        ++envelopes;
        o.require(e.pass && std::isfinite(e.constant), d.name() + " " + e.condition + " fails");
      }
  }
  o.require(defect <= 1e-12, "a1 r^2 - H tilde max " + sci(defect));
  o.require(envelopes == 6, "expected 3 envelope certificates per density");
  if (o.pass)
    o.detail = "Liu max " + sci(liu) + ", defect max " + sci(defect) + ", 6 envelopes certified";
  return o;
}

Outcome geometry_suite() {
  Outcome o;
  const auto b = test::interval_basis(32);
  double last = INFINITY, r2 = 0.0;
  for (int k = 0; k <= 16; ++k) {
    const double beta = embedding_constant(*b, 1.0, 4.0, k).beta;
    o.require(beta < last, "beta not decreasing at k = " + std::to_string(k));
    last = beta;
    r2 = std::max(r2, std::abs(embedding_constant(*b, 1.0, 2.0, k).beta * std::sqrt(b->eigenvalue(k)) - 1.0));
  }
  o.require(r2 <= 1e-8, "r = 2 tail constant error " + sci(r2));

  const RunConfig es = fixture("es_interval.ini");
  const BuiltModel em = build_model(es);
  double last_b = -INFINITY;
  for (int k = 0; k <= 8; ++k) {
    const GeometryReport g = geometry_check(*em.model, k, es.geometry);
    o.require(g.b > last_b, "b_k not increasing at k = " + std::to_string(k));
    last_b = g.b;
    if (std::find(es.k_list.begin(), es.k_list.end(), k) != es.k_list.end())
      o.require(g.pass, "ES fixture geometry fails at k = " + std::to_string(k));
  }
  const RunConfig hs = fixture("hs_log_quad.ini");
  const BuiltModel hm = build_model(hs);
  for (int k : hs.k_list)
    o.require(geometry_check(*hm.model, k, hs.geometry).pass,
              "HS fixture geometry fails at k = " + std::to_string(k));

  RunConfig zero = es;
  zero.model = "zero";
  const GeometryReport zg = geometry_check(*build_model(zero).model, 2, zero.geometry);
  o.require(!zg.pass, "suppressed model passes the geometry check");
  if (o.pass)
    o.detail = "beta decreasing k = 0..16, r = 2 error " + sci(r2) +
               ", b_k increasing k = 0..8, fixtures certified, control fails (" + zg.reason + ")";
  return o;
}

Outcome flow_suite() {
  Outcome o;
  const EnergyModel m = test::es_power(16);
  std::mt19937_64 rng(109);
  FlowConfig cfg;
  cfg.max_iterations = 60;
  int steps = 0;
  double odd = 0.0;
  for (int n = 0; n < 20; ++n) {
    const Eigen::VectorXd c = test::gaussian(rng, m.dimension(), 0.5);
    const Trajectory a = integrate_flow(m, c, cfg);
    const Trajectory b = integrate_flow(m, Eigen::VectorXd(-c), cfg);
    for (size_t i = 1; i < a.phi.size(); ++i, ++steps)
      o.require(a.phi[i] <= a.phi[i - 1], "Phi increased along an accepted step");
    o.require(a.nodes.size() == b.nodes.size(), "mirrored trajectory has a different length");
    for (size_t i = 0; i < std::min(a.nodes.size(), b.nodes.size()); ++i)
      odd = std::max(odd, (a.nodes[i] + b.nodes[i]).norm() / (1.0 + a.nodes[i].norm()));
  }
  o.require(odd <= 1e-10, "odd-symmetry error " + sci(odd));

  const EnergyModel q = EnergyModel::elliptic(test::es_split(8), ScalarNonlinearity::zero(),
                                              ScalarNonlinearity::zero());
  Eigen::VectorXd c = Eigen::VectorXd::Zero(q.dimension());
  c.tail(q.split().plus_count()).setConstant(0.5);
  FlowConfig qc;
  qc.max_iterations = 5000;
  qc.ode_tol = 1e-4;
  const Trajectory tr = integrate_flow(q, c, qc, 1e-2);
  o.require(tr.stop == FlowStop::Level && tr.phi.back() <= 1e-2,
            "suppressed flow stalled at Phi = " + sci(tr.phi.back()));
  if (o.pass)
    o.detail = std::to_string(steps) + " accepted steps monotone, odd error " + sci(odd) +
               ", suppressed flow reached Phi = " + sci(tr.phi.back());
  return o;
}

Outcome solver_oracle() {
  Outcome o;
  const double ref = 2.0 * test::oracle_value("shooting_p4_pi", "energy");
  double level32 = 0.0, last = INFINITY;
  std::string trend;
  for (int n : {16, 32, 64}) {
    const SolveReport r = saddle_solve(test::es_power(n), 0, FlowConfig{});
    o.require(r.status == SolveStatus::Converged, "N = " + std::to_string(n) + " did not converge");
    const double rho = std::max(r.residual->rho_u, r.residual->rho_v);
    o.require(rho <= 1e-3, "residual " + sci(rho) + " at N = " + std::to_string(n));
    // Values below the floor sit at roundoff and count as converged.
    o.require(rho <= last || rho <= 1e-11, "residual grew at N = " + std::to_string(n));
    last = rho;
    trend += (trend.empty() ? "" : " ") + sci(rho);
    if (n == 32)
      level32 = r.level;
  }
  const double rel = std::abs(level32 - ref) / ref;
  o.require(rel <= 0.01, "level " + sci(level32) + " vs reference " + sci(ref));
  if (o.pass)
    o.detail = "level " + std::to_string(level32) + " vs " + std::to_string(ref) + " (rel " + sci(rel) +
               "), residuals " + trend;
  return o;
}

void certify_sweep(Outcome &o, const EnergyModel &m, const SweepResult &sw, size_t need,
                   const FlowConfig &flow, const std::string &tag) {
  o.require(sw.distinct_levels.size() >= need, tag + ": only " + std::to_string(sw.distinct_levels.size()) +
                                                   " distinct levels");
  for (size_t i = 1; i < sw.distinct_levels.size(); ++i)
    o.require(sw.distinct_levels[i] > sw.distinct_levels[i - 1], tag + ": levels not increasing");
  for (const SolveReport &r : sw.reports) {
    o.require(r.status == SolveStatus::Converged && r.cerami <= flow.stop_tol,
              tag + ": k = " + std::to_string(r.k) + " not certified");
    o.require(r.l2_norm > 0.0, tag + ": trivial solution reported");
    const Eigen::VectorXd minus = -r.coords;
    o.require(std::abs(m.phi(minus) - r.level) <= 1e-12 * (1.0 + std::abs(r.level)) &&
                  m.cerami(minus) <= flow.stop_tol,
              tag + ": antipodal partner fails at k = " + std::to_string(r.k));
  }
}

Outcome multiplicity() {
  Outcome o;
  const RunConfig es = fixture("es_interval.ini");
  const BuiltModel em = build_model(es);
  const SweepResult esw = multiplicity_sweep(*em.model, es.k_list, es.flow, es.jobs);
  certify_sweep(o, *em.model, esw, 3, es.flow, "ES");

  const RunConfig hs = fixture("hs_log_quad.ini");
  const BuiltModel hm = build_model(hs);
  const SweepResult hsw = multiplicity_sweep(*hm.model, hs.k_list, hs.flow, hs.jobs);
  certify_sweep(o, *hm.model, hsw, 2, hs.flow, "HS");
  if (o.pass) {
    o.detail = "ES levels";
    for (double l : esw.distinct_levels)
      o.detail += " " + sci(l);
    o.detail += ", HS levels";
    for (double l : hsw.distinct_levels)
      o.detail += " " + sci(l);
  }
  return o;
}

Outcome defect_identity() {
  Outcome o;
  std::mt19937_64 rng(113);
  double worst = 0.0;
  for (const HamiltonianDensity &d : {HamiltonianDensity::power(4.0), HamiltonianDensity::power(3.0),
                                      HamiltonianDensity::log_quad(), HamiltonianDensity::quadratic(1.0),
                                      HamiltonianDensity::zero()}) {
    const EnergyModel m = EnergyModel::hamiltonian(test::hs_split(4, 3, 0.0), d);
    for (int n = 0; n < 50; ++n) {
      const Eigen::VectorXd c = test::gaussian(rng, m.dimension(), 0.5);
      Eigen::VectorXd g;
      const double phi = m.phi_grad(c, g);
      const double rhs = m.h_tilde_integral(c);
      worst = std::max(worst, std::abs(phi - 0.5 * g.dot(c) - rhs) / (1.0 + std::abs(rhs)));
    }
  }
  o.require(worst <= 1e-9, "identity error " + sci(worst));
  if (o.pass)
    o.detail = "worst error " + sci(worst) + " over 5 densities x 50 points";
  return o;
}

Outcome reproducibility() {
  Outcome o;
  const fs::path root = fs::temp_directory_path() / "fountain_acceptance";
  fs::remove_all(root);
  std::ostringstream log;
  std::vector<std::string> files;
  for (const char *run : {"a", "b"}) {
    RunConfig c = fixture("es_interval.ini");
    c.output = (root / run).string();
    o.require(run_command("solve", c, log) == ExitOk, std::string("run ") + run + " failed");
  }
  for (const auto &entry : fs::directory_iterator(root / "a"))
    if (entry.path().extension() == ".csv")
      files.push_back(entry.path().filename().string());
  std::sort(files.begin(), files.end());
  o.require(!files.empty(), "no summary files written");
  for (const std::string &f : files)
    o.require(slurp(root / "a" / f) == slurp(root / "b" / f), f + " differs");
  fs::remove_all(root);
  if (o.pass)
    o.detail = std::to_string(files.size()) + " CSV outputs byte-identical";
  return o;
}

} // namespace

int main() {
  const std::function<Outcome()> criteria[] = {spectral_suite, gradient_suite, inequality_suite,
                                               geometry_suite, flow_suite,     solver_oracle,
                                               multiplicity,   defect_identity, reproducibility};
  int failed = 0;
  for (size_t i = 0; i < std::size(criteria); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception &e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %zu: %s (%.1f s) %s\n", i + 1, o.pass ? "PASS" : "FAIL", secs,
                o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
