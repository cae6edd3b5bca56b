#include "fountain/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "fountain/error.hpp"
#include "fountain/oracle.hpp"

namespace fountain {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------- parsing

/// "2.5", "pi", "2pi", "2*pi", "pi/2", "3pi/4".
double parse_number(std::string text, const std::string &key) {
  boost::algorithm::trim(text);
  boost::algorithm::to_lower(text);
  const auto fail = [&] {
    return Error(ErrorCode::Config, "cannot read a number for '" + key + "': " + text);
  };
  const std::size_t pos = text.find("pi");
  try {
    if (pos == std::string::npos) {
      std::size_t used = 0;
      const double v = std::stod(text, &used);
      if (used != text.size())
        throw fail();
      return v;
    }
    std::string head = text.substr(0, pos), tail = text.substr(pos + 2);
    boost::algorithm::trim(head);
    boost::algorithm::trim(tail);
    if (!head.empty() && head.back() == '*')
      head.pop_back();
    double v = std::numbers::pi * (head.empty() ? 1.0 : std::stod(head));
    if (!tail.empty()) {
      if (tail.front() != '/')
        throw fail();
      v /= std::stod(tail.substr(1));
    }
    return v;
  } catch (const std::logic_error &) {
    throw fail();
  }
}

int parse_int(const std::string &text, const std::string &key) {
  const double v = parse_number(text, key);
  if (v != std::floor(v) || std::abs(v) > 1e9)
    throw Error(ErrorCode::Config, "'" + key + "' must be an integer");
  return static_cast<int>(v);
}

bool parse_bool(std::string text, const std::string &key) {
  boost::algorithm::trim(text);
  boost::algorithm::to_lower(text);
  if (text == "true" || text == "yes" || text == "1" || text == "on")
    return true;
  if (text == "false" || text == "no" || text == "0" || text == "off")
    return false;
  throw Error(ErrorCode::Config, "'" + key + "' must be a boolean");
}

std::vector<int> parse_int_list(const std::string &text, const std::string &key) {
  std::vector<std::string> parts;
  boost::algorithm::split(parts, text, boost::is_any_of(", "), boost::token_compress_on);
  std::vector<int> out;
  for (auto &p : parts) {
    boost::algorithm::trim(p);
    if (!p.empty())
      out.push_back(parse_int(p, key));
  }
  return out;
}

std::string lower(std::string s) {
  boost::algorithm::trim(s);
  boost::algorithm::to_lower(s);
  return s;
}

// ---------------------------------------------------------------- output

void ensure_dir(const std::string &dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw Error(ErrorCode::Io, "cannot create output directory " + dir + ": " + ec.message());
}

void write_text(const fs::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
}

std::string g12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Runs fn(i) for i < n on up to `jobs` threads; the first exception in
/// index order is rethrown.
void parallel_for(int n, int jobs, const std::function<void(int)> &fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int i = 1; i < std::min(jobs, n); ++i)
    pool.emplace_back(worker);
  worker();
  for (auto &t : pool)
    t.join();
  for (auto &e : errors)
    if (e)
      std::rethrow_exception(e);
}

json vec_json(const Eigen::VectorXd &v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

ScalarNonlinearity es_side(const RunConfig &c, double exponent) {
  if (c.model == "power")
    return ScalarNonlinearity::power(exponent);
  if (c.model == "log_power")
    return ScalarNonlinearity::log_power();
  return ScalarNonlinearity::zero();
}

HamiltonianDensity hs_density(const RunConfig &c) {
  if (c.model == "power")
    return HamiltonianDensity::power(c.mu);
  if (c.model == "log_quad")
    return HamiltonianDensity::log_quad();
  if (c.model == "quadratic")
    return HamiltonianDensity::quadratic(c.quadratic_c);
  return HamiltonianDensity::zero();
}

DomainSpec domain_of(const RunConfig &c) {
  return c.shape == "rectangle" ? DomainSpec::rectangle(c.length_x, c.length_y)
                                : DomainSpec::interval(c.length_x);
}

json geometry_json(const GeometryReport &g) {
  json j = {{"k", g.k},           {"beta", g.beta},   {"r", g.r},
            {"rho", g.rho},       {"a", g.a},         {"b", g.b},
            {"d", g.d},           {"a1", g.a1},       {"b_finite", g.b_finite},
            {"pass", g.pass},     {"reason", g.reason}};
  if (g.beta_u > 0.0 || g.beta_v > 0.0) {
    j["beta_u"] = g.beta_u;
    j["beta_v"] = g.beta_v;
  }
  if (g.eps > 0.0) {
    j["eps"] = g.eps;
    j["envelope_c"] = g.envelope_c;
  }
  j["envelope"] = {{"valid", g.envelope_valid},
                   {"delta", g.delta},
                   {"c_delta", g.c_delta},
                   {"radius", g.envelope_radius}};
  return j;
}

std::vector<GeometryReport> run_geometry(const RunConfig &config, const EnergyModel &model) {
  std::vector<GeometryReport> reps(config.k_list.size());
  GeometryOptions opt = config.geometry;
  opt.seed = config.seed;
  parallel_for(static_cast<int>(reps.size()), config.jobs,
               [&](int i) { reps[i] = geometry_check(model, config.k_list[i], opt); });
  return reps;
}

void write_geometry(const RunConfig &config, const std::vector<GeometryReport> &reps,
                    std::ostream &log) {
  std::string csv = "k,beta,r,rho,a,b,d,a1,pass,reason\n";
  for (const auto &g : reps) {
    write_text(fs::path(config.output) / ("geometry_" + std::to_string(g.k) + ".json"),
               geometry_json(g).dump(2) + "\n");
    csv += std::to_string(g.k) + "," + g12(g.beta) + "," + g12(g.r) + "," + g12(g.rho) + "," +
           g12(g.a) + "," + g12(g.b) + "," + g12(g.d) + "," + (g.a1 ? "1" : "0") + "," +
           (g.pass ? "1" : "0") + "," + g.reason + "\n";
    log << "geometry k=" << g.k << " b=" << g12(g.b) << " a=" << g12(g.a) << " rho=" << g12(g.rho)
        << (g.pass ? " pass" : " FAIL (" + g.reason + ")") << "\n";
  }
  write_text(fs::path(config.output) / "geometry.csv", csv);
}

} // namespace

// ---------------------------------------------------------------- config

RunConfig parse_config(const std::string &text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error &e) {
    throw Error(ErrorCode::Config, std::string("malformed configuration: ") + e.message());
  }
  RunConfig c;
  using Setter = std::function<void(const std::string &, const std::string &)>;
  const std::map<std::string, std::map<std::string, Setter>> keys = {
      {"problem",
       {{"type", [&](auto &v, auto &) { c.problem = problem_from_string(lower(v) == "es" ? "ES" : lower(v) == "hs" ? "HS" : v); }}}},
      {"domain",
       {{"shape", [&](auto &v, auto &) { c.shape = lower(v); }},
        {"length", [&](auto &v, auto &k) { c.length_x = c.length_y = parse_number(v, k); }},
        {"length_x", [&](auto &v, auto &k) { c.length_x = parse_number(v, k); }},
        {"length_y", [&](auto &v, auto &k) { c.length_y = parse_number(v, k); }}}},
      {"truncation",
       {{"modes", [&](auto &v, auto &k) { c.modes = parse_int(v, k); }},
        {"oversampling", [&](auto &v, auto &k) { c.oversampling = parse_int(v, k); }},
        {"temporal_cutoff", [&](auto &v, auto &k) { c.temporal_cutoff = parse_int(v, k); }},
        {"period", [&](auto &v, auto &k) { c.period = parse_number(v, k); }},
        {"time_nodes", [&](auto &v, auto &k) { c.time_nodes = parse_int(v, k); }}}},
      {"operator",
       {{"s", [&](auto &v, auto &k) { c.s = parse_number(v, k); }},
        {"t", [&](auto &v, auto &k) { c.t = parse_number(v, k); }},
        {"potential_shift", [&](auto &v, auto &k) { c.potential_shift = parse_number(v, k); }}}},
      {"model",
       {{"name", [&](auto &v, auto &) { c.model = lower(v); }},
        {"p", [&](auto &v, auto &k) { c.p = parse_number(v, k); }},
        {"q", [&](auto &v, auto &k) { c.q = parse_number(v, k); }},
        {"mu", [&](auto &v, auto &k) { c.mu = parse_number(v, k); }},
        {"c", [&](auto &v, auto &k) { c.quadratic_c = parse_number(v, k); }},
        {"sigma", [&](auto &v, auto &k) { c.sigma = parse_number(v, k); }},
        {"a1", [&](auto &v, auto &k) { c.a1 = parse_number(v, k); }},
        {"a2", [&](auto &v, auto &k) { c.a2 = parse_number(v, k); }},
        {"R", [&](auto &v, auto &k) { c.R = parse_number(v, k); }}}},
      {"run",
       {{"k", [&](auto &v, auto &k) { c.k_list = parse_int_list(v, k); }},
        {"seed", [&](auto &v, auto &k) { c.seed = static_cast<std::uint64_t>(parse_int(v, k)); }},
        {"output", [&](auto &v, auto &) { c.output = boost::algorithm::trim_copy(v); }},
        {"jobs", [&](auto &v, auto &k) { c.jobs = parse_int(v, k); }},
        {"mirror", [&](auto &v, auto &k) { c.mirror = parse_bool(v, k); }},
        {"residual_refine", [&](auto &v, auto &k) { c.residual_refine = parse_int(v, k); }}}},
      {"flow",
       {{"step", [&](auto &v, auto &k) { c.flow.step = parse_number(v, k); }},
        {"max_time", [&](auto &v, auto &k) { c.flow.max_time = parse_number(v, k); }},
        {"ode_tol", [&](auto &v, auto &k) { c.flow.ode_tol = parse_number(v, k); }},
        {"stop_tol", [&](auto &v, auto &k) { c.flow.stop_tol = parse_number(v, k); }},
        {"polish_tol", [&](auto &v, auto &k) { c.flow.polish_tol = parse_number(v, k); }},
        {"max_iterations", [&](auto &v, auto &k) { c.flow.max_iterations = parse_int(v, k); }},
        {"starts", [&](auto &v, auto &k) { c.flow.starts = parse_int(v, k); }},
        {"newton_polish", [&](auto &v, auto &k) { c.flow.newton_polish = parse_bool(v, k); }}}},
      {"geometry",
       {{"starts", [&](auto &v, auto &k) { c.geometry.starts = parse_int(v, k); }},
        {"max_doublings", [&](auto &v, auto &k) { c.geometry.max_doublings = parse_int(v, k); }},
        {"ascent_iterations", [&](auto &v, auto &k) { c.geometry.ascent_iterations = parse_int(v, k); }}}},
      {"check",
       {{"inject_projection_sign_error",
         [&](auto &v, auto &k) { c.inject_sign_error = parse_bool(v, k); }}}},
  };
  for (const auto &[section, body] : tree) {
    const auto sec = keys.find(section);
    if (sec == keys.end())
      throw Error(ErrorCode::Config, "unknown section [" + section + "]");
    for (const auto &[key, node] : body) {
      const auto it = sec->second.find(key);
      if (it == sec->second.end())
        throw Error(ErrorCode::Config, "unknown key '" + key + "' in [" + section + "]");
      it->second(node.data(), section + "." + key);
    }
  }
  c.flow.seed = c.seed;
  c.geometry.seed = c.seed;
  return c;
}

RunConfig load_config(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::Io, "cannot read configuration " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

json config_to_json(const RunConfig &c) {
  json j = {
      {"problem", to_string(c.problem)},
      {"domain", {{"shape", c.shape}, {"length_x", c.length_x}, {"length_y", c.length_y}}},
      {"truncation",
       {{"modes", c.modes},
        {"oversampling", c.oversampling},
        {"temporal_cutoff", c.temporal_cutoff},
        {"period", c.period},
        {"time_nodes", c.time_nodes}}},
      {"operator", {{"s", c.s}, {"t", c.t}, {"potential_shift", c.potential_shift}}},
      {"model", {{"name", c.model}, {"p", c.p}, {"q", c.q}, {"mu", c.mu}, {"c", c.quadratic_c}}},
      {"run",
       {{"k", c.k_list},
        {"seed", c.seed},
        {"output", c.output},
        {"jobs", c.jobs},
        {"mirror", c.mirror},
        {"residual_refine", c.residual_refine}}},
      {"flow",
       {{"step", c.flow.step},
        {"max_time", c.flow.max_time},
        {"ode_tol", c.flow.ode_tol},
        {"stop_tol", c.flow.stop_tol},
        {"polish_tol", c.flow.polish_tol},
        {"max_iterations", c.flow.max_iterations},
        {"starts", c.flow.starts},
        {"newton_polish", c.flow.newton_polish}}},
      {"geometry",
       {{"starts", c.geometry.starts},
        {"max_doublings", c.geometry.max_doublings},
        {"ascent_iterations", c.geometry.ascent_iterations}}},
      {"check", {{"inject_projection_sign_error", c.inject_sign_error}}},
  };
  if (c.sigma)
    j["model"]["sigma"] = *c.sigma;
  if (c.a1)
    j["model"]["a1"] = *c.a1;
  if (c.a2)
    j["model"]["a2"] = *c.a2;
  if (c.R)
    j["model"]["R"] = *c.R;
  return j;
}

RunConfig config_from_json(const json &j) {
  try {
    RunConfig c;
    c.problem = problem_from_string(j.at("problem").get<std::string>());
    const json &d = j.at("domain");
    c.shape = d.at("shape");
    c.length_x = d.at("length_x");
    c.length_y = d.at("length_y");
    const json &tr = j.at("truncation");
    c.modes = tr.at("modes");
    c.oversampling = tr.at("oversampling");
    c.temporal_cutoff = tr.at("temporal_cutoff");
    c.period = tr.at("period");
    c.time_nodes = tr.at("time_nodes");
    const json &op = j.at("operator");
    c.s = op.at("s");
    c.t = op.at("t");
    c.potential_shift = op.at("potential_shift");
    const json &m = j.at("model");
    c.model = m.at("name");
    c.p = m.at("p");
    c.q = m.at("q");
    c.mu = m.at("mu");
    c.quadratic_c = m.at("c");
    if (m.contains("sigma"))
      c.sigma = m.at("sigma").get<double>();
    if (m.contains("a1"))
      c.a1 = m.at("a1").get<double>();
    if (m.contains("a2"))
      c.a2 = m.at("a2").get<double>();
    if (m.contains("R"))
      c.R = m.at("R").get<double>();
    const json &r = j.at("run");
    c.k_list = r.at("k").get<std::vector<int>>();
    c.seed = r.at("seed");
    c.output = r.at("output");
    c.jobs = r.at("jobs");
    c.mirror = r.at("mirror");
    c.residual_refine = r.at("residual_refine");
    const json &f = j.at("flow");
    c.flow.step = f.at("step");
    c.flow.max_time = f.at("max_time");
    c.flow.ode_tol = f.at("ode_tol");
    c.flow.stop_tol = f.at("stop_tol");
    c.flow.polish_tol = f.at("polish_tol");
    c.flow.max_iterations = f.at("max_iterations");
    c.flow.starts = f.at("starts");
    c.flow.newton_polish = f.at("newton_polish");
    const json &g = j.at("geometry");
    c.geometry.starts = g.at("starts");
    c.geometry.max_doublings = g.at("max_doublings");
    c.geometry.ascent_iterations = g.at("ascent_iterations");
    c.inject_sign_error = j.at("check").at("inject_projection_sign_error");
    c.flow.seed = c.seed;
    c.geometry.seed = c.seed;
    return c;
  } catch (const json::exception &e) {
    throw Error(ErrorCode::Config, std::string("configuration echo is incomplete: ") + e.what());
  }
}

// ---------------------------------------------------------------- gates

const std::vector<GateRule> &assumption_gates() {
  static const std::vector<GateRule> gates = {
      {"V1", "not machine-checkable: the potential is the constant shift V0, continuous and "
             "periodic by construction", false},
      {"V2", "lambda_j + V0 != 0 for every retained spatial mode (0 not in the spectrum of L)"},
      {"H1", "not machine-checkable: catalogued densities are C^1 in z and independent of (t, x)",
       false},
      {"H2", "sampled: H(z) = o(|z|^2) and H_z(z) = o(|z|) as z -> 0"},
      {"H3", "sampled: H(z) / |z|^2 -> infinity (superquadratic growth)"},
      {"H4", "sampled: H4(1) and H4(2) with the catalogued sigma, a1, a2, R; user values must "
             "match the catalogue"},
      {"E1", "1/p > 1/2 - s/N, 1/q > 1/2 - t/N, 1/p + 1/q > 1 - 2/N, s + t = 2, s >= t > 0, "
             "and the sampled growth bound"},
      {"E2", "sampled: f(u) = o(|u|) as u -> 0"},
      {"E3", "sampled: F(u) / u^2 -> infinity"},
      {"E4", "sampled, not proved: f(u) / |u| nondecreasing"},
      {"E5", "sampled: 1/2 f(u) u - F(u) grows"},
  };
  return gates;
}

void validate_config(const RunConfig &c) {
  auto need = [](bool ok, const std::string &what) {
    if (!ok)
      throw Error(ErrorCode::Config, what);
  };
  need(c.shape == "interval" || c.shape == "rectangle", "domain shape must be interval or rectangle");
  need(c.length_x > 0.0 && c.length_y > 0.0, "domain lengths must be positive");
  need(c.modes >= 1, "at least one mode is required");
  need(c.oversampling >= 4, "oversampling must be at least 4");
  need(!c.k_list.empty(), "the k list is empty");
  need(std::all_of(c.k_list.begin(), c.k_list.end(), [](int k) { return k >= 0; }),
       "k values must be nonnegative");
  need(c.jobs >= 1, "jobs must be at least 1");
  need(c.residual_refine >= 1, "residual refinement must be at least 1");
  need(c.geometry.starts >= 1 && c.geometry.max_doublings >= 0 && c.geometry.ascent_iterations >= 1,
       "geometry options must be positive");
  try {
    c.flow.validate();
  } catch (const Error &e) {
    throw Error(ErrorCode::Config, e.what());
  }
  const double n = c.shape == "interval" ? 1.0 : 2.0;

  if (c.problem == Problem::ES) {
    need(c.model == "power" || c.model == "log_power" || c.model == "zero",
         "ES model must be power, log_power or zero");
    if (std::abs(c.s + c.t - 2.0) > 1e-12 || c.s < c.t || !(c.t > 0.0))
      throw AssumptionError("E1", "the exponents must satisfy s + t = 2 and s >= t > 0");
    for (int k : c.k_list)
      need(k < c.modes, "k must be below the number of modes");
    if (c.model == "zero")
      return; // the quadratic-only debug model has no growth data to gate
    if (c.model == "power" && (!(c.p > 2.0) || !(c.q > 2.0)))
      throw AssumptionError("E3", "power exponents must exceed 2");
    const ScalarNonlinearity f = es_side(c, c.p), g = es_side(c, c.q);
    const double pf = f.growth_exponent(), pg = g.growth_exponent();
    if (!(1.0 / pf > 0.5 - c.s / n) || !(1.0 / pg > 0.5 - c.t / n))
      throw AssumptionError("E1", "1/p > 1/2 - s/N fails for the chosen exponents");
    if (!(1.0 / pf + 1.0 / pg > 1.0 - 2.0 / n))
      throw AssumptionError("E1", "1/p + 1/q > 1 - 2/N fails");
    for (const auto &side : {f, g})
      for (const auto &e : check_growth(side).entries)
        if (!e.pass)
          throw AssumptionError(e.condition, side.name() + " fails the sampled check");
    return;
  }

  need(c.model == "power" || c.model == "log_quad" || c.model == "quadratic" || c.model == "zero",
       "HS model must be power, log_quad, quadratic or zero");
  need(c.period > 0.0, "the period must be positive");
  need(c.temporal_cutoff >= 0, "the temporal cutoff must be nonnegative");
  need(c.time_nodes == 0 || c.time_nodes >= 2 * (2 * c.temporal_cutoff + 1),
       "too few time nodes for the temporal cutoff");
  const EigenBasis basis = build_basis(domain_of(c), c.modes, c.oversampling);
  for (int j = 0; j < basis.size(); ++j) {
    const double lam = basis.eigenvalue(j);
    if (std::abs(lam + c.potential_shift) <= 1e-12 * std::max(1.0, lam))
      throw AssumptionError("V2", "lambda_" + std::to_string(j + 1) +
                                      " + V0 vanishes, so 0 is in the spectrum of L");
  }
  for (int k : c.k_list)
    need(k < c.modes * (2 * c.temporal_cutoff + 1), "k must be below the number of plus directions");
  if (c.model == "zero")
    return;
  if (c.model == "power" && !(c.mu > 2.0))
    throw AssumptionError("H3", "the power exponent must exceed 2");
  const HamiltonianDensity h = hs_density(c);
  // A quadratic density fails H2 and H3 together; H3 names the actual defect.
  const GrowthReport growth = check_growth(h);
  const GrowthEntry *failed = nullptr;
  for (const auto &e : growth.entries)
    if (!e.pass && (!failed || e.condition == "H3"))
      failed = &e;
  if (failed) {
    const std::string label = failed->condition.rfind("H4", 0) == 0 ? "H4" : failed->condition;
    throw AssumptionError(label, h.name() + " fails the sampled check " + failed->condition);
  }
  const DensityConstants dc = density_constants(h);
  auto match = [&](const std::optional<double> &user, double cat, const char *name) {
    if (user && std::abs(*user - cat) > 1e-9 * std::max(1.0, std::abs(cat)))
      throw AssumptionError("H4", std::string(name) + " does not match the catalogued constant " +
                                      g12(cat));
  };
  match(c.sigma, dc.sigma, "sigma");
  match(c.a1, dc.a1, "a1");
  match(c.a2, dc.a2, "a2");
  match(c.R, dc.R, "R");
}

BuiltModel build_model(const RunConfig &c) {
  BuiltModel b;
  b.basis = std::make_shared<const EigenBasis>(build_basis(domain_of(c), c.modes, c.oversampling));
  SplitSpace split = c.problem == Problem::ES
                         ? build_es_split(b.basis, c.s, c.t)
                         : build_hs_split(b.basis, c.potential_shift, c.period, c.temporal_cutoff);
  if (c.inject_sign_error)
    split.inject_projection_sign_error();
  b.split = std::make_shared<const SplitSpace>(std::move(split));
  b.model = std::make_shared<const EnergyModel>(
      c.problem == Problem::ES
          ? EnergyModel::elliptic(b.split, es_side(c, c.p), es_side(c, c.q))
          : EnergyModel::hamiltonian(b.split, hs_density(c), c.time_nodes));
  return b;
}

// ---------------------------------------------------------------- commands

int cmd_spectrum(const RunConfig &config, std::ostream &log) {
  validate_config(config);
  ensure_dir(config.output);
  const BuiltModel bm = build_model(config);
  const EigenBasis &basis = *bm.basis;
  const fs::path out(config.output);

  std::string eig = "j,n1,n2,lambda\n";
  for (int j = 0; j < basis.size(); ++j) {
    const ModeIndex &ix = basis.indices()[j];
    eig += std::to_string(j) + "," + std::to_string(ix[0]) + "," +
           std::to_string(basis.domain().dimension() > 1 ? ix[1] : 0) + "," +
           g12(basis.eigenvalue(j)) + "\n";
  }
  write_text(out / "eigenvalues.csv", eig);

  const SplitSpace &split = *bm.split;
  std::string dirs = "sign,i,mu,space_mode,frequency\n";
  for (int pass = 0; pass < 2; ++pass) {
    const auto &list = pass == 0 ? split.minus() : split.plus();
    for (size_t i = 0; i < list.size(); ++i)
      dirs += std::string(pass == 0 ? "-" : "+") + "," + std::to_string(i) + "," +
              g12(list[i].mu) + "," + std::to_string(list[i].space_mode) + "," +
              std::to_string(list[i].frequency) + "\n";
  }
  write_text(out / "directions.csv", dirs);

  EmbeddingOptions eo;
  eo.seed = config.seed;
  eo.starts = config.geometry.starts;
  eo.rel_tol = config.geometry.embedding_tol;
  if (config.problem == Problem::ES) {
    const double pf = config.model == "zero" ? 2.0 : es_side(config, config.p).growth_exponent();
    const double pg = config.model == "zero" ? 2.0 : es_side(config, config.q).growth_exponent();
    std::vector<std::pair<double, double>> rows(basis.size());
    parallel_for(basis.size(), config.jobs, [&](int k) {
      rows[k] = {embedding_constant(basis, split.s(), pf, k, eo).beta,
                 embedding_constant(basis, split.t(), pg, k, eo).beta};
    });
    std::string csv = "k,beta_u,beta_v\n";
    for (int k = 0; k < basis.size(); ++k)
      csv += std::to_string(k) + "," + g12(rows[k].first) + "," + g12(rows[k].second) + "\n";
    write_text(out / "beta.csv", csv);
  } else {
    const DenseSpectrum ds = dense_operator_check(split);
    std::string csv = "i,dense,formula\n";
    for (int i = 0; i < ds.eigenvalues.size(); ++i)
      csv += std::to_string(i) + "," + g12(ds.eigenvalues(i)) + "," + g12(ds.predicted(i)) + "\n";
    write_text(out / "l_spectrum.csv", csv);
    log << "L spectrum: " << ds.dof << " dof, max mismatch " << g12(ds.max_mismatch)
        << ", min |eigenvalue| " << g12(ds.min_abs) << "\n";

    const EnergyModel &model = *bm.model;
    double r = 2.0;
    if (config.model == "power" || config.model == "log_quad")
      r = density_constants(hs_density(config)).p + 1.0;
    std::vector<double> beta(config.k_list.size());
    parallel_for(static_cast<int>(beta.size()), config.jobs, [&](int i) {
      const GalerkinSubspaces sub = galerkin_subspaces(split, config.k_list[i]);
      const std::array<Eigen::MatrixXd, 2> comps = {
          model.synthesis(0).middleCols(sub.upper_begin, sub.upper_dim()),
          model.synthesis(1).middleCols(sub.upper_begin, sub.upper_dim())};
      beta[i] = lr_sphere_sup(comps, model.grid_weights(), r, eo).value;
    });
    std::string bcsv = "k,beta\n";
    for (size_t i = 0; i < beta.size(); ++i)
      bcsv += std::to_string(config.k_list[i]) + "," + g12(beta[i]) + "\n";
    write_text(out / "beta.csv", bcsv);
  }
  log << "spectrum written to " << config.output << "\n";
  return ExitOk;
}

int cmd_geometry(const RunConfig &config, std::ostream &log) {
  validate_config(config);
  ensure_dir(config.output);
  const BuiltModel bm = build_model(config);
  const std::vector<GeometryReport> reps = run_geometry(config, *bm.model);
  write_geometry(config, reps, log);
  const bool ok = std::all_of(reps.begin(), reps.end(), [](const auto &g) { return g.pass; });
  return ok ? ExitOk : ExitGeometryFailure;
}

int cmd_solve(const RunConfig &config, std::ostream &log) {
  validate_config(config);
  ensure_dir(config.output);
  const BuiltModel bm = build_model(config);
  const EnergyModel &model = *bm.model;
  const std::vector<GeometryReport> geo = run_geometry(config, model);
  write_geometry(config, geo, log);
  if (!std::all_of(geo.begin(), geo.end(), [](const auto &g) { return g.pass; })) {
    log << "geometry failed; no solve attempted\n";
    return ExitGeometryFailure;
  }

  FlowConfig flow = config.flow;
  flow.seed = config.seed;
  std::vector<std::optional<GeometryReport>> gopt(geo.begin(), geo.end());
  const SweepResult sweep =
      multiplicity_sweep(model, config.k_list, flow, config.jobs, gopt, config.mirror);

  json provenance = {{"seed", config.seed}, {"created", utc_now()}, {"mirror", config.mirror}};
  // The diagonal reduction u = v of the power system is the scalar equation
  // solved by the shooting oracle; its level is the reference for k = 0.
  if (config.problem == Problem::ES && config.model == "power" && config.p == config.q &&
      config.s == 1.0 && config.shape == "interval") {
    const ShootingResult sh = shooting_ground_state(config.p, config.length_x);
    provenance["reference"] = {{"oracle", "shooting_ground_state"},
                               {"p", config.p},
                               {"length", config.length_x},
                               {"ground_state_level", 2.0 * sh.energy}};
  }

  const fs::path out(config.output);
  bool all = true;
  for (const SolveReport &r : sweep.reports) {
    all = all && r.status == SolveStatus::Converged && r.above_lower_bound;
    write_text(out / ("solution_" + std::to_string(r.k) + ".json"),
               solution_to_json(config, *bm.split, r, provenance).dump(2) + "\n");
    std::string hist = "iteration,phi,grad_norm,cerami\n";
    for (const HistoryRow &h : r.history)
      hist += std::to_string(h.iteration) + "," + g12(h.phi) + "," + g12(h.grad_norm) + "," +
              g12(h.cerami) + "\n";
    write_text(out / ("history_" + std::to_string(r.k) + ".csv"), hist);
    log << "solve k=" << r.k << " level=" << g12(r.level) << " cerami=" << g12(r.cerami) << " "
        << to_string(r.status) << "\n";
  }

  std::vector<const SolveReport *> order;
  for (const SolveReport &r : sweep.reports)
    order.push_back(&r);
  std::stable_sort(order.begin(), order.end(),
                   [](const auto *a, const auto *b) { return a->level < b->level; });
  std::string csv = "k,level,cerami,grad_norm,l2_norm,rho_u,rho_v,b_k,status\n";
  for (const SolveReport *r : order) {
    csv += std::to_string(r->k) + "," + g12(r->level) + "," + g12(r->cerami) + "," +
           g12(r->grad_norm) + "," + g12(r->l2_norm) + "," +
           (r->residual ? g12(r->residual->rho_u) : "") + "," +
           (r->residual ? g12(r->residual->rho_v) : "") + "," + (r->b_k ? g12(*r->b_k) : "") +
           "," + to_string(r->status) + "\n";
  }
  write_text(out / "summary.csv", csv);
  std::string levels = "rank,k,level\n";
  for (size_t i = 0; i < sweep.distinct_levels.size(); ++i)
    levels += std::to_string(i) + "," + std::to_string(sweep.distinct_k[i]) + "," +
              g12(sweep.distinct_levels[i]) + "\n";
  write_text(out / "levels.csv", levels);
  log << sweep.distinct_levels.size() << " distinct critical values\n";
  return all ? ExitOk : ExitPartial;
}

namespace {

struct GroupResult {
  std::string name;
  bool pass = true;
  json detail;
};

Eigen::VectorXd random_coords(std::mt19937_64 &rng, int dim, double scale) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd c(dim);
  for (int i = 0; i < dim; ++i)
    c(i) = normal(rng);
  return scale * c / std::sqrt(static_cast<double>(dim));
}

GroupResult check_projector(const BuiltModel &bm, std::uint64_t seed) {
  GroupResult g{"projector", true, {}};
  const SplitSpace &split = *bm.split;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  double sum_err = 0.0, cross = 0.0, quad = 0.0;
  for (int n = 0; n < 100; ++n) {
    ProductPoint z = split.zero();
    for (int i = 0; i < z.coeffs.size(); ++i)
      z.coeffs(i) = normal(rng);
    const Projection pr = project_pm(split, z);
    const double zn = split.norm(z);
    sum_err = std::max(sum_err, (pr.plus.coeffs + pr.minus.coeffs - z.coeffs).norm() /
                                    z.coeffs.norm());
    cross = std::max(cross, std::abs(split.inner(pr.plus, pr.minus)) / (zn * zn));
    // Quadratic part of Phi from the projections against the split coordinates.
    const double lhs = 0.5 * split.norm(pr.plus) * split.norm(pr.plus) -
                       0.5 * split.norm(pr.minus) * split.norm(pr.minus);
    quad = std::max(quad, std::abs(lhs - bm.model->quadratic(split.coords(z))) / (zn * zn));
  }
  g.pass = sum_err <= 1e-10 && cross <= 1e-10 && quad <= 1e-10;
  g.detail = {{"points", 100}, {"sum_error", sum_err}, {"cross", cross}, {"quadratic", quad}};
  return g;
}

GroupResult check_gradient(const BuiltModel &bm, std::uint64_t seed) {
  GroupResult g{"gradient", true, {}};
  const EnergyModel &model = *bm.model;
  std::mt19937_64 rng(seed + 1);
  double worst = 0.0;
  for (int n = 0; n < 10; ++n) {
    const ProductPoint z = bm.split->point(random_coords(rng, model.dimension(), 2.0));
    const Eigen::VectorXd fd = fd_gradient(model, z, 1e-5).coeffs;
    const Eigen::VectorXd an = model.grad_phi(z).coeffs;
    worst = std::max(worst, (fd - an).norm() / std::max(an.norm(), 1e-300));
  }
  g.pass = worst <= 1e-6;
  g.detail = {{"points", 10}, {"h", 1e-5}, {"max_relative_error", worst}};
  return g;
}

GroupResult check_identity(const BuiltModel &bm, std::uint64_t seed) {
  GroupResult g{"identity", true, {}};
  const EnergyModel &model = *bm.model;
  std::mt19937_64 rng(seed + 2);
  double worst = 0.0;
  for (int n = 0; n < 20; ++n) {
    const Eigen::VectorXd c = random_coords(rng, model.dimension(), 3.0);
    Eigen::VectorXd gr;
    const double phi = model.phi_grad(c, gr);
    const double lhs = phi - 0.5 * gr.dot(c);
    const double rhs = model.h_tilde_integral(c);
    worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + std::abs(rhs)));
  }
  g.pass = worst <= 1e-9;
  g.detail = {{"points", 20}, {"max_error", worst}};
  return g;
}

GroupResult check_growth_group(const RunConfig &config) {
  GroupResult g{"growth", true, json::object()};
  auto entries = [](const GrowthReport &rep) {
    json arr = json::array();
    for (const auto &e : rep.entries)
      arr.push_back({{"condition", e.condition}, {"pass", e.pass}, {"worst", e.worst}});
    return arr;
  };
  if (config.problem == Problem::HS) {
    const GrowthReport rep = check_growth(hs_density(config));
    g.pass = rep.pass();
    g.detail["model"] = rep.model;
    g.detail["entries"] = entries(rep);
    if (rep.pass())
      g.detail["constants"] = {{"sigma", rep.constants.sigma}, {"R", rep.constants.R},
                               {"a1", rep.constants.a1},       {"a2", rep.constants.a2},
                               {"p", rep.constants.p}};
  } else {
    const GrowthReport f = check_growth(es_side(config, config.p));
    const GrowthReport gg = check_growth(es_side(config, config.q));
    g.pass = f.pass() && gg.pass();
    g.detail["f"] = {{"model", f.model}, {"entries", entries(f)}};
    g.detail["g"] = {{"model", gg.model}, {"entries", entries(gg)}};
  }
  return g;
}

GroupResult check_liu(const RunConfig &config, std::uint64_t seed) {
  GroupResult g{"liu", true, {}};
  std::mt19937_64 rng(seed + 3);
  std::uniform_real_distribution<double> val(-3.0, 3.0), sval(-1.0, 3.0);
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto &f : {es_side(config, config.p), es_side(config, config.q)})
    for (int n = 0; n < 20000; ++n)
      worst = std::max(worst, liu_inequality(f, val(rng), val(rng), sval(rng)));
  g.pass = worst <= 1e-12;
  g.detail = {{"samples", 40000}, {"max_value", worst}};
  return g;
}

GroupResult check_spectrum(const BuiltModel &bm) {
  GroupResult g{"spectrum", true, {}};
  const DenseSpectrum ds = dense_operator_check(*bm.split);
  g.pass = ds.max_mismatch <= 1e-10 && ds.weight_mismatch <= 1e-10 &&
           ds.direction_residual <= 1e-10 && ds.min_abs > 0.0;
  g.detail = {{"dof", ds.dof},
              {"max_mismatch", ds.max_mismatch},
              {"weight_mismatch", ds.weight_mismatch},
              {"direction_residual", ds.direction_residual},
              {"min_abs", ds.min_abs}};
  return g;
}

} // namespace

int cmd_check(const RunConfig &config, std::ostream &log) {
  validate_config(config);
  ensure_dir(config.output);
  const BuiltModel bm = build_model(config);
  std::vector<GroupResult> groups;
  groups.push_back(check_projector(bm, config.seed));
  groups.push_back(check_spectrum(bm));
  groups.push_back(check_gradient(bm, config.seed));
  groups.push_back(check_identity(bm, config.seed));
  if (config.model != "zero")
    groups.push_back(check_growth_group(config));
  if (config.problem == Problem::ES && config.model != "zero")
    groups.push_back(check_liu(config, config.seed));

  json out = json::object();
  bool all = true;
  for (const auto &g : groups) {
    out[g.name] = {{"pass", g.pass}, {"detail", g.detail}};
    all = all && g.pass;
    log << g.name << ": " << (g.pass ? "PASS" : "FAIL") << "\n";
  }
  write_text(fs::path(config.output) / "check.json", out.dump(2) + "\n");
  return all ? ExitOk : ExitCheckFailure;
}

int run_command(const std::string &command, const RunConfig &config, std::ostream &log) {
  try {
    if (command == "spectrum")
      return cmd_spectrum(config, log);
    if (command == "geometry")
      return cmd_geometry(config, log);
    if (command == "solve")
      return cmd_solve(config, log);
    if (command == "check")
      return cmd_check(config, log);
  } catch (const AssumptionError &e) {
    log << "validation failed: " << e.what() << "\n";
    return ExitValidation;
  } catch (const Error &e) {
    if (e.code() == ErrorCode::Config || e.code() == ErrorCode::InvalidArgument) {
      log << "validation failed: " << e.what() << "\n";
      return ExitValidation;
    }
    throw;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown command '" + command + "'");
}

// ---------------------------------------------------------------- files

json solution_to_json(const RunConfig &config, const SplitSpace &split,
                      const SolveReport &report, const json &provenance) {
  json j;
  j["format_version"] = 1;
  j["config"] = config_to_json(config);
  j["split"] = {{"problem", to_string(split.problem())},
                {"dimension", split.dimension()},
                {"plus_count", split.plus_count()},
                {"minus_count", split.minus_count()},
                {"modes", split.basis().size()},
                {"temporal_functions", split.temporal_functions()}};
  j["k"] = report.k;
  j["status"] = to_string(report.status);
  j["level"] = report.level;
  j["cerami"] = report.cerami;
  j["grad_norm"] = report.grad_norm;
  j["l2_norm"] = report.l2_norm;
  j["minimax_iterations"] = report.minimax_iterations;
  j["newton_iterations"] = report.newton_iterations;
  if (report.b_k)
    j["b_k"] = *report.b_k;
  if (report.d_k)
    j["d_k"] = *report.d_k;
  j["residual"] = report.residual
                      ? json{{"u", report.residual->rho_u}, {"v", report.residual->rho_v}}
                      : json(nullptr);
  j["coefficients"] = vec_json(report.point.coeffs);
  j["provenance"] = provenance;
  return j;
}

SolutionFile solution_from_json(const json &j) {
  try {
    SolutionFile f;
    f.format_version = j.at("format_version");
    if (f.format_version != 1)
      throw Error(ErrorCode::Config, "unsupported solution format version");
    f.config = config_from_json(j.at("config"));
    f.k = j.at("k");
    f.status = j.at("status");
    f.level = j.at("level");
    f.cerami = j.at("cerami");
    f.grad_norm = j.at("grad_norm");
    if (!j.at("residual").is_null())
      f.residual = StrongResidual{j.at("residual").at("u"), j.at("residual").at("v")};
    const auto coeffs = j.at("coefficients").get<std::vector<double>>();
    f.point.problem = f.config.problem;
    f.point.coeffs = Eigen::Map<const Eigen::VectorXd>(coeffs.data(), coeffs.size());
    f.split = j.at("split");
    f.provenance = j.at("provenance");
    return f;
  } catch (const json::exception &e) {
    throw Error(ErrorCode::Config, std::string("malformed solution file: ") + e.what());
  }
}

SolutionFile read_solution(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::Io, "cannot read " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception &e) {
    throw Error(ErrorCode::Config, std::string("malformed solution file: ") + e.what());
  }
  return solution_from_json(j);
}

double reevaluate_level(const SolutionFile &file) {
  const BuiltModel bm = build_model(file.config);
  return bm.model->eval_phi(file.point);
}

} // namespace fountain
