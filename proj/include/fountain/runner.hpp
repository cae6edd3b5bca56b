#ifndef FOUNTAIN_RUNNER_HPP
#define FOUNTAIN_RUNNER_HPP

// Batch front end: run configuration, assumption gates, the spectrum /
// geometry / solve / check commands and the solution file format.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fountain/minimax.hpp"

namespace fountain {

struct RunConfig {
  Problem problem = Problem::ES;
  std::string shape = "interval";   ///< interval | rectangle
  double length_x = 3.141592653589793;
  double length_y = 3.141592653589793;
  int modes = 32;
  int oversampling = 8;
  int temporal_cutoff = 7;          ///< HS only
  double period = 6.283185307179586; ///< HS only
  int time_nodes = 0;               ///< HS only; 0 selects 4(2K+1)
  double s = 1.0, t = 1.0;          ///< ES only
  double potential_shift = 0.0;     ///< HS only

  /// ES: power | log_power | zero. HS: power | log_quad | quadratic | zero.
  std::string model = "power";
  double p = 4.0, q = 4.0;          ///< ES power exponents of f and g
  double mu = 4.0;                  ///< HS power exponent
  double quadratic_c = 1.0;
  /// Optional (H4) constants; when given they must match the catalogue.
  std::optional<double> sigma, a1, a2, R;

  std::vector<int> k_list{0};
  FlowConfig flow;
  GeometryOptions geometry;
  std::string output = "fountain_out";
  std::uint64_t seed = 1;
  int jobs = 1;
  bool mirror = false;
  bool inject_sign_error = false;   ///< mutation hook for the projector group
  int residual_refine = 4;
};

/// INI text with sections [problem], [domain], [truncation], [operator],
/// [model], [run], [flow], [geometry], [check]. Unknown keys are rejected.
/// Numbers may be written with pi, e.g. "pi", "2pi", "pi/2".
RunConfig parse_config(const std::string &text);
RunConfig load_config(const std::string &path);

nlohmann::json config_to_json(const RunConfig &config);
RunConfig config_from_json(const nlohmann::json &j);

/// Gate table: every assumption label maps to one rule or a note saying why
/// it is not machine-checkable.
struct GateRule {
  std::string label;
  std::string rule;
  bool checked = true;
};
const std::vector<GateRule> &assumption_gates();

/// Throws AssumptionError naming the violated label, or Error(Config) for
/// plain configuration mistakes.
void validate_config(const RunConfig &config);

struct BuiltModel {
  std::shared_ptr<const EigenBasis> basis;
  std::shared_ptr<const SplitSpace> split;
  std::shared_ptr<const EnergyModel> model;
};
BuiltModel build_model(const RunConfig &config);

enum ExitCode : int {
  ExitOk = 0,
  ExitCheckFailure = 1,
  ExitGeometryFailure = 2,
  ExitPartial = 3,
  ExitValidation = 4,
};

int cmd_spectrum(const RunConfig &config, std::ostream &log);
int cmd_geometry(const RunConfig &config, std::ostream &log);
int cmd_solve(const RunConfig &config, std::ostream &log);
int cmd_check(const RunConfig &config, std::ostream &log);

/// Dispatches by name; validation failures become ExitValidation with the
/// label written to `log`.
int run_command(const std::string &command, const RunConfig &config, std::ostream &log);

struct SolutionFile {
  int format_version = 1;
  RunConfig config;
  int k = 0;
  std::string status;
  double level = 0.0;
  double cerami = 0.0;
  double grad_norm = 0.0;
  std::optional<StrongResidual> residual;
  ProductPoint point;
  nlohmann::json split;
  nlohmann::json provenance;
};

nlohmann::json solution_to_json(const RunConfig &config, const SplitSpace &split,
                                const SolveReport &report, const nlohmann::json &provenance);
SolutionFile solution_from_json(const nlohmann::json &j);
SolutionFile read_solution(const std::string &path);
/// Rebuilds the model from the echoed configuration and evaluates Phi.
double reevaluate_level(const SolutionFile &file);

} // namespace fountain

#endif
