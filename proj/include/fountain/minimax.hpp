#ifndef FOUNTAIN_MINIMAX_HPP
#define FOUNTAIN_MINIMAX_HPP

// Fountain geometry, the deformation flow, minimax levels and multiplicity
// sweeps on a Galerkin energy model.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fountain/energy.hpp"

namespace fountain {

struct FlowConfig {
  double step = 0.05;          ///< initial flow step in flow time
  double max_time = 100.0;
  double ode_tol = 1e-6;       ///< local error per step, relative to 1 + ||z||
  double stop_tol = 1e-8;      ///< Cerami tolerance for stopping and certificates
  double polish_tol = 1e-5;    ///< Cerami level at which Newton polishing takes over
  int max_iterations = 400;
  std::uint64_t seed = 1;
  int starts = 8;              ///< mesh directions for the minimax search
  bool newton_polish = true;

  /// Throws Error(InvalidArgument) unless all fields are positive.
  void validate() const;
};

enum class FlowStop { Cerami, Level, MaxTime, MaxIterations, StepUnderflow };
std::string to_string(FlowStop stop);

/// Accepted nodes of dz/dtau = -2 grad Phi / ||grad Phi||^2 in split
/// coordinates. Phi decreases by 2 per unit flow time along exact solutions.
struct Trajectory {
  std::vector<Eigen::VectorXd> nodes;
  std::vector<double> phi;
  std::vector<double> cerami;
  std::vector<double> time;
  FlowStop stop = FlowStop::MaxIterations;
  bool near_critical = false;
  int rejected = 0;
};

/// Heun steps with an Euler error estimate; a step is accepted only when the
/// estimate is within ode_tol and Phi strictly decreases. Stops at the Cerami
/// tolerance, at `level_target`, at max_time or max_iterations, or when the
/// step underflows (near_critical).
Trajectory integrate_flow(const EnergyModel &model, const Eigen::VectorXd &start,
                          const FlowConfig &config,
                          double level_target = -std::numeric_limits<double>::infinity());
Trajectory integrate_flow(const EnergyModel &model, const ProductPoint &start,
                          const FlowConfig &config,
                          double level_target = -std::numeric_limits<double>::infinity());

struct GeometryOptions {
  std::vector<double> delta_grid;  ///< empty selects 2^i, i = -4..24
  int starts = 8;
  std::uint64_t seed = 7;
  int max_doublings = 10;          ///< rho grows from 4 r_k to 2^10 r_k
  int ascent_iterations = 400;
  double embedding_tol = 1e-10; ///< relative gain at which the beta_k ascent stops
};

struct GeometryReport {
  int k = 0;
  double beta = 0.0;
  double beta_u = 0.0, beta_v = 0.0; ///< ES: the two tail constants
  double eps = 0.0;                  ///< HS: envelope epsilon used
  double envelope_c = 0.0;           ///< HS: C(eps)
  double r = 0.0;
  double rho = 0.0;
  double a = 0.0;   ///< sup Phi on the X_k- sphere of radius rho
  double b = 0.0;   ///< analytic lower bound on the X_k+ sphere of radius r
  double d = 0.0;   ///< sup Phi on the X_k- ball of radius rho
  bool a1 = false;  ///< a < min(0, b) and d finite
  bool b_finite = false;
  bool pass = false;
  std::string reason;
  /// Upper envelope Phi <= -||z||^2/2 + c_delta |Theta| on X_k-, when the
  /// splitting is L2-orthogonal.
  bool envelope_valid = false;
  double delta = 0.0;
  double c_delta = 0.0;
  double envelope_radius = 0.0; ///< beyond it the envelope alone gives a < min(0, b)
};

GeometryReport geometry_check(const EnergyModel &model, int k,
                              const GeometryOptions &options = {});

/// sup_r (delta r^2 - H(r)) for the model's density (HS) or
/// sup_u (delta u^2 - F(u)) + sup_v (delta v^2 - G(v)) (ES).
double quadratic_deficit(const EnergyModel &model, double delta);

enum class SolveStatus { Converged, Unconverged, FlowOnly };
std::string to_string(SolveStatus status);

struct HistoryRow {
  int iteration = 0;
  double phi = 0.0;
  double grad_norm = 0.0;
  double cerami = 0.0;
};

struct StrongResidual {
  double rho_u = 0.0;
  double rho_v = 0.0;
};

struct SolveReport {
  int k = 0;
  SolveStatus status = SolveStatus::Unconverged;
  double level = 0.0;
  Eigen::VectorXd coords;  ///< split coordinates of the critical point
  ProductPoint point;
  double cerami = 0.0;
  double grad_norm = 0.0;
  double norm = 0.0;       ///< X norm
  double l2_norm = 0.0;    ///< |z|_2 over Omega or Theta
  int minimax_iterations = 0;
  int newton_iterations = 0;
  int mesh_size = 0;
  double mesh_peak = 0.0;  ///< largest reduced peak over the mesh
  std::optional<double> b_k, d_k;
  bool above_lower_bound = true; ///< level >= b_k - tol when b_k is known
  std::optional<StrongResidual> residual;
  std::vector<HistoryRow> history;
};

struct SolveOptions {
  bool mirror = false; ///< negate every mesh direction
  std::optional<GeometryReport> geometry;
};

/// Minimax level c_k over X_k- = X- (+) span(e_0..e_k): a Halton mesh of
/// directions in span(e_0..e_k) is reduced by maximizing Phi over each line
/// plus X-; the best peak seeds a local minimax descent that keeps
/// span(e_0..e_k) minus the moving direction fixed and pushes the direction
/// along -grad Phi restricted to X+. Newton polishing finishes.
SolveReport saddle_solve(const EnergyModel &model, int k, const FlowConfig &config,
                         const SolveOptions &options = {});

struct SweepResult {
  std::vector<SolveReport> reports;     ///< in k order
  std::vector<double> distinct_levels;  ///< ascending
  std::vector<int> distinct_k;          ///< k of each distinct level
};

/// Dedup: two converged reports coincide when their levels differ by at most
/// 1e-3 relative and their |z|_2 by at most 1e-2 relative (+-z identified).
SweepResult multiplicity_sweep(const EnergyModel &model, const std::vector<int> &ks,
                               const FlowConfig &config, int jobs = 1,
                               const std::vector<std::optional<GeometryReport>> &geometry = {},
                               bool mirror = false);

/// ES only: ||-Laplace u - g(v)||_2 / ||Laplace u||_2 and the same for v on a
/// grid `refine` times finer than the model's.
StrongResidual strong_residual(const EnergyModel &model, const ProductPoint &z,
                               int refine = 4);

struct DualGeometryReport {
  int k = 0;
  double r = 0.0, rho = 0.0;
  double a = 0.0;          ///< inf Phi on the X_k+ sphere of radius rho
  double a_sup = 0.0;      ///< sup Phi on the same sphere
  double ball_sup = 0.0;   ///< sup Phi on the ball of X with radius r
  double b = 0.0;          ///< sup Phi on the X_k- sphere of radius r
  double d = 0.0;          ///< inf Phi on the X_k+ ball of radius rho
  bool b1 = false;
};

/// Evaluates the dual fountain quantities for a model with the dual sign
/// convention at the supplied radii.
DualGeometryReport dual_geometry_check(const EnergyModel &model, int k, double r,
                                       double rho, const GeometryOptions &options = {});

} // namespace fountain

#endif
