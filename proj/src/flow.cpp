#include "fountain/minimax.hpp"

#include <cmath>

#include "fountain/error.hpp"

namespace fountain {

void FlowConfig::validate() const {
  const bool ok = step > 0.0 && max_time > 0.0 && ode_tol > 0.0 && stop_tol > 0.0 &&
                  polish_tol > 0.0 && max_iterations > 0 && starts > 0;
  if (!ok)
    throw Error(ErrorCode::InvalidArgument, "flow configuration fields must be positive");
}

std::string to_string(FlowStop stop) {
  switch (stop) {
  case FlowStop::Cerami:
    return "cerami";
  case FlowStop::Level:
    return "level";
  case FlowStop::MaxTime:
    return "max_time";
  case FlowStop::MaxIterations:
    return "max_iterations";
  case FlowStop::StepUnderflow:
    return "step_underflow";
  }
  return "unknown";
}

Trajectory integrate_flow(const EnergyModel &model, const Eigen::VectorXd &start,
                          const FlowConfig &config, double level_target) {
  config.validate();
  Trajectory tr;
  Eigen::VectorXd c = start;
  Eigen::VectorXd g;
  double f = model.phi_grad(c, g);
  double time = 0.0;
  auto record = [&] {
    tr.nodes.push_back(c);
    tr.phi.push_back(f);
    tr.cerami.push_back((1.0 + c.norm()) * g.norm());
    tr.time.push_back(time);
  };
  record();

  // dz/dtau = -2 g / |g|^2, so dPhi/dtau = -2 exactly.
  auto field = [](const Eigen::VectorXd &grad) -> Eigen::VectorXd {
    return (-2.0 / grad.squaredNorm()) * grad;
  };
  double h = config.step;
  while (true) {
    if (tr.cerami.back() <= config.stop_tol) {
      tr.stop = FlowStop::Cerami;
      break;
    }
    if (f <= level_target) {
      tr.stop = FlowStop::Level;
      break;
    }
    if (time >= config.max_time) {
      tr.stop = FlowStop::MaxTime;
      break;
    }
    if (static_cast<int>(tr.nodes.size()) > config.max_iterations) {
      tr.stop = FlowStop::MaxIterations;
      break;
    }
    if (h < 1e-14 * (1.0 + time)) {
      tr.stop = FlowStop::StepUnderflow;
      tr.near_critical = true;
      break;
    }
    h = std::min(h, config.max_time - time);
    const Eigen::VectorXd k1 = field(g);
    const Eigen::VectorXd euler = c + h * k1;
    Eigen::VectorXd ge;
    model.phi_grad(euler, ge);
    const Eigen::VectorXd k2 = field(ge);
    const Eigen::VectorXd heun = c + 0.5 * h * (k1 + k2);
    const double err = 0.5 * h * (k2 - k1).norm();
    bool accept = heun.allFinite() && err <= config.ode_tol * (1.0 + c.norm());
    Eigen::VectorXd gn;
    double fn = f;
    if (accept) {
      fn = model.phi_grad(heun, gn);
      accept = std::isfinite(fn) && fn < f;
    }
    if (!accept) {
      ++tr.rejected;
      h *= 0.5;
      continue;
    }
    c = heun;
    g = gn;
    f = fn;
    time += h;
    record();
    h *= 1.5;
  }
  return tr;
}

Trajectory integrate_flow(const EnergyModel &model, const ProductPoint &start,
                          const FlowConfig &config, double level_target) {
  return integrate_flow(model, model.split().coords(start), config, level_target);
}

} // namespace fountain
