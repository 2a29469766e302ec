#pragma once

#include <Eigen/Dense>
#include <functional>

namespace esp::optim {

/// Objective callback: fills the gradient and returns the value.
using ObjectiveGradient =
    std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct LbfgsOptions {
  int max_iterations = 400;
  int memory = 8;
  double gradient_tolerance = 1e-10; // on the infinity norm
  double step_tolerance = 1e-14;     // relative decrease floor
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Limited-memory BFGS with Armijo backtracking. Accepted steps never
/// increase the objective.
LbfgsResult lbfgs_minimize(const ObjectiveGradient& objective,
                           const Eigen::VectorXd& x0,
                           const LbfgsOptions& options = {});

} // namespace esp::optim
