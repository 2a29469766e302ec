#include "esp/optim.hpp"

#include <cmath>
#include <deque>
#include <vector>

namespace esp::optim {

LbfgsResult lbfgs_minimize(const ObjectiveGradient& objective,
                           const Eigen::VectorXd& x0, const LbfgsOptions& options) {
  const auto n = x0.size();
  Eigen::VectorXd x = x0;
  Eigen::VectorXd grad(n);
  double f = objective(x, grad);

  struct Pair {
    Eigen::VectorXd s, y;
    double rho;
  };
  std::deque<Pair> history;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    if (grad.lpNorm<Eigen::Infinity>() <= options.gradient_tolerance)
      return {std::move(x), f, iter, true};

    // Two-loop recursion for the search direction.
    Eigen::VectorXd q = grad;
    std::vector<double> alpha(history.size());
    for (int i = static_cast<int>(history.size()) - 1; i >= 0; --i) {
      alpha[i] = history[i].rho * history[i].s.dot(q);
      q -= alpha[i] * history[i].y;
    }
    if (!history.empty()) {
      const auto& last = history.back();
      q *= last.s.dot(last.y) / last.y.squaredNorm();
    }
    for (std::size_t i = 0; i < history.size(); ++i) {
      const double beta = history[i].rho * history[i].y.dot(q);
      q += (alpha[i] - beta) * history[i].s;
    }
    Eigen::VectorXd direction = -q;
    double slope = grad.dot(direction);
    if (!(slope < 0.0)) { // fall back to steepest descent
      direction = -grad;
      slope = -grad.squaredNorm();
    }

    // Armijo backtracking; only non-increasing steps are accepted.
    double step = 1.0;
    const double c1 = 1e-4;
    Eigen::VectorXd x_new(n), grad_new(n);
    double f_new = f;
    bool accepted = false;
    for (int ls = 0; ls < 50; ++ls) {
      x_new = x + step * direction;
      f_new = objective(x_new, grad_new);
      if (std::isfinite(f_new) && f_new <= f + c1 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) return {std::move(x), f, iter, false};

    Pair pair;
    pair.s = x_new - x;
    pair.y = grad_new - grad;
    const double sy = pair.s.dot(pair.y);
    if (sy > 1e-12 * pair.s.norm() * pair.y.norm()) {
      pair.rho = 1.0 / sy;
      history.push_back(std::move(pair));
      if (static_cast<int>(history.size()) > options.memory) history.pop_front();
    }

    const double decrease = f - f_new;
    x.swap(x_new);
    grad.swap(grad_new);
    f = f_new;
    if (decrease <= options.step_tolerance * std::max(1.0, std::abs(f)))
      return {std::move(x), f, iter + 1, true};
  }
  return {std::move(x), f, options.max_iterations, false};
}

} // namespace esp::optim
